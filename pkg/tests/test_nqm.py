import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qspace.errors import DomainError
from qspace.nqm import (
    Borelian,
    FiniteHilbert,
    Interval,
    NQMStructure,
    Observable,
    born_probability,
    is_hermitian,
    is_unitary,
    validate_structure,
)
from qspace.qset import Kind, Species, Universe

PAULI_X = [[0, 1], [1, 0]]
PAULI_Z = [[1, 0], [0, -1]]


def random_hermitian(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (M + M.conj().T) / 2


def random_unitary(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def systems(n=1):
    u = Universe.declare([Species("e", Kind.M_SMALL_ATOM)], {"e": n})
    return u.ambient


def test_hermitian_and_unitary_examples():
    assert is_hermitian(PAULI_X) and is_hermitian(PAULI_Z)
    assert not is_hermitian([[0, 1], [0, 0]])
    assert is_unitary(PAULI_X)
    assert not is_unitary([[1, 1], [0, 1]])
    assert is_hermitian([[0, 1 + 1e-11], [1, 0]]) and not is_hermitian([[0, 1 + 1e-11], [1, 0]], tol=1e-12)
    with pytest.raises(DomainError):
        is_hermitian([[1, 2, 3]])


def test_born_examples():
    up = [1, 0]
    plus = np.array([1, 1]) / math.sqrt(2)
    Z, X = Observable(PAULI_Z), Observable(PAULI_X)
    assert born_probability(up, Z, Borelian.point(1.0)) == pytest.approx(1.0)
    assert born_probability(up, Z, Borelian.point(-1.0)) == pytest.approx(0.0)
    assert born_probability(plus, Z, Borelian.between(0, 2)) == pytest.approx(0.5)
    assert born_probability(plus, X, Borelian.between(0.5, 1.5)) == pytest.approx(1.0)
    assert born_probability(plus, X, Borelian.between(-1, 1, lo_closed=False, hi_closed=False)) == 0.0


def test_born_errors():
    with pytest.raises(DomainError):
        born_probability([1, 1], PAULI_Z, Borelian.real_line())
    with pytest.raises(DomainError):
        born_probability([1, 0, 0], PAULI_Z, Borelian.real_line())
    with pytest.raises(DomainError):
        Observable([[0, 1], [0, 0]])


def test_degenerate_eigenvalues_merge():
    A = Observable(np.diag([1.0, 1.0 + 1e-12, 2.0]))
    assert len(A.eigenspaces) == 2
    assert A.eigenspaces[0][1].shape == (3, 2)
    psi = np.array([1, 1, 0]) / math.sqrt(2)
    assert born_probability(psi, A, Borelian.between(0.99, 1.01)) == pytest.approx(1.0)


def test_borelian_construction():
    with pytest.raises(DomainError):
        Borelian((Interval(0, 2), Interval(1, 3)))
    with pytest.raises(DomainError):
        Borelian((Interval(0, 1), Interval(1, 2)))
    touching = Borelian((Interval(0, 1, hi_closed=False), Interval(1, 2)))
    assert touching.contains(1.0) and touching.contains(0.5)
    with pytest.raises(DomainError):
        Interval(2, 1)
    with pytest.raises(DomainError):
        Interval(1, 1, lo_closed=False)
    with pytest.raises(DomainError):
        Borelian.between(0, 1).union(Borelian.between(0.5, 2))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_born_properties(n, seed, c1, c2):
    rng = np.random.default_rng(seed)
    A = Observable(random_hermitian(rng, n))
    psi = random_state(rng, n)
    lo, hi = sorted((c1, c2))
    d1 = Borelian.between(-math.inf, lo, lo_closed=False, hi_closed=False)
    d2 = Borelian.between(lo, hi)
    d3 = Borelian.between(hi, math.inf, lo_closed=False, hi_closed=False) if hi > lo else Borelian.between(
        hi, math.inf, lo_closed=False, hi_closed=False
    )
    total = born_probability(psi, A, Borelian.real_line())
    assert total == pytest.approx(1.0, abs=1e-10)
    parts = [born_probability(psi, A, d) for d in (d1, d2, d3)]
    assert all(0 <= p <= 1 for p in parts)
    assert sum(parts) == pytest.approx(1.0, abs=1e-10)
    assert born_probability(psi, A, d1.union(d2)) == pytest.approx(parts[0] + parts[1], abs=1e-10)
    U = random_unitary(rng, n)
    B = Observable(U @ A.matrix @ U.conj().T)
    assert born_probability(U @ psi, B, d2) == pytest.approx(parts[1], abs=1e-10)


def _structure(**over):
    base = dict(systems=systems(), spaces=[FiniteHilbert(2)], observables=[[PAULI_X, PAULI_Z]], unitaries=[[PAULI_X]])
    base.update(over)
    return NQMStructure(**base)


def test_validate_structure_examples():
    ok = validate_structure(_structure())
    assert ok == {"ok": True, "clauses": {c: True for c in ok["clauses"]}, "failures": []}

    bad = validate_structure(_structure(observables=[[[[0, 1], [0, 0]]]]))
    assert not bad["ok"] and not bad["clauses"]["observables"]
    assert bad["failures"] == ["clause 3: observables[0][0] is not Hermitian"]

    empty = validate_structure(_structure(systems=Universe.declare([], {}).ambient))
    assert not empty["clauses"]["systems"] and empty["failures"][0].startswith("clause 1")

    bad_u = validate_structure(_structure(unitaries=[[[[1, 1], [0, 1]]]]))
    assert bad_u["clauses"] == {**bad_u["clauses"], "unitaries": False}

    wrong_size = validate_structure(_structure(observables=[[np.eye(3)]]))
    assert "size 3" in wrong_size["failures"][0]


def test_validate_tolerance_knob():
    near = [[0, 1 + 1e-8], [1, 0]]
    assert not validate_structure(_structure(observables=[[near]]))["ok"]
    assert validate_structure(_structure(observables=[[near]]), hermitian_tol=1e-6)["ok"]


def test_bad_borel_clause():
    class Broken(Borelian):
        @classmethod
        def point(cls, x):
            return cls.real_line()

    r = validate_structure(_structure(borel=Broken))
    assert r["clauses"]["borel"] is False


def test_hilbert_dimension():
    with pytest.raises(DomainError):
        FiniteHilbert(0)
    assert FiniteHilbert.inner([1j, 0], [1j, 0]) == 1


def test_born_self_check_single_eigenspace():
    from qspace.nqm import born_self_check

    worst = born_self_check(Observable(np.eye(3)), np.random.default_rng(0))
    assert worst["superposition"] == 0.0 and worst["certainty"] <= 1e-12
