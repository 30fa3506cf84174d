"""Finite-dimensional instance of the non-relativistic QM structure.

The structure is ``<S, {H_i}, {A_ij}, {U_ik}, B(R)>``: a collection of
systems, Hilbert spaces (here C^n), Hermitian observables and unitary
operators on them, and Borel sets of the real line (here finite unions of
intervals).  ``born_probability`` is the probability function P(psi, A, Delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError
from .qset import Qset, qcard

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
DEGENERACY_TOL = 1e-9


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    return A


def is_hermitian(A, tol: float = HERMITIAN_TOL) -> bool:
    A = _square(A)
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= tol)


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = _square(U)
    return bool(np.max(np.abs(U @ U.conj().T - np.eye(len(U))), initial=0.0) <= tol)


@dataclass(frozen=True)
class FiniteHilbert:
    dimension: int

    def __post_init__(self):
        if isinstance(self.dimension, bool) or not isinstance(self.dimension, int) or self.dimension < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dimension!r}")

    @staticmethod
    def inner(u, v) -> complex:
        return complex(np.vdot(u, v))


class Observable:
    """A Hermitian matrix with its eigenspaces computed once.

    Eigenvalues closer than ``DEGENERACY_TOL`` are merged into one eigenspace.
    """

    def __init__(self, matrix, tol: float = HERMITIAN_TOL):
        m = _square(matrix)
        if not is_hermitian(m, tol):
            raise DomainError("observable matrix is not Hermitian")
        self._matrix = m
        self._matrix.setflags(write=False)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dimension(self) -> int:
        return len(self._matrix)

    @cached_property
    def eigenspaces(self) -> tuple[tuple[float, np.ndarray], ...]:
        """(eigenvalue, orthonormal basis columns) per distinct eigenvalue."""
        herm = 0.5 * (self._matrix + self._matrix.conj().T)
        vals, vecs = np.linalg.eigh(herm)
        groups, start = [], 0
        for i in range(1, len(vals) + 1):
            if i == len(vals) or vals[i] - vals[i - 1] > DEGENERACY_TOL:
                block = vals[start:i]
                basis = vecs[:, start:i]
                basis.setflags(write=False)
                groups.append((float(np.mean(block)), basis))
                start = i
        return tuple(groups)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise DomainError(f"bad interval [{self.lo}, {self.hi}]")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise DomainError("degenerate interval must be closed")

    def contains(self, x: float) -> bool:
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    def meets(self, other: Interval) -> bool:
        a, b = sorted((self, other), key=lambda i: (i.lo, not i.lo_closed))
        if b.lo < a.hi:
            return True
        return b.lo == a.hi and a.hi_closed and b.lo_closed


@dataclass(frozen=True)
class Borelian:
    """A finite union of pairwise disjoint intervals, kept sorted."""

    intervals: tuple[Interval, ...] = field(default=())

    def __post_init__(self):
        ivs = tuple(sorted(self.intervals, key=lambda i: (i.lo, not i.lo_closed)))
        for a, b in zip(ivs, ivs[1:]):
            if a.meets(b):
                raise DomainError(f"intervals {a} and {b} overlap")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def real_line(cls) -> Borelian:
        return cls((Interval(-math.inf, math.inf, False, False),))

    @classmethod
    def point(cls, x: float) -> Borelian:
        return cls((Interval(x, x),))

    @classmethod
    def between(cls, lo: float, hi: float, lo_closed=True, hi_closed=True) -> Borelian:
        return cls((Interval(lo, hi, lo_closed, hi_closed),))

    def contains(self, x: float) -> bool:
        return any(i.contains(x) for i in self.intervals)

    def disjoint_from(self, other: Borelian) -> bool:
        return not any(a.meets(b) for a in self.intervals for b in other.intervals)

    def union(self, other: Borelian) -> Borelian:
        """Union of disjoint Borelians."""
        if not self.disjoint_from(other):
            raise DomainError("union is only formed for disjoint Borelians")
        return Borelian(self.intervals + other.intervals)


def born_probability(psi, A: Observable, delta: Borelian, norm_tol: float = NORM_TOL) -> float:
    """Probability that measuring ``A`` in state ``psi`` gives a value in ``delta``."""
    if not isinstance(A, Observable):
        A = Observable(A)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (A.dimension,):
        raise DomainError(f"state has dimension {psi.size}, observable {A.dimension}")
    if abs(np.linalg.norm(psi) - 1) > norm_tol:
        raise DomainError(f"state is not normalized (norm {np.linalg.norm(psi)})")
    total = 0.0
    for value, basis in A.eigenspaces:
        if delta.contains(value):
            total += float(np.sum(np.abs(basis.conj().T @ psi) ** 2))
    return min(max(total, 0.0), 1.0)


BORN_LIMITS = {"additivity": 1e-12, "total": 1e-10, "certainty": 1e-10, "superposition": 1e-10}


def born_self_check(A: Observable, rng: np.random.Generator, trials: int = 20) -> dict[str, float]:
    """Worst deviation of each Born-rule property over random states and cuts."""
    n = A.dimension
    spaces = A.eigenspaces
    worst = dict.fromkeys(BORN_LIMITS, 0.0)
    for _ in range(trials):
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi /= np.linalg.norm(psi)
        cut = float(rng.uniform(spaces[0][0] - 1, spaces[-1][0] + 1))
        below = Borelian.between(-math.inf, cut, lo_closed=False, hi_closed=False)
        above = Borelian.between(cut, math.inf, hi_closed=False)
        split = born_probability(psi, A, below) + born_probability(psi, A, above)
        worst["additivity"] = max(worst["additivity"], abs(born_probability(psi, A, below.union(above)) - split))
        worst["total"] = max(worst["total"], abs(born_probability(psi, A, Borelian.real_line()) - 1))
        picks = rng.permutation(len(spaces))[:2]
        value, basis = spaces[picks[0]]
        worst["certainty"] = max(worst["certainty"], abs(born_probability(basis[:, 0], A, Borelian.point(value)) - 1))
        if len(picks) == 2:
            sup = (basis[:, 0] + spaces[picks[1]][1][:, 0]) / math.sqrt(2)
            worst["superposition"] = max(worst["superposition"], abs(born_probability(sup, A, Borelian.point(value)) - 0.5))
    return worst


@dataclass
class NQMStructure:
    """Raw components; nothing is validated until :func:`validate_structure`."""

    systems: Qset | None
    spaces: Sequence[FiniteHilbert | int]
    observables: Sequence[Sequence[object]]
    unitaries: Sequence[Sequence[object]]
    borel: type = Borelian


CLAUSES = ("systems", "spaces", "observables", "unitaries", "borel")


def validate_structure(s: NQMStructure, hermitian_tol: float = HERMITIAN_TOL, unitary_tol: float = UNITARY_TOL) -> dict:
    """Per-clause check of the five components; ``failures`` names each problem."""
    failures: dict[str, list[str]] = {c: [] for c in CLAUSES}

    if s.systems is None or qcard(s.systems) == 0:
        failures["systems"].append("clause 1: the collection of systems is empty")

    dims = []
    if not s.spaces:
        failures["spaces"].append("clause 2: no Hilbert spaces")
    for i, sp in enumerate(s.spaces):
        try:
            dims.append(sp.dimension if isinstance(sp, FiniteHilbert) else FiniteHilbert(sp).dimension)
        except DomainError as exc:
            failures["spaces"].append(f"clause 2: spaces[{i}]: {exc}")
            dims.append(None)

    for clause, key, family, check in (
        ("clause 3", "observables", s.observables, lambda m: is_hermitian(m, hermitian_tol)),
        ("clause 4", "unitaries", s.unitaries, lambda m: is_unitary(m, unitary_tol)),
    ):
        if len(family) > len(dims):
            failures[key].append(f"{clause}: {key} given for {len(family)} spaces, only {len(dims)} declared")
        for i, ops in enumerate(family):
            dim = dims[i] if i < len(dims) else None
            for j, op in enumerate(ops):
                where = f"{key}[{i}][{j}]"
                try:
                    m = _square(op)
                except (DomainError, ValueError, TypeError) as exc:
                    failures[key].append(f"{clause}: {where}: {exc}")
                    continue
                if dim is not None and len(m) != dim:
                    failures[key].append(f"{clause}: {where}: size {len(m)} does not match space dimension {dim}")
                elif not check(m):
                    kind = "Hermitian" if key == "observables" else "unitary"
                    failures[key].append(f"{clause}: {where} is not {kind}")

    try:
        line, pt = s.borel.real_line(), s.borel.point(0.0)
        ok = line.contains(0.0) and line.contains(-1e300) and pt.contains(0.0) and not pt.contains(1e-12)
        try:
            s.borel((Interval(0, 2), Interval(1, 3)))
            ok = False  # overlapping intervals must be rejected
        except DomainError:
            pass
        if not ok:
            failures["borel"].append("clause 5: Borelian constructor misbehaves")
    except Exception as exc:  # noqa: BLE001 - any failure here is a clause failure
        failures["borel"].append(f"clause 5: {exc}")

    return {
        "ok": not any(failures.values()),
        "clauses": {c: not failures[c] for c in CLAUSES},
        "failures": [msg for c in CLAUSES for msg in failures[c]],
    }
