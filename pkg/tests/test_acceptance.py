"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed together at the end of the pytest run.
"""

import itertools
import math

import numpy as np

from qspace import io as qio
from qspace.cli import fixture_path
from qspace.clouds import (
    FiniteLattice,
    build_cloud_lattice,
    check_distributive,
    check_modular,
    cloud,
    clouds_intersect,
    lattice_report,
    load_fixture_lattice,
)
from qspace.nqm import Borelian, Observable, born_probability
from qspace.qset import (
    Kind,
    Species,
    Universe,
    disjoint_partition,
    permute_internal_labels,
    qcard,
    subqsets_of_qcard,
    swap_indiscernibility_check,
)
from qspace.topology import generate_cloud_topology, hausdorff_report, separation_test, verify_axioms
from qspace.wells import (
    GridSpec,
    TwoParticleState,
    WellSpec,
    default_grid,
    eigenstate,
    finite_well_bound_states,
    interference_term,
    probability_decomposition_residual,
    separation_sweep,
    sweep_monotonicity_violations,
    uncertainty_product,
)

from oracles import all_lattices, naive_distributive, naive_join, naive_meet, naive_modular

SEED = 20240601


def m_universe(**counts):
    return Universe.declare([Species(k, Kind.M_SMALL_ATOM) for k in counts], counts)


def test_criterion_01_infinite_well_null_interference(criterion):
    (w1, w2), n = qio.parse_wells(qio.load_json(fixture_path("wells_disjoint.json")))
    assert w1.center + w1.half_width < w2.center - w2.half_width
    s = TwoParticleState(eigenstate(w1, n), eigenstate(w2, n))
    grid = default_grid(s, 200)
    I = interference_term(s.left, s.right)
    r = probability_decomposition_residual(s, grid)
    criterion(1, "infinite-well null interference", I == 0.0 and r <= 1e-12, f"I={I}, residual={r:.3g}")


def test_criterion_02_finite_well_tunneling(criterion):
    base = (WellSpec(-1.0, 0.5, 10.0), WellSpec(1.0, 0.5, 10.0))
    rows = separation_sweep(base, [2.0, 2.5, 3.0], [10.0, 50.0, 200.0])
    positive = all(r.interference > 0 for r in rows)
    problems = sweep_monotonicity_violations(rows)
    # strictness: the sweep checker flags rises only, so check ties too
    ties = [
        (a, b)
        for a, b in itertools.combinations(rows, 2)
        if (a.separation == b.separation or a.depth == b.depth) and a.interference == b.interference
    ]
    at_two = min(r.interference for r in rows if r.separation == 2.0)
    criterion(
        2,
        "finite-well tunneling, interference > 0 and strictly decreasing",
        positive and not problems and not ties,
        f"min I at separation 2 = {at_two:.3g}",
    )


def test_criterion_03_idealization_convergence(criterion):
    E = finite_well_bound_states(WellSpec(0.0, 0.5, 1e4))[0].energy
    E1 = math.pi**2 / 2
    rel = abs(E - E1) / E1
    criterion(3, "finite-well ground energy at V0=1e4 within 1% of pi^2/2", rel <= 0.01, f"E={E:.6f}, rel err={rel:.4f}")


def test_criterion_04_antisymmetry(criterion):
    rng = np.random.default_rng(SEED)
    s = TwoParticleState(eigenstate(WellSpec(-1.0, 0.5, 50.0), 1), eigenstate(WellSpec(1.0, 0.5, 50.0), 2))
    a, b = rng.uniform(-2.5, 2.5, size=(2, 10_000))
    anti = np.max(np.abs(s.evaluate(a, b) + s.evaluate(b, a)))
    dens = np.max(np.abs(s.density(a, b) - s.density(b, a)))
    criterion(4, "antisymmetry and density symmetry at 1e4 pairs", anti <= 1e-12 and dens <= 1e-12, f"{anti:.3g}, {dens:.3g}")


def test_criterion_05_swap(criterion):
    rng = np.random.default_rng(SEED)
    labels = ["Ann", "Bob", "Cy", "Dee", "Eve"]
    quantum_ok = classical_ok = True
    for _ in range(100):
        k = int(rng.integers(1, 5))
        kinds = [Kind.M_SMALL_ATOM] * k
        if k > 1 and rng.random() < 0.5:
            kinds[-1] = Kind.M_ATOM
        names = [f"s{i}" for i in range(k)]
        ambient, spec = {}, {}
        for name, kind in zip(names, kinds):
            total = int(rng.integers(2, 7))
            if kind is Kind.M_ATOM:
                pool = labels[: min(total, len(labels))]
                ambient[name] = pool
                spec[name] = list(rng.choice(pool, size=int(rng.integers(1, len(pool))), replace=False))
            else:
                ambient[name] = total
                spec[name] = int(rng.integers(1, total))
        u = Universe.declare([Species(n, kd) for n, kd in zip(names, kinds)], ambient)
        a = u.qset(spec)
        for name, kind in zip(names, kinds):
            if kind is Kind.M_SMALL_ATOM:
                quantum_ok &= swap_indiscernibility_check(a, name)
            else:
                members = sorted(spec[name])
                outside = sorted(set(ambient[name]) - set(members))
                for r, i in itertools.product(members, outside):
                    swapped = (a - u.qset({name: [r]})) | u.qset({name: [i]})
                    classical_ok &= swapped != a and not swap_indiscernibility_check(a, name, r, i)
    criterion(5, "swap: m-atoms indiscernible, classical swap differs", quantum_ok and classical_ok)


def test_criterion_06_cloud_collapse(criterion):
    A = m_universe(s=6).ambient
    collapse = all(cloud(A, B).extent == A for eta in range(1, 7) for B in subqsets_of_qcard(A, eta))
    b, c = disjoint_partition(A, [2, 2])
    witness = b.isdisjoint(c) and clouds_intersect(cloud(A, b), cloud(A, c))
    criterion(6, "cloud collapse on {s:6} and the [2,2] witness", collapse and witness)


def test_criterion_07_topology_axioms(criterion):
    checked, failures, modes = 0, [], set()
    for k in (1, 2, 3):
        for counts in itertools.product(range(0, 9), repeat=k):
            if sum(counts) > 8:
                continue
            A = m_universe(**dict(zip("stu", counts))).ambient
            report = verify_axioms(generate_cloud_topology(A))
            checked += 1
            modes.add(report.axiom3)
            if not report.ok:
                failures.append((counts, report.violations))
    # mixed carriers with a classical species, kept to families of at most 16 opens
    for m_counts, n_classical in [((3,), 3), ((2, 2), 2), ((4, 1), 1), ((1,), 3), ((5, 2), 2)]:
        names = ["s", "t"][: len(m_counts)]
        species = [Species(n, Kind.M_SMALL_ATOM) for n in names] + [Species("x", Kind.M_ATOM)]
        ambient = dict(zip(names, m_counts), x=[f"c{i}" for i in range(n_classical)])
        report = verify_axioms(generate_cloud_topology(Universe.declare(species, ambient).ambient))
        checked += 1
        modes.add(report.axiom3)
        if not report.ok:
            failures.append((ambient, report.violations))
    criterion(
        7,
        "generated q-topologies satisfy axioms 1-3 (exhaustive unions)",
        not failures and modes == {"exhaustive"},
        f"{checked} carriers",
    )


def test_criterion_08_separation_dichotomy(criterion):
    X = m_universe(s=6).ambient
    T = generate_cloud_topology(X)
    rep = hausdorff_report(T)
    every_pair = all(not separation_test(T, p, q).separable for p, q in itertools.combinations(X.handles("s"), 2))
    u = Universe.declare([Species("person", Kind.M_ATOM)], {"person": ["John", "Paul", "Peter"]})
    classical = hausdorff_report(generate_cloud_topology(u.ambient)).hausdorff
    criterion(8, "Hausdorff false on {s:6}, true on 3 classical members", not rep.hausdorff and every_pair and classical)


def test_criterion_09_lattice_oracles(criterion):
    n5, m3, b3 = (load_fixture_lattice(x) for x in ("n5", "m3", "boolean3"))
    dn5, dm3 = check_distributive(n5), check_distributive(m3)
    fixtures_ok = (
        not dn5.distributive
        and dn5.witness is not None
        and not dm3.distributive
        and dm3.witness is not None
        and check_distributive(b3).distributive
        and not check_modular(n5).modular
        and check_modular(m3).modular
    )
    count, agree = 0, True
    for leq in all_lattices(8):
        count += 1
        n = len(leq)
        L = FiniteLattice.from_order([str(i) for i in range(n)], leq)
        agree &= all(
            L.meet[a][b] == naive_meet(leq, a, b) and L.join[a][b] == naive_join(leq, a, b)
            for a in range(n)
            for b in range(n)
        )
        agree &= check_distributive(L).distributive == naive_distributive(leq)
        agree &= check_modular(L).modular == naive_modular(leq)
    criterion(9, "lattice checkers on fixtures and all lattices up to 8 elements", fixtures_ok and agree, f"{count} lattices")


def test_criterion_10_born_rule(criterion):
    rng = np.random.default_rng(SEED)
    worst = {"additivity": 0.0, "total": 0.0, "certainty": 0.0, "superposition": 0.0}
    for _ in range(100):
        n = int(rng.integers(2, 7))
        q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        values = np.sort(rng.choice(np.arange(-10, 11), size=n, replace=False)).astype(float)
        A = Observable(q @ np.diag(values) @ q.conj().T)
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi /= np.linalg.norm(psi)
        cut = float(rng.uniform(-10, 10))
        left = Borelian.between(-math.inf, cut, lo_closed=False, hi_closed=False)
        right = Borelian.between(cut, math.inf, hi_closed=False)
        pl, pr = born_probability(psi, A, left), born_probability(psi, A, right)
        whole = born_probability(psi, A, left.union(right))
        worst["additivity"] = max(worst["additivity"], abs(whole - pl - pr))
        worst["total"] = max(worst["total"], abs(born_probability(psi, A, Borelian.real_line()) - 1))
        near = lambda v: Borelian.between(v - 1e-6, v + 1e-6)
        i, j = rng.choice(n, size=2, replace=False)
        worst["certainty"] = max(worst["certainty"], abs(born_probability(q[:, i], A, near(values[i])) - 1))
        sup = (q[:, i] + q[:, j]) / math.sqrt(2)
        worst["superposition"] = max(worst["superposition"], abs(born_probability(sup, A, near(values[i])) - 0.5))
    ok = worst["additivity"] <= 1e-12 and worst["total"] <= 1e-10 and worst["certainty"] <= 1e-10 and worst["superposition"] <= 1e-10
    criterion(10, "Born rule properties on 100 random fixtures", ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items()))


def test_criterion_11_uncertainty(criterion):
    products = []
    for depth in (1.0, 10.0, 50.0, 200.0, 1e3, 1e4):
        products += [uncertainty_product(s) for s in finite_well_bound_states(WellSpec(0.0, 0.5, depth))]
    products += [uncertainty_product(eigenstate(WellSpec(0.0, 0.5), n)) for n in range(1, 11)]
    ground = uncertainty_product(eigenstate(WellSpec(0.0, 0.5), 1))
    ok = min(products) >= 0.5 and abs(ground - 0.5678) <= 1e-3
    criterion(11, "uncertainty product >= 1/2 and n=1 value 0.5678", ok, f"{len(products)} states, n=1 -> {ground:.6f}")


def _public_outputs(X):
    """Everything observable about a carrier, serialized."""
    T = generate_cloud_topology(X)
    handles = [h for name in X.species_present for h in X.handles(name)]
    seps = []
    for p, q in itertools.product(handles, repeat=2):
        r = separation_test(T, p, q)
        seps.append([p.describe(), q.describe(), r.separable, [U.to_spec() for U in r.witness_opens or ()]])
    subs = [B.to_spec() for eta in range(qcard(X) + 1) for B in subqsets_of_qcard(X, eta)]
    comp = X.composition
    return qio.dumps(
        {
            "spec": X.to_spec(),
            "describe": X.describe(),
            "subqsets": subs,
            "clouds": [cloud(X, B).extent.to_spec() for eta in range(qcard(X) + 1) for B in subqsets_of_qcard(X, eta)],
            "partition": [p.to_spec() for p in disjoint_partition(X, [1] * qcard(X))],
            "lattice": build_cloud_lattice(X).to_json(),
            "lattice_report": lattice_report(build_cloud_lattice(X)),
            "opens": [U.to_spec() for U in T.opens],
            "axioms": verify_axioms(T).to_json(),
            "hausdorff": hausdorff_report(T).to_json(),
            "separation": seps,
            "swap": {n: swap_indiscernibility_check(X - X.universe.qset({n: 1}), n) for n in comp if comp[n] >= 2},
        }
    )


def test_criterion_12_label_permutation_invariance(criterion):
    carriers, permutations, mismatches = 0, 0, []
    for k in (1, 2):
        for counts in itertools.product(range(1, 5), repeat=k):
            names = "st"[:k]
            species = [Species(n, Kind.M_SMALL_ATOM) for n in names] + [Species("x", Kind.M_ATOM)]
            X = Universe.declare(species, {**dict(zip(names, counts)), "x": ["Paul"]}).ambient
            reference = _public_outputs(X)
            carriers += 1
            for perms in itertools.product(*(itertools.permutations(range(c)) for c in counts)):
                Y = X
                for name, perm in zip(names, perms):
                    Y = permute_internal_labels(Y, name, perm)
                permutations += 1
                if _public_outputs(Y) != reference:
                    mismatches.append((counts, perms))
    criterion(
        12,
        "public outputs byte-identical under every internal relabelling",
        not mismatches,
        f"{carriers} carriers, {permutations} relabellings",
    )
