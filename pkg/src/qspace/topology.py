"""Q-topologies whose opens are clouds, and Hausdorff-style separation.

An m-atom handle counts as lying in an open when the open holds a positive
number of its species; nothing finer is observable.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .clouds import DEFAULT_BOUND, cloud
from .errors import DomainError, ResourceError
from .qset import ElementHandle, Qset, qcard, subqsets_of_qcard

EXHAUSTIVE_LIMIT = 16  # families up to this size get every subfamily union checked
DEFAULT_SAMPLE = 256


@dataclass(frozen=True)
class QTopology:
    carrier: Qset
    opens: tuple[Qset, ...]


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    axiom3: str = "exhaustive"  # or "sampled"

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations), "axiom3": self.axiom3}


@dataclass(frozen=True)
class SeparationResult:
    separable: bool
    witness_opens: tuple[Qset, Qset] | None = None
    obstruction: str | None = None


@dataclass(frozen=True)
class HausdorffReport:
    hausdorff: bool
    failing_pairs: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"hausdorff": self.hausdorff, "failing_pairs": list(self.failing_pairs)}


def _sort_key(q: Qset):
    return (qcard(q), q.describe())


def verify_axioms(
    T: QTopology, sample: int | None = None, seed: int = 0, exhaustive_limit: int = EXHAUSTIVE_LIMIT
) -> AxiomReport:
    """Check that the opens form a q-topology on the carrier.

    Axiom 3 (unions of any subfamily) is checked over every subfamily when
    the family has at most ``exhaustive_limit`` members; otherwise over all
    pairs plus ``sample`` random subfamilies drawn with ``seed``.
    """
    X, opens = T.carrier, T.opens
    present = {U._atoms for U in opens}
    violations = []

    for U in opens:
        if not U.issubset(X):
            violations.append(f"family: {U.describe()} is not contained in the carrier")
        elif cloud(X, U).extent != U:
            violations.append(f"family: {U.describe()} is not a cloud of a subqset of the carrier")

    if frozenset() not in present:
        violations.append("axiom 1: the empty qset is not open")
    if X._atoms not in present:
        violations.append(f"axiom 1: the carrier {X.describe()} is not open")

    for U, V in itertools.combinations_with_replacement(opens, 2):
        if (U._atoms & V._atoms) not in present:
            violations.append(f"axiom 2: {U.describe()} & {V.describe()} is not open")

    atoms = [U._atoms for U in opens]
    n = len(atoms)
    mode = "exhaustive"
    if n <= exhaustive_limit:
        unions = [frozenset()] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & -mask
            unions[mask] = unions[mask ^ low] | atoms[low.bit_length() - 1]
            if unions[mask] not in present:
                members = [opens[i].describe() for i in range(n) if mask >> i & 1]
                violations.append(f"axiom 3: union of {members} is not open")
    else:
        mode = "sampled"
        families = [(i, j) for i, j in itertools.combinations(range(n), 2)]
        rng = random.Random(seed)
        for _ in range(DEFAULT_SAMPLE if sample is None else sample):
            k = rng.randint(0, n)
            families.append(tuple(sorted(rng.sample(range(n), k))))
        for fam in families:
            u = frozenset().union(*(atoms[i] for i in fam))
            if u not in present:
                violations.append(f"axiom 3: union of {[opens[i].describe() for i in fam]} is not open")
    return AxiomReport(not violations, violations, mode)


def generate_cloud_topology(carrier: Qset, bound: int = DEFAULT_BOUND) -> QTopology:
    """Cloud extents of all subqsets, closed under intersection and union."""
    if qcard(carrier) > bound:
        raise ResourceError(f"qcard {qcard(carrier)} exceeds the enumeration bound {bound}")
    family: dict[frozenset, Qset] = {}
    for eta in range(qcard(carrier) + 1):
        for sub in subqsets_of_qcard(carrier, eta):
            ext = cloud(carrier, sub).extent
            family.setdefault(ext._atoms, ext)
    family.setdefault(carrier._atoms, carrier)
    changed = True
    while changed:
        changed = False
        current = list(family.values())
        for U, V in itertools.combinations(current, 2):
            for W in (U & V, U | V):
                if W._atoms not in family:
                    family[W._atoms] = W
                    changed = True
    return QTopology(carrier, tuple(sorted(family.values(), key=_sort_key)))


def _in_open(U: Qset, h: ElementHandle) -> bool:
    if h.species.quantum:
        return U.count(h.species.name) > 0
    return U.contains_handle(h)


def separation_test(T: QTopology, p: ElementHandle, q: ElementHandle) -> SeparationResult:
    for h in (p, q):
        if not T.carrier.contains_handle(h):
            raise DomainError(f"handle of {h.describe()} does not designate an element of the carrier")
    around_p = [U for U in T.opens if _in_open(U, p)]
    around_q = [V for V in T.opens if _in_open(V, q)]
    for U in around_p:
        for V in around_q:
            if U.isdisjoint(V):
                return SeparationResult(True, witness_opens=(U, V))
    return SeparationResult(
        False,
        obstruction=f"every open containing {p.describe()} meets every open containing {q.describe()}",
    )


def _representatives(X: Qset) -> list[tuple[ElementHandle, int]]:
    reps = []
    for name in X.species_present:
        hs = X.handles(name)
        if hs[0].species.quantum:
            reps.append((hs[0], len(hs)))
        else:
            reps.extend((h, 1) for h in hs)
    return reps


def hausdorff_report(T: QTopology) -> HausdorffReport:
    """Separation over all pairs of distinct elements, one representative per m-atom species.

    ``pairs`` in a failing entry counts the element pairs the representative
    stands for.
    """
    failing = []
    reps = _representatives(T.carrier)
    for i, (h, n) in enumerate(reps):
        if h.species.quantum and n >= 2:
            other = T.carrier.handles(h.species.name)[1]
            if not separation_test(T, h, other).separable:
                failing.append({"p": h.describe(), "q": h.describe(), "pairs": n * (n - 1) // 2})
        for g, m in reps[i + 1 :]:
            if not separation_test(T, h, g).separable:
                failing.append({"p": h.describe(), "q": g.describe(), "pairs": n * m})
    return HausdorffReport(not failing, failing)


def hausdorff_report_exhaustive(T: QTopology) -> HausdorffReport:
    """Same as :func:`hausdorff_report` without the species-symmetry reduction."""
    handles = [h for name in T.carrier.species_present for h in T.carrier.handles(name)]
    tally: dict[tuple[str, str], int] = {}
    for h, g in itertools.combinations(handles, 2):
        if not separation_test(T, h, g).separable:
            key = (h.describe(), g.describe())
            tally[key] = tally.get(key, 0) + 1
    failing = [{"p": p, "q": q, "pairs": n} for (p, q), n in tally.items()]
    return HausdorffReport(not failing, failing)
