"""Clouds of subqsets and a small toolkit for finite lattices.

``cloud(A, B)`` collects every element of ``A`` indistinguishable from some
element of ``B``: the whole ambient class of each m-atom species that ``B``
touches, plus ``B``'s classical members (an M-atom is indistinguishable only
from itself).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Hashable, Sequence

from .errors import DomainError, ResourceError
from .qset import Qset, qcard, subqsets_of_qcard, union

DEFAULT_BOUND = 12


@dataclass(frozen=True)
class Cloud:
    ambient: Qset
    core: Qset
    extent: Qset


def cloud(ambient: Qset, core: Qset) -> Cloud:
    if not core.issubset(ambient):
        raise DomainError(f"core {core.describe()} is not a subqset of ambient {ambient.describe()}")
    touched = {name for name, _ in core._atoms if core.universe.species_named(name).quantum}
    atoms = {a for a in ambient._atoms if a[0] in touched}
    atoms |= core.classical_members
    return Cloud(ambient, core, Qset(ambient.universe, frozenset(atoms)))


def clouds_intersect(c1: Cloud, c2: Cloud) -> bool:
    if c1.ambient != c2.ambient:
        raise DomainError("clouds are taken relative to different ambients")
    return not c1.extent.isdisjoint(c2.extent)


@dataclass(frozen=True)
class FiniteLattice:
    """A finite lattice stored as an order matrix plus meet/join tables.

    ``elements`` are display labels; ``payload`` optionally carries the objects
    they stand for (e.g. cloud extents).  Tables are indexed by position.
    """

    elements: tuple[str, ...]
    leq: tuple[tuple[bool, ...], ...]
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[int, ...], ...]
    payload: tuple = ()

    def __len__(self):
        return len(self.elements)

    def index(self, label: str) -> int:
        return self.elements.index(label)

    @classmethod
    def from_order(cls, elements: Sequence[str], leq, payload: Sequence = ()) -> FiniteLattice:
        """Build from a partial order; ``leq`` is a matrix or a callable on indices."""
        n = len(elements)
        if len(set(elements)) != n:
            raise DomainError("lattice element labels must be unique")
        if callable(leq):
            rel = tuple(tuple(bool(leq(i, j)) for j in range(n)) for i in range(n))
        else:
            rel = tuple(tuple(bool(x) for x in row) for row in leq)
        _check_partial_order(rel)
        meet = tuple(tuple(_bound(rel, i, j, lower=True, labels=elements) for j in range(n)) for i in range(n))
        join = tuple(tuple(_bound(rel, i, j, lower=False, labels=elements) for j in range(n)) for i in range(n))
        return cls(tuple(elements), rel, meet, join, tuple(payload))

    @classmethod
    def from_covers(cls, elements: Sequence[str], covers: Sequence[Sequence[str]]) -> FiniteLattice:
        """Build from covering pairs ``(lower, upper)`` via reflexive-transitive closure."""
        idx = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        rel = [[i == j for j in range(n)] for i in range(n)]
        for pair in covers:
            lo, hi = pair
            if lo not in idx or hi not in idx:
                raise DomainError(f"cover {pair!r} mentions an unknown element")
            rel[idx[lo]][idx[hi]] = True
        for k in range(n):
            for i in range(n):
                if rel[i][k]:
                    for j in range(n):
                        if rel[k][j]:
                            rel[i][j] = True
        return cls.from_order(elements, rel)

    @classmethod
    def from_json(cls, doc: dict) -> FiniteLattice:
        return cls.from_covers(doc["elements"], doc["covers"])

    def covers(self) -> list[tuple[str, str]]:
        n = len(self)
        out = []
        for i in range(n):
            for j in range(n):
                if i != j and self.leq[i][j]:
                    if not any(k not in (i, j) and self.leq[i][k] and self.leq[k][j] for k in range(n)):
                        out.append((self.elements[i], self.elements[j]))
        return out

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "covers": [list(c) for c in self.covers()]}


def _check_partial_order(rel) -> None:
    n = len(rel)
    for i in range(n):
        if not rel[i][i]:
            raise DomainError("order is not reflexive")
        for j in range(n):
            if i != j and rel[i][j] and rel[j][i]:
                raise DomainError("order is not antisymmetric")
            for k in range(n):
                if rel[i][j] and rel[j][k] and not rel[i][k]:
                    raise DomainError("order is not transitive")


def _bound(rel, i, j, lower, labels) -> int:
    n = len(rel)
    if lower:
        cands = [k for k in range(n) if rel[k][i] and rel[k][j]]
        best = [k for k in cands if all(rel[c][k] for c in cands)]
    else:
        cands = [k for k in range(n) if rel[i][k] and rel[j][k]]
        best = [k for k in cands if all(rel[k][c] for c in cands)]
    if not best:
        kind = "meet" if lower else "join"
        raise DomainError(f"not a lattice: no {kind} for {labels[i]!r}, {labels[j]!r}")
    return best[0]


def lattice_law_violations(L: FiniteLattice) -> list[str]:
    """Exhaustively test the lattice identities on the stored tables."""
    m, j, n = L.meet, L.join, len(L)
    bad = []
    for a in range(n):
        if m[a][a] != a or j[a][a] != a:
            bad.append(f"idempotence fails at {L.elements[a]}")
        for b in range(n):
            if m[a][b] != m[b][a] or j[a][b] != j[b][a]:
                bad.append(f"commutativity fails at {L.elements[a]}, {L.elements[b]}")
            if m[a][j[a][b]] != a or j[a][m[a][b]] != a:
                bad.append(f"absorption fails at {L.elements[a]}, {L.elements[b]}")
            if L.leq[a][b] != (m[a][b] == a):
                bad.append(f"order disagrees with meet at {L.elements[a]}, {L.elements[b]}")
            for c in range(n):
                if m[m[a][b]][c] != m[a][m[b][c]] or j[j[a][b]][c] != j[a][j[b][c]]:
                    bad.append(f"associativity fails at {L.elements[a]}, {L.elements[b]}, {L.elements[c]}")
    return bad


@dataclass(frozen=True)
class DistributivityReport:
    distributive: bool
    witness: tuple[str, str, str] | None = None


@dataclass(frozen=True)
class ModularityReport:
    modular: bool
    witness: tuple[str, str, str] | None = None


def check_distributive(L: FiniteLattice) -> DistributivityReport:
    """First triple (in element order) with a meet (b join c) != (a meet b) join (a meet c)."""
    m, j, n = L.meet, L.join, len(L)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if m[a][j[b][c]] != j[m[a][b]][m[a][c]]:
                    return DistributivityReport(False, (L.elements[a], L.elements[b], L.elements[c]))
    return DistributivityReport(True)


def check_modular(L: FiniteLattice) -> ModularityReport:
    """First triple with a <= c and a join (b meet c) != (a join b) meet c."""
    m, j, n = L.meet, L.join, len(L)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if L.leq[a][c] and j[a][m[b][c]] != m[j[a][b]][c]:
                    return ModularityReport(False, (L.elements[a], L.elements[b], L.elements[c]))
    return ModularityReport(True)


def lattice_report(L: FiniteLattice) -> dict:
    d, md = check_distributive(L), check_modular(L)
    witness = d.witness or md.witness or ()
    return {"distributive": d.distributive, "modular": md.modular, "witness": list(witness)}


def build_cloud_lattice(ambient: Qset, bound: int = DEFAULT_BOUND) -> FiniteLattice:
    """Cloud extents of every subqset of ``ambient``, ordered by inclusion.

    Meet is plain intersection of extents; join is the cloud of the union.
    """
    if qcard(ambient) > bound:
        raise ResourceError(f"qcard {qcard(ambient)} exceeds the enumeration bound {bound}")
    extents: dict[frozenset, Qset] = {}
    for eta in range(qcard(ambient) + 1):
        for sub in subqsets_of_qcard(ambient, eta):
            ext = cloud(ambient, sub).extent
            extents.setdefault(ext._atoms, ext)
    ordered = sorted(extents.values(), key=lambda q: (qcard(q), q.describe()))
    index: dict[Hashable, int] = {q._atoms: i for i, q in enumerate(ordered)}
    n = len(ordered)

    def lookup(q: Qset) -> int:
        try:
            return index[q._atoms]
        except KeyError:
            raise DomainError(f"{q.describe()} is not a cloud extent of the ambient") from None

    leq = tuple(tuple(ordered[i].issubset(ordered[j]) for j in range(n)) for i in range(n))
    meet = tuple(tuple(lookup(ordered[i] & ordered[j]) for j in range(n)) for i in range(n))
    join = tuple(
        tuple(lookup(cloud(ambient, union(ordered[i], ordered[j])).extent) for j in range(n)) for i in range(n)
    )
    return FiniteLattice(tuple(q.describe() for q in ordered), leq, meet, join, tuple(ordered))


def load_fixture_lattice(name: str) -> FiniteLattice:
    """Shipped oracle lattices: ``n5``, ``m3``, ``boolean3``, ``chain2``."""
    text = resources.files("qspace.fixtures").joinpath(f"lattice_{name}.json").read_text()
    return FiniteLattice.from_json(json.loads(text))
