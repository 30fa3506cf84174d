"""Quasi-sets over a declared universe of species.

A :class:`Qset` exposes only how many m-atoms of each species it holds and
which labelled M-atoms (classical individuals) it contains.  Internally each
m-atom occupies an opaque token drawn from the universe's ambient pool so
that set algebra (disjointness, union, intersection) is well defined; tokens
never appear in any public output.

Qsets built directly from a composition (``universe.qset({"e": 2})``) take the
lowest tokens of each species.  On such canonical qsets union and
intersection reduce to per-species maximum and minimum counts, and
difference to count subtraction floored at zero.  Qsets returned by
:func:`disjoint_partition` occupy disjoint tokens, so their union adds counts
and their intersection is empty even though the parts may be indiscernible.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DomainError

__all__ = [
    "Kind",
    "Species",
    "Universe",
    "Qset",
    "ElementHandle",
    "qcard",
    "subqsets_of_qcard",
    "disjoint_partition",
    "union",
    "intersection",
    "difference",
    "indiscernible",
    "swap_indiscernibility_check",
    "permute_internal_labels",
]


class Kind(enum.Enum):
    M_ATOM = "M"  # classical urelement, individually identified
    M_SMALL_ATOM = "m"  # quantum urelement, indiscernible within its species


@dataclass(frozen=True)
class Species:
    name: str
    kind: Kind

    @property
    def quantum(self) -> bool:
        return self.kind is Kind.M_SMALL_ATOM


@dataclass(frozen=True)
class ElementHandle:
    """Designates "an element" of a species without granting it identity.

    For m-atoms the token is an implementation detail; every public predicate
    treats two handles of the same m-atom species alike.  For M-atoms the
    token is the element's public label.
    """

    species: Species
    _token: object = field(repr=False)

    @property
    def label(self) -> str | None:
        return None if self.species.quantum else self._token

    def describe(self) -> str:
        """Species-level description, safe for reports."""
        if self.species.quantum:
            return self.species.name
        return f"{self.species.name}:{self._token}"


@dataclass(frozen=True)
class Universe:
    """Species declarations plus the ambient qset every other qset lives in.

    Build one with :meth:`declare`.
    """

    species: tuple[Species, ...]
    _counts: tuple[tuple[str, int], ...]
    _labels: tuple[tuple[str, tuple[str, ...]], ...]

    @classmethod
    def declare(cls, species: Iterable[Species], ambient: Mapping[str, object]) -> Universe:
        species = tuple(sorted(species, key=lambda s: s.name))
        names = [s.name for s in species]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate species names in {names}")
        by_name = {s.name: s for s in species}
        unknown = set(ambient) - set(by_name)
        if unknown:
            raise DomainError(f"ambient mentions undeclared species {sorted(unknown)}")
        counts, labels = [], []
        for sp in species:
            value = ambient.get(sp.name, 0 if sp.quantum else ())
            if sp.quantum:
                if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                    raise DomainError(f"ambient count for m-atom species {sp.name!r} must be a non-negative integer")
                counts.append((sp.name, value))
            else:
                if isinstance(value, (str, bytes)) or not isinstance(value, Iterable):
                    raise DomainError(f"ambient for M-atom species {sp.name!r} must be a list of labels")
                value = tuple(value)
                if not all(isinstance(v, str) for v in value):
                    raise DomainError(f"labels of species {sp.name!r} must be strings")
                if len(set(value)) != len(value):
                    raise DomainError(f"duplicate labels in species {sp.name!r}")
                labels.append((sp.name, tuple(sorted(value))))
        return cls(species, tuple(counts), tuple(labels))

    def species_named(self, name: str) -> Species:
        for sp in self.species:
            if sp.name == name:
                return sp
        raise DomainError(f"unknown species {name!r}")

    @cached_property
    def ambient(self) -> Qset:
        atoms = {(name, i) for name, n in self._counts for i in range(n)}
        atoms |= {(name, label) for name, ls in self._labels for label in ls}
        return Qset(self, frozenset(atoms))

    @property
    def empty(self) -> Qset:
        return Qset(self, frozenset())

    def qset(self, spec: Mapping[str, object] | None = None, /, **kwargs) -> Qset:
        """Canonical qset with the given per-species content.

        m-atom species map to a count; M-atom species map to a list of labels.
        """
        spec = dict(spec or {}, **kwargs)
        ambient = self.ambient
        atoms = set()
        for name, value in spec.items():
            sp = self.species_named(name)
            if sp.quantum:
                if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                    raise DomainError(f"count for {name!r} must be a non-negative integer")
                available = ambient.count(name)
                if value > available:
                    raise DomainError(f"{name!r}: count {value} exceeds ambient count {available}")
                atoms.update((name, i) for i in range(value))
            else:
                if isinstance(value, str):
                    value = [value]
                for label in value:
                    if (name, label) not in ambient._atoms:
                        raise DomainError(f"{name!r}: label {label!r} is not in the ambient")
                    atoms.add((name, label))
        return Qset(self, frozenset(atoms))


@dataclass(frozen=True)
class Qset:
    universe: Universe = field(repr=False)
    _atoms: frozenset = field(repr=False)
    # per-species handle order; permuted by permute_internal_labels only
    _order: tuple = field(default=(), repr=False, compare=False)

    def __repr__(self):
        return f"Qset({self.describe()})"

    def describe(self) -> str:
        parts = [f"{k}:{v}" for k, v in self.composition.items()]
        parts += [f"{k}:{sorted(v)}" for k, v in self.classical.items()]
        return "{" + ", ".join(parts) + "}"

    def count(self, species: str) -> int:
        return sum(1 for name, _ in self._atoms if name == species)

    @property
    def composition(self) -> dict[str, int]:
        """Positive m-atom counts keyed by species name, sorted."""
        out = {}
        for sp in self.universe.species:
            if sp.quantum:
                n = self.count(sp.name)
                if n:
                    out[sp.name] = n
        return out

    @property
    def classical(self) -> dict[str, frozenset[str]]:
        """Non-empty M-atom label sets keyed by species name, sorted."""
        out = {}
        for sp in self.universe.species:
            if not sp.quantum:
                labels = frozenset(t for name, t in self._atoms if name == sp.name)
                if labels:
                    out[sp.name] = labels
        return out

    @property
    def classical_members(self) -> frozenset[tuple[str, str]]:
        return frozenset(a for a in self._atoms if not self.universe.species_named(a[0]).quantum)

    @property
    def species_present(self) -> tuple[str, ...]:
        return tuple(sorted({name for name, _ in self._atoms}))

    def to_spec(self) -> dict[str, object]:
        """Public content as a JSON-ready mapping (sorted labels, no tokens)."""
        out: dict[str, object] = dict(self.composition)
        out.update({k: sorted(v) for k, v in self.classical.items()})
        return {k: out[k] for k in sorted(out)}

    def handles(self, species: str) -> tuple[ElementHandle, ...]:
        sp = self.universe.species_named(species)
        return tuple(ElementHandle(sp, atom[1]) for atom in self._ordered(species))

    def handle(self, species: str, label: str | None = None) -> ElementHandle:
        """A handle for an element of ``species``: by label for M-atoms, any one for m-atoms."""
        hs = self.handles(species)
        if label is not None:
            hs = tuple(h for h in hs if h.label == label)
        if not hs:
            raise DomainError(f"no element of species {species!r}" + (f" labelled {label!r}" if label else ""))
        return hs[0]

    def contains_handle(self, h: ElementHandle) -> bool:
        return (h.species.name, h._token) in self._atoms

    def issubset(self, other: Qset) -> bool:
        _same_universe(self, other)
        return self._atoms <= other._atoms

    def isdisjoint(self, other: Qset) -> bool:
        _same_universe(self, other)
        return self._atoms.isdisjoint(other._atoms)

    def __le__(self, other):
        return self.issubset(other)

    def __or__(self, other):
        return union(self, other)

    def __and__(self, other):
        return intersection(self, other)

    def __sub__(self, other):
        return difference(self, other)

    def __len__(self):
        return len(self._atoms)

    def _ordered(self, species: str) -> tuple:
        for name, atoms in self._order:
            if name == species:
                return atoms
        return tuple(sorted(a for a in self._atoms if a[0] == species))


def _same_universe(a: Qset, b: Qset) -> None:
    if a.universe is not b.universe and a.universe != b.universe:
        raise DomainError("qsets belong to different universes")


def _sorted_atoms(q: Qset) -> list:
    return sorted(q._atoms)


def qcard(q: Qset) -> int:
    """Quasi-cardinal: m-atom counts plus classical members."""
    return len(q._atoms)


def subqsets_of_qcard(q: Qset, eta: int) -> list[Qset]:
    """All subqsets of ``q`` with quasi-cardinal ``eta``, one per composition.

    Choices that differ only in which m-atoms are taken are not told apart.
    """
    if eta < 0 or eta > qcard(q):
        raise DomainError(f"eta={eta} outside 0..{qcard(q)}")
    groups = []
    for name in q.species_present:
        atoms = sorted(a for a in q._atoms if a[0] == name)
        if q.universe.species_named(name).quantum:
            groups.append([tuple(atoms[:k]) for k in range(len(atoms) + 1)])
        else:
            groups.append([c for k in range(len(atoms) + 1) for c in itertools.combinations(atoms, k)])

    out = []

    def walk(i, remaining, picked):
        if i == len(groups):
            if remaining == 0:
                out.append(Qset(q.universe, frozenset(picked)))
            return
        for choice in groups[i]:
            if len(choice) <= remaining:
                walk(i + 1, remaining - len(choice), picked + choice)

    walk(0, eta, ())
    return out


def disjoint_partition(q: Qset, parts: Sequence[int]) -> list[Qset]:
    """Pairwise-disjoint subqsets of ``q`` with the requested quasi-cardinals."""
    if any(p < 0 for p in parts):
        raise DomainError("target quasi-cardinals must be non-negative")
    if sum(parts) > qcard(q):
        raise DomainError(f"sum of parts {sum(parts)} exceeds qcard {qcard(q)}")
    pool = _sorted_atoms(q)
    out, start = [], 0
    for p in parts:
        out.append(Qset(q.universe, frozenset(pool[start : start + p])))
        start += p
    return out


def union(a: Qset, b: Qset) -> Qset:
    _same_universe(a, b)
    return Qset(a.universe, a._atoms | b._atoms)


def intersection(a: Qset, b: Qset) -> Qset:
    _same_universe(a, b)
    return Qset(a.universe, a._atoms & b._atoms)


def difference(a: Qset, b: Qset) -> Qset:
    _same_universe(a, b)
    return Qset(a.universe, a._atoms - b._atoms)


def indiscernible(a: Qset, b: Qset) -> bool:
    """Same m-atom composition and same classical members."""
    return a.composition == b.composition and a.classical_members == b.classical_members


def swap_indiscernibility_check(
    a: Qset, species: str, remove: str | None = None, insert: str | None = None
) -> bool:
    """Remove one element of ``species`` from ``a``, add one from outside, compare.

    For m-atom species the result is always indiscernible from ``a``.  For
    M-atom species ``remove``/``insert`` pick the labels (defaults: the first
    member and the first non-member in label order) and the result differs.
    """
    sp = a.universe.species_named(species)
    inside = sorted(x for x in a._atoms if x[0] == species)
    if not inside:
        raise DomainError(f"species {species!r} not present in qset")
    outside = sorted(x for x in a.universe.ambient._atoms - a._atoms if x[0] == species)
    if not outside:
        raise DomainError(f"universe has no element of {species!r} outside the qset")
    if sp.quantum:
        x, y = a._ordered(species)[0], outside[0]
    else:
        x = (species, remove) if remove is not None else inside[0]
        y = (species, insert) if insert is not None else outside[0]
        if x not in a._atoms:
            raise DomainError(f"{remove!r} is not a member")
        if y not in outside:
            raise DomainError(f"{insert!r} is not an ambient non-member")
    removed = difference(a, Qset(a.universe, frozenset([x])))
    swapped = union(removed, Qset(a.universe, frozenset([y])))
    return indiscernible(swapped, a)


def permute_internal_labels(q: Qset, species: str, perm: Sequence[int]) -> Qset:
    """Reorder the internal handles of one species; observationally a no-op."""
    current = q._ordered(species)
    if sorted(perm) != list(range(len(current))):
        raise DomainError(f"perm must be a permutation of range({len(current)})")
    reordered = tuple(current[i] for i in perm)
    order = tuple((n, atoms) for n, atoms in q._order if n != species) + ((species, reordered),)
    return Qset(q.universe, q._atoms, tuple(sorted(order, key=lambda t: t[0])))
