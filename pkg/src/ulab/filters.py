"""Ultrafilter oracles, filter bases, and the lexicographic definable array.

Two oracle kinds are supported: principal ultrafilters (over a finite
domain or over N) and the factorial-tower free ultrafilter over N, which
answers every query in the eventually-periodic set algebra.  A finite
filter base determines at most one ultrafilter on the represented
algebra; ``uob`` recovers it or reports why it cannot.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Dict, FrozenSet, Iterable, Tuple, Union

from .periodic import PeriodicSet


class Verdict(enum.Enum):
    """Three-valued answer of a membership oracle."""

    IN = "In"
    OUT = "Out"
    UNDECIDABLE = "Undecidable"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FiniteDomain:
    """The value domain {0, ..., size-1}."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("finite domain must have at least one value")

    def __str__(self) -> str:
        return f"finite:{self.size}"


@dataclass(frozen=True)
class OmegaDomain:
    """The value domain N."""

    def __str__(self) -> str:
        return "omega"


OMEGA = OmegaDomain()

Domain = Union[FiniteDomain, OmegaDomain]
RepresentedSet = Union[FrozenSet[int], PeriodicSet]


class EmptyIntersection(ValueError):
    """Some finite intersection of the base is empty: not a filter base."""


class NotABase(ValueError):
    """More than one ultrafilter on the represented algebra extends the base."""


def _check_query(domain: Domain, s: RepresentedSet) -> None:
    if isinstance(domain, FiniteDomain):
        if isinstance(s, PeriodicSet):
            raise TypeError("finite-domain oracle takes explicit frozenset queries")
    else:
        if not isinstance(s, PeriodicSet):
            raise TypeError("oracle over N takes PeriodicSet queries")


@dataclass(frozen=True)
class PrincipalOracle:
    """The ultrafilter of all sets containing a fixed point."""

    domain: Domain
    point: int

    def __post_init__(self) -> None:
        if isinstance(self.domain, FiniteDomain) and not 0 <= self.point < self.domain.size:
            raise ValueError("principal point outside the domain")
        if self.point < 0:
            raise ValueError("principal point must be non-negative")

    def membership(self, s: RepresentedSet) -> Verdict:
        _check_query(self.domain, s)
        return Verdict.IN if self.point in s else Verdict.OUT

    def __str__(self) -> str:
        return f"principal:{self.point}"


@dataclass(frozen=True)
class FactorialTowerOracle:
    """Free ultrafilter over N, decided by the factorial tower.

    A set X is accepted iff for some m >= 1 every sufficiently large
    multiple of m! lies in X.  On an eventually periodic set with minimal
    period p this reduces to whether the residue 0 mod p is eventually
    inside, because multiples of p! all land on that residue; hence the
    oracle is total on PeriodicSet queries.
    """

    domain: OmegaDomain = OMEGA

    def membership(self, s: RepresentedSet) -> Verdict:
        _check_query(OMEGA, s)
        return Verdict.IN if 0 in s.mask else Verdict.OUT

    def __str__(self) -> str:
        return "factorial-tower"


UltrafilterOracle = Union[PrincipalOracle, FactorialTowerOracle]


def ft_membership(s: PeriodicSet) -> Verdict:
    """Factorial-tower verdict on an eventually periodic set."""
    return FactorialTowerOracle().membership(s)


@dataclass(frozen=True)
class FilterBase:
    """A finite family of sets with the finite intersection property."""

    domain: Domain
    sets: Tuple[RepresentedSet, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sets", tuple(self.sets))
        for s in self.sets:
            _check_query(self.domain, s)
            if (isinstance(s, PeriodicSet) and s.is_empty()) or (not isinstance(s, PeriodicSet) and not s):
                raise EmptyIntersection("base contains an empty set")
        if self.intersection_is_empty():
            raise EmptyIntersection("intersection of the base is empty")

    def intersection(self) -> RepresentedSet:
        if isinstance(self.domain, FiniteDomain):
            z: FrozenSet[int] = frozenset(range(self.domain.size))
            for s in self.sets:
                z &= s
            return z
        z_p = PeriodicSet.full()
        for s in self.sets:
            z_p = z_p & s
        return z_p

    def intersection_is_empty(self) -> bool:
        z = self.intersection()
        return z.is_empty() if isinstance(z, PeriodicSet) else not z


@dataclass(frozen=True)
class Classification:
    """Result of classifying an ultrafilter oracle."""

    kind: str  # "principal" or "free"
    point: int | None = None


def uob(base: FilterBase) -> UltrafilterOracle:
    """The unique ultrafilter oracle whose filter extends the base.

    Over a finite domain a base pins down an ultrafilter exactly when the
    intersection of its sets is a singleton; the same criterion applies
    over N because any larger intersection is contained in at least two
    principal ultrafilters (and, if infinite, in free ones too).
    """
    z = base.intersection()
    if isinstance(z, PeriodicSet):
        if z.is_empty():
            raise EmptyIntersection("intersection of the base is empty")
        if not z.is_finite():
            raise NotABase("an infinite intersection lies in more than one ultrafilter")
        elements = sorted(z.finite_elements())
    else:
        if not z:
            raise EmptyIntersection("intersection of the base is empty")
        elements = sorted(z)
    if len(elements) > 1:
        raise NotABase(f"base extends to {len(elements)} distinct principal ultrafilters")
    return PrincipalOracle(base.domain, elements[0])


def classify(oracle: UltrafilterOracle) -> Classification:
    """Principal(point) or Free, decidable for both supported kinds."""
    if isinstance(oracle, PrincipalOracle):
        return Classification("principal", oracle.point)
    return Classification("free")


# -- arrays of ultrafilters -------------------------------------------------


@dataclass(frozen=True)
class ArrayEntry:
    label: str
    domain: Domain
    oracle: UltrafilterOracle

    def __post_init__(self) -> None:
        if self.domain != _oracle_domain(self.oracle):
            raise ValueError(f"label {self.label!r}: oracle domain does not match value domain")


def _oracle_domain(oracle: UltrafilterOracle) -> Domain:
    return oracle.domain


@dataclass(frozen=True)
class ArraySpec:
    """A linearly ordered finite family of ultrafilters, one per label.

    The label order is the listed order; it stands in for the ordered set
    the index space is a power of.
    """

    entries: Tuple[ArrayEntry, ...]
    payloads: Tuple[Tuple[FrozenSet[int], ...], ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be pairwise distinct")

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    def domain_of(self, label: str) -> Domain:
        return self._entry(label).domain

    def oracle_of(self, label: str) -> UltrafilterOracle:
        return self._entry(label).oracle

    def index_of(self, label: str) -> int:
        for i, e in enumerate(self.entries):
            if e.label == label:
                return i
        raise KeyError(label)

    def _entry(self, label: str) -> ArrayEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    def all_principal(self) -> bool:
        return all(isinstance(e.oracle, PrincipalOracle) for e in self.entries)

    def principal_point(self) -> Dict[str, int]:
        if not self.all_principal():
            raise ValueError("array has a non-principal coordinate")
        return {e.label: e.oracle.point for e in self.entries}  # type: ignore[union-attr]


def make_array(entries: Iterable[Tuple[str, Domain, UltrafilterOracle]]) -> ArraySpec:
    return ArraySpec(tuple(ArrayEntry(label, dom, orc) for label, dom, orc in entries))


class EmptyArray(ValueError):
    """No map qualifies as an ultrafilter base."""


def subset_lex_lt(x: FrozenSet[int], y: FrozenSet[int]) -> bool:
    """Lexicographic order on sets via characteristic sequences, 0 before 1.

    x < y iff the least element of the symmetric difference belongs to y.
    """
    diff = x ^ y
    return bool(diff) and min(diff) in y


def _map_lt(a: Tuple[FrozenSet[int], ...], b: Tuple[FrozenSet[int], ...]) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return subset_lex_lt(x, y)
    return False


def build_definable_array(theta: int, n: int) -> ArraySpec:
    """All maps {0..theta-1} -> P({0..n-1}) whose range is an ultrafilter base,
    ordered lexicographically with the subset order above, each carrying the
    ultrafilter its range generates.
    """
    if theta < 1 or n < 1:
        raise ValueError("theta and n must be positive")
    domain = FiniteDomain(n)
    subsets = [frozenset(c) for k in range(n + 1) for c in itertools.combinations(range(n), k)]
    qualifying = []
    for a in itertools.product(subsets, repeat=theta):
        try:
            oracle = uob(FilterBase(domain, tuple(dict.fromkeys(a))))
        except (EmptyIntersection, NotABase):
            continue
        qualifying.append((a, oracle))
    if not qualifying:
        raise EmptyArray("no map qualifies")

    def cmp(left, right) -> int:
        if left[0] == right[0]:
            return 0
        return -1 if _map_lt(left[0], right[0]) else 1

    qualifying.sort(key=cmp_to_key(cmp))
    width = max(1, len(str(len(qualifying) - 1)))
    entries = tuple(
        ArrayEntry(f"a{i:0{width}d}", domain, oracle) for i, (_, oracle) in enumerate(qualifying)
    )
    return ArraySpec(entries, payloads=tuple(a for a, _ in qualifying))
