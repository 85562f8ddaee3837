"""Eventually periodic subsets of the natural numbers.

A PeriodicSet is a subset of N = {0, 1, 2, ...} whose membership is
periodic from some threshold on, with finitely many explicit exceptions
below the threshold.  The class of such sets is a Boolean algebra that
is closed under complement, union and intersection, and every question
we ask about these sets (emptiness, finiteness, minimum, comparison) is
decidable.
"""

from __future__ import annotations

from math import lcm
from typing import Dict, FrozenSet, Iterable, Mapping


class PeriodicSet:
    """Canonical eventually-periodic subset of N.

    Membership of n is ``overrides[n]`` for n < threshold (defaulting to
    the periodic rule when n is not listed), and ``n % period in mask``
    for n >= threshold.  Canonical form: the period is the minimal
    eventual period, the threshold is minimal, and overrides record
    exactly the positions that disagree with the periodic rule.
    """

    __slots__ = ("period", "mask", "threshold", "overrides", "_key")

    period: int
    mask: FrozenSet[int]
    threshold: int
    overrides: Mapping[int, bool]

    def __init__(
        self,
        period: int,
        mask: Iterable[int],
        threshold: int = 0,
        overrides: Mapping[int, bool] | None = None,
    ) -> None:
        if period < 1:
            raise ValueError("period must be a positive integer")
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        mask = frozenset(mask)
        if not all(0 <= r < period for r in mask):
            raise ValueError("mask residues must lie in [0, period)")
        overrides = dict(overrides or {})
        if not all(0 <= n < threshold for n in overrides):
            raise ValueError("override positions must lie below the threshold")

        def member(n: int) -> bool:
            if n < threshold and n in overrides:
                return bool(overrides[n])
            return (n % period) in mask

        # Minimal eventual period: smallest divisor of the given period
        # under which the mask is shift-invariant.
        best = period
        for d in range(1, period + 1):
            if period % d != 0:
                continue
            if all(((r in mask) == (((r + d) % period) in mask)) for r in range(period)):
                best = d
                break
        new_mask = frozenset(r for r in range(best) if r in mask)

        # Minimal threshold: one past the last disagreement with the rule.
        new_threshold = 0
        for n in range(threshold - 1, -1, -1):
            if member(n) != ((n % best) in new_mask):
                new_threshold = n + 1
                break
        new_overrides: Dict[int, bool] = {}
        for n in range(new_threshold):
            v = member(n)
            if v != ((n % best) in new_mask):
                new_overrides[n] = v

        object.__setattr__(self, "period", best)
        object.__setattr__(self, "mask", new_mask)
        object.__setattr__(self, "threshold", new_threshold)
        object.__setattr__(self, "overrides", new_overrides)
        object.__setattr__(
            self,
            "_key",
            (best, new_mask, new_threshold, tuple(sorted(new_overrides.items()))),
        )

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("PeriodicSet is immutable")

    # -- membership and basic queries ------------------------------------

    def __contains__(self, n: int) -> bool:
        if n < 0:
            return False
        if n < self.threshold and n in self.overrides:
            return self.overrides[n]
        return (n % self.period) in self.mask

    def is_empty(self) -> bool:
        return not self.mask and not self.overrides

    def is_full(self) -> bool:
        return len(self.mask) == self.period and not self.overrides

    def is_finite(self) -> bool:
        return not self.mask

    def is_cofinite(self) -> bool:
        return len(self.mask) == self.period

    def finite_elements(self) -> FrozenSet[int]:
        """The elements, provided the set is finite."""
        if not self.is_finite():
            raise ValueError("set is infinite")
        return frozenset(n for n, v in self.overrides.items() if v)

    def min_element(self) -> int | None:
        for n in range(self.threshold):
            if n in self:
                return n
        for n in range(self.threshold, self.threshold + self.period):
            if n in self:
                return n
        return None

    # -- Boolean algebra ---------------------------------------------------

    def complement(self) -> "PeriodicSet":
        return PeriodicSet(
            self.period,
            frozenset(range(self.period)) - self.mask,
            self.threshold,
            {n: not v for n, v in self.overrides.items()},
        )

    def union(self, other: "PeriodicSet") -> "PeriodicSet":
        return _pointwise(self, other, lambda a, b: a or b)

    def intersection(self, other: "PeriodicSet") -> "PeriodicSet":
        return _pointwise(self, other, lambda a, b: a and b)

    def __or__(self, other: "PeriodicSet") -> "PeriodicSet":
        return self.union(other)

    def __and__(self, other: "PeriodicSet") -> "PeriodicSet":
        return self.intersection(other)

    def __invert__(self) -> "PeriodicSet":
        return self.complement()

    def issubset(self, other: "PeriodicSet") -> bool:
        return self.intersection(other.complement()).is_empty()

    # -- identity ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PeriodicSet):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def render(self) -> str:
        mask = "{" + ",".join(str(r) for r in sorted(self.mask)) + "}"
        ov = "{" + ",".join(f"{n}:{v}" for n, v in sorted(self.overrides.items())) + "}"
        return f"period={self.period} mask={mask} threshold={self.threshold} overrides={ov}"

    def __repr__(self) -> str:
        return f"PeriodicSet({self.render()})"

    # -- constructors --------------------------------------------------

    @staticmethod
    def empty() -> "PeriodicSet":
        return PeriodicSet(1, frozenset())

    @staticmethod
    def full() -> "PeriodicSet":
        return PeriodicSet(1, frozenset({0}))

    @staticmethod
    def from_finite(elements: Iterable[int]) -> "PeriodicSet":
        elements = sorted(set(elements))
        if elements and elements[0] < 0:
            raise ValueError("elements must be non-negative")
        t = elements[-1] + 1 if elements else 0
        return PeriodicSet(1, frozenset(), t, {n: True for n in elements})

    @staticmethod
    def singleton(n: int) -> "PeriodicSet":
        return PeriodicSet.from_finite([n])

    @staticmethod
    def cofinite(excluded: Iterable[int]) -> "PeriodicSet":
        return PeriodicSet.from_finite(excluded).complement()

    @staticmethod
    def residues(period: int, mask: Iterable[int]) -> "PeriodicSet":
        """The set {n : n mod period in mask}."""
        return PeriodicSet(period, mask)

    @staticmethod
    def multiples(m: int) -> "PeriodicSet":
        return PeriodicSet(m, frozenset({0}))

    @staticmethod
    def greater_than(r: int) -> "PeriodicSet":
        """The cofinal segment {n : n > r}."""
        return PeriodicSet(1, frozenset({0}), r + 1, {n: False for n in range(r + 1)})


def _pointwise(a: PeriodicSet, b: PeriodicSet, op) -> PeriodicSet:
    p = lcm(a.period, b.period)
    t = max(a.threshold, b.threshold)
    mask = frozenset(r for r in range(p) if op((t + ((r - t) % p)) in a, (t + ((r - t) % p)) in b))
    overrides = {n: op(n in a, n in b) for n in range(t)}
    return PeriodicSet(p, mask, t, overrides)
