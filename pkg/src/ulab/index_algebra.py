"""Finite-support subsets and functions on the index space, and the Fubini product.

The index space is the set of maps from an array's labels into their
value domains.  A finite-support subset is stored in disjunctive normal
form over per-coordinate constraints; construction always canonicalizes,
so the recorded support is exactly the set of coordinates membership
depends on, and equal sets have equal representations.

Membership in the Fubini product ultrafilter is decided by the iterated
quantifier prefix: working from the largest support label inward, the
truth set of the inner condition over the current coordinate is collected
and submitted to that coordinate's ultrafilter oracle.
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager
from math import lcm
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple, Union

from .filters import ArraySpec, FiniteDomain, OmegaDomain, Verdict
from .periodic import PeriodicSet

ValueSet = Union[FrozenSet[int], PeriodicSet]


class ArrayMismatch(ValueError):
    """Operands are governed by different array specs."""


class MissingCoordinate(ValueError):
    """A point does not assign a value to every support label."""


class UnrepresentableSet(ValueError):
    """The requested set falls outside the DNF-representable fragment."""


class _UndecidableQuery(Exception):
    pass


# Test-only hook: when enabled, fubini_member answers the query for the
# complement of the submitted set, so every verdict lands on the wrong side
# of the complement dichotomy (the full set is rejected, the empty set
# accepted, and upward closure fails on proper sets).
_BREAK_COMPLEMENT = False


@contextmanager
def broken_complement_fubini():
    global _BREAK_COMPLEMENT
    _BREAK_COMPLEMENT = True
    try:
        yield
    finally:
        _BREAK_COMPLEMENT = False


def _vs_key(vs: ValueSet):
    if isinstance(vs, PeriodicSet):
        return (1, vs.period, tuple(sorted(vs.mask)), vs.threshold, tuple(sorted(vs.overrides.items())))
    return (0, tuple(sorted(vs)))


def _vs_render(vs: ValueSet) -> str:
    if isinstance(vs, PeriodicSet):
        return "(" + vs.render() + ")"
    return "{" + ",".join(str(v) for v in sorted(vs)) + "}"


def _vs_is_empty(vs: ValueSet) -> bool:
    return vs.is_empty() if isinstance(vs, PeriodicSet) else not vs


def _vs_contains(vs: ValueSet, v: int) -> bool:
    return v in vs


def _vs_union(a: ValueSet, b: ValueSet) -> ValueSet:
    return a | b


class CoordConstraint:
    """One coordinate constraint: x(label) lies in a value set."""

    __slots__ = ("label", "values")

    def __init__(self, label: str, values: ValueSet) -> None:
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("CoordConstraint is immutable")

    def __eq__(self, other):
        if not isinstance(other, CoordConstraint):
            return NotImplemented
        return self.label == other.label and self.values == other.values

    def __hash__(self):
        return hash((self.label, self.values))

    def render(self) -> str:
        return f"{self.label} in {_vs_render(self.values)}"

    def __repr__(self):
        return f"CoordConstraint({self.render()})"


Clause = Tuple[CoordConstraint, ...]


def _clause_map(array: ArraySpec, clause) -> Dict[str, ValueSet] | None:
    """Merge a raw clause into one constraint per label; None if unsatisfiable."""
    merged: Dict[str, ValueSet] = {}
    for item in clause:
        if isinstance(item, CoordConstraint):
            label, values = item.label, item.values
        else:
            label, values = item
        if label not in array.labels:
            raise KeyError(f"unknown label {label!r}")
        dom = array.domain_of(label)
        if isinstance(dom, FiniteDomain):
            if isinstance(values, PeriodicSet):
                raise TypeError(f"label {label!r} has a finite domain; use a frozenset")
            values = frozenset(values)
            if not all(0 <= v < dom.size for v in values):
                raise ValueError(f"constraint values outside the domain of {label!r}")
        else:
            if not isinstance(values, PeriodicSet):
                raise TypeError(f"label {label!r} ranges over N; use a PeriodicSet")
        if label in merged:
            prev = merged[label]
            values = prev & values
        merged[label] = values
    for values in merged.values():
        if _vs_is_empty(values):
            return None
    return merged


def _eval_clause_maps(clause_maps: Sequence[Mapping[str, ValueSet]], point: Mapping[str, int]) -> bool:
    for m in clause_maps:
        if all(_vs_contains(vs, point[l]) for l, vs in m.items()):
            return True
    return False


def _label_cells(array: ArraySpec, label: str, constraints: Sequence[ValueSet]) -> List[Tuple[ValueSet, int]]:
    """Partition the label's domain into the atoms generated by the constraints.

    Returns (cell, representative) pairs; the representative is any point
    of the cell, used to evaluate membership tables.
    """
    dom = array.domain_of(label)
    if isinstance(dom, FiniteDomain):
        return [(frozenset({v}), v) for v in range(dom.size)]
    sets = list(dict.fromkeys(constraints))
    period = 1
    threshold = 0
    for s in sets:
        period = lcm(period, s.period)
        threshold = max(threshold, s.threshold)
    cells: List[Tuple[ValueSet, int]] = []
    seen: Dict[Tuple[bool, ...], List[int]] = {}
    for n in range(threshold + period):
        sig = tuple(n in s for s in sets)
        seen.setdefault(sig, []).append(n)
    for sig in sorted(seen):
        mask = frozenset(
            r for r in range(period) if tuple((threshold + ((r - threshold) % period)) in s for s in sets) == sig
        )
        overrides = {n: (tuple(n in s for s in sets) == sig) for n in range(threshold)}
        cell = PeriodicSet(period, mask, threshold, overrides)
        if not cell.is_empty():
            rep = cell.min_element()
            assert rep is not None
            cells.append((cell, rep))
    cells.sort(key=lambda cr: _vs_key(cr[0]))
    return cells


def _canonical_clauses(array: ArraySpec, constraints_by_label: Mapping[str, Sequence[ValueSet]], pred) -> Tuple[Clause, ...]:
    labels = [l for l in array.labels if l in constraints_by_label]
    cells = [_label_cells(array, l, constraints_by_label[l]) for l in labels]
    axes = [range(len(c)) for c in cells]
    truth: Dict[Tuple[int, ...], bool] = {}
    for combo in itertools.product(*axes):
        point = {l: cells[i][combo[i]][1] for i, l in enumerate(labels)}
        truth[combo] = bool(pred(point))

    relevant: List[int] = []
    for i in range(len(labels)):
        if len(cells[i]) <= 1:
            continue
        others = [range(len(cells[j])) if j != i else (0,) for j in range(len(labels))]
        dep = False
        for combo in itertools.product(*others):
            vals = {truth[combo[:i] + (j,) + combo[i + 1:]] for j in range(len(cells[i]))}
            if len(vals) > 1:
                dep = True
                break
        if dep:
            relevant.append(i)

    rel_axes = [range(len(cells[i])) for i in relevant]

    def lift(pc: Tuple[int, ...]) -> Tuple[int, ...]:
        full = [0] * len(labels)
        for pos, i in enumerate(relevant):
            full[i] = pc[pos]
        return tuple(full)

    ptruth = {pc: truth[lift(pc)] for pc in itertools.product(*rel_axes)}

    # Coarsest per-coordinate partition: merge cells whose truth columns agree.
    merged: List[List[Tuple[ValueSet, int]]] = []
    for pos, i in enumerate(relevant):
        other_combos = sorted(
            itertools.product(*[range(len(cells[j])) for k, j in enumerate(relevant) if k != pos])
        )
        groups: Dict[Tuple[bool, ...], List[int]] = {}
        for j in range(len(cells[i])):
            col = tuple(
                ptruth[oc[:pos] + (j,) + oc[pos:]]
                for oc in other_combos
            )
            groups.setdefault(col, []).append(j)
        cell_groups = []
        for members in groups.values():
            vs: ValueSet = cells[i][members[0]][0]
            for j in members[1:]:
                vs = _vs_union(vs, cells[i][j][0])
            cell_groups.append((vs, members[0]))
        cell_groups.sort(key=lambda cr: _vs_key(cr[0]))
        merged.append(cell_groups)

    clauses: List[Clause] = []
    for combo in itertools.product(*[range(len(g)) for g in merged]):
        rep_combo = tuple(merged[pos][combo[pos]][1] for pos in range(len(relevant)))
        if ptruth[rep_combo]:
            clause = tuple(
                CoordConstraint(labels[relevant[pos]], merged[pos][combo[pos]][0])
                for pos in range(len(relevant))
            )
            clauses.append(clause)
    if not relevant:
        constant = truth[tuple(0 for _ in labels)]
        return ((),) if constant else ()
    clauses.sort(key=lambda cl: tuple(_vs_key(c.values) for c in cl))
    return tuple(clauses)


class SupportedSet:
    """Finite-support subset of the index space, in canonical DNF.

    A point belongs to the set iff some clause has all its coordinate
    constraints satisfied.  Construction canonicalizes: clauses are the
    true combinations of the coarsest membership-determining partition of
    each genuinely relevant coordinate, so two equal sets compare equal.
    """

    __slots__ = ("array", "clauses")

    def __init__(self, array: ArraySpec, clauses: Iterable[Iterable], *, _canonical: bool = False) -> None:
        object.__setattr__(self, "array", array)
        if _canonical:
            object.__setattr__(self, "clauses", tuple(tuple(c) for c in clauses))
            return
        maps = []
        for clause in clauses:
            m = _clause_map(array, clause)
            if m is not None:
                maps.append(m)
        constraints: Dict[str, List[ValueSet]] = {}
        for m in maps:
            for l, vs in m.items():
                constraints.setdefault(l, []).append(vs)
        canonical = _canonical_clauses(array, constraints, lambda point: _eval_clause_maps(maps, point))
        object.__setattr__(self, "clauses", canonical)

    def __setattr__(self, name, value):
        raise AttributeError("SupportedSet is immutable")

    @property
    def support(self) -> Tuple[str, ...]:
        labels = {c.label for clause in self.clauses for c in clause}
        return tuple(l for l in self.array.labels if l in labels)

    def is_empty(self) -> bool:
        return not self.clauses

    def is_full(self) -> bool:
        return self.clauses == ((),)

    def contains(self, point: Mapping[str, int]) -> bool:
        missing = [l for l in self.support if l not in point]
        if missing:
            raise MissingCoordinate(f"point lacks coordinates {missing}")
        for clause in self.clauses:
            if all(_vs_contains(c.values, point[c.label]) for c in clause):
                return True
        return False

    def complement(self) -> "SupportedSet":
        return _rebuild(self.array, [self], lambda point: not self.contains(point))

    def union(self, other: "SupportedSet") -> "SupportedSet":
        _same_array(self, other)
        return _rebuild(self.array, [self, other], lambda p: self.contains(p) or other.contains(p))

    def intersect(self, other: "SupportedSet") -> "SupportedSet":
        _same_array(self, other)
        return _rebuild(self.array, [self, other], lambda p: self.contains(p) and other.contains(p))

    def issubset(self, other: "SupportedSet") -> bool:
        return self.intersect(other.complement()).is_empty()

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersect(other)

    def __invert__(self):
        return self.complement()

    def __eq__(self, other):
        if not isinstance(other, SupportedSet):
            return NotImplemented
        return self.array == other.array and self.clauses == other.clauses

    def __hash__(self):
        return hash((self.array, self.clauses))

    def render(self) -> str:
        if self.is_full():
            return "TRUE"
        if self.is_empty():
            return "FALSE"
        parts = []
        for clause in self.clauses:
            parts.append("(" + " & ".join(c.render() for c in clause) + ")")
        return " | ".join(parts)

    def __repr__(self):
        return f"SupportedSet[{self.render()}]"

    def constraint_sets(self, label: str) -> List[ValueSet]:
        return [c.values for clause in self.clauses for c in clause if c.label == label]


def _same_array(a, b) -> None:
    if a.array != b.array:
        raise ArrayMismatch("operands are governed by different arrays")


def _rebuild(array: ArraySpec, sources: Sequence[SupportedSet], pred) -> SupportedSet:
    constraints: Dict[str, List[ValueSet]] = {}
    for s in sources:
        for clause in s.clauses:
            for c in clause:
                constraints.setdefault(c.label, []).append(c.values)
    clauses = _canonical_clauses(array, constraints, pred)
    return SupportedSet(array, clauses, _canonical=True)


def full_set(array: ArraySpec) -> SupportedSet:
    return SupportedSet(array, [()])


def empty_set(array: ArraySpec) -> SupportedSet:
    return SupportedSet(array, [])


def constraint_set(array: ArraySpec, label: str, values: ValueSet) -> SupportedSet:
    return SupportedSet(array, [[(label, values)]])


def from_dnf(array: ArraySpec, clauses: Iterable[Iterable]) -> SupportedSet:
    return SupportedSet(array, clauses)


def normalize(x: SupportedSet) -> SupportedSet:
    """Re-canonicalize; a fixed point of construction, hence idempotent."""
    return SupportedSet(x.array, x.clauses)


def bool_op(op: str, x: SupportedSet, y: SupportedSet | None = None) -> SupportedSet:
    if op == "complement":
        return x.complement()
    if y is None:
        raise ValueError(f"{op} needs two operands")
    if op == "union":
        return x.union(y)
    if op == "intersect":
        return x.intersect(y)
    raise ValueError(f"unknown boolean operation {op!r}")


def contains(x: SupportedSet, point: Mapping[str, int]) -> bool:
    return x.contains(point)


# -- Fubini product membership ----------------------------------------------


def fubini_member(x: SupportedSet, support: Sequence[str] | None = None) -> Verdict:
    """Membership of the set in the Fubini product of the array's oracles.

    The quantifier prefix runs over the given support (default: the set's
    minimal support) with the array-least label innermost.  Truth sets over
    a finite coordinate are collected by enumeration; over N the inner
    truth is eventually periodic in the coordinate value, so one full
    period beyond every constraint threshold determines the set.
    """
    if _BREAK_COMPLEMENT:
        x = x.complement()
    array = x.array
    if support is None:
        labels = list(x.support)
    else:
        labels = [l for l in array.labels if l in set(support)]
        if not set(x.support) <= set(labels):
            raise ValueError("support must contain every coordinate the set depends on")

    def level(remaining: List[str], point: Dict[str, int]) -> bool:
        if not remaining:
            return x.contains(point)
        label = remaining[0]
        rest = remaining[1:]
        dom = array.domain_of(label)
        oracle = array.oracle_of(label)
        truth_set: ValueSet
        if isinstance(dom, FiniteDomain):
            truth_set = frozenset(
                k for k in range(dom.size) if level(rest, {**point, label: k})
            )
        else:
            sets = x.constraint_sets(label)
            period = 1
            threshold = 0
            for s in sets:
                period = lcm(period, s.period)
                threshold = max(threshold, s.threshold)
            mask = frozenset(
                r
                for r in range(period)
                if level(rest, {**point, label: threshold + ((r - threshold) % period)})
            )
            overrides = {n: level(rest, {**point, label: n}) for n in range(threshold)}
            truth_set = PeriodicSet(period, mask, threshold, overrides)
        verdict = oracle.membership(truth_set)
        if verdict is Verdict.UNDECIDABLE:
            raise _UndecidableQuery()
        return verdict is Verdict.IN

    descending = list(reversed(labels))
    try:
        return Verdict.IN if level(descending, {}) else Verdict.OUT
    except _UndecidableQuery:
        return Verdict.UNDECIDABLE


# -- finite-support functions -------------------------------------------------


def _value_key(v: Any):
    if isinstance(v, bool):
        return ("b", v)
    if isinstance(v, int):
        return ("i", v)
    if isinstance(v, str):
        return ("s", v)
    if hasattr(v, "render"):
        return ("r", v.render())
    return ("x", repr(v))


class SupportedFunction:
    """Finite-support function on the index space with finitely many values.

    Stored as its level sets: (region, value) pieces whose regions are
    canonical SupportedSets partitioning the index space, one piece per
    distinct value.
    """

    __slots__ = ("array", "pieces")

    def __init__(self, array: ArraySpec, pieces: Iterable[Tuple[SupportedSet, Any]]) -> None:
        by_value: List[Tuple[Any, SupportedSet]] = []
        for region, value in pieces:
            if region.array != array:
                raise ArrayMismatch("piece region governed by a different array")
            for i, (v, r) in enumerate(by_value):
                if v == value:
                    by_value[i] = (v, r | region)
                    break
            else:
                by_value.append((value, region))
        by_value = [(v, r) for v, r in by_value if not r.is_empty()]
        if not by_value:
            raise ValueError("a function needs at least one nonempty piece")
        regions = [r for _, r in by_value]
        union = regions[0]
        for r in regions[1:]:
            union = union | r
        if not union.is_full():
            raise ValueError("piece regions do not cover the index space")
        for i in range(len(regions)):
            for j in range(i + 1, len(regions)):
                if not (regions[i] & regions[j]).is_empty():
                    raise ValueError("piece regions overlap")
        by_value.sort(key=lambda vr: _value_key(vr[0]))
        object.__setattr__(self, "array", array)
        object.__setattr__(self, "pieces", tuple((r, v) for v, r in by_value))

    def __setattr__(self, name, value):
        raise AttributeError("SupportedFunction is immutable")

    @property
    def support(self) -> Tuple[str, ...]:
        labels = {l for region, _ in self.pieces for l in region.support}
        return tuple(l for l in self.array.labels if l in labels)

    def eval(self, point: Mapping[str, int]) -> Any:
        for region, value in self.pieces:
            if region.contains(point):
                return value
        raise AssertionError("pieces do not partition the index space")

    def values(self) -> Tuple[Any, ...]:
        return tuple(v for _, v in self.pieces)

    def __eq__(self, other):
        if not isinstance(other, SupportedFunction):
            return NotImplemented
        return self.array == other.array and self.pieces == other.pieces

    def __hash__(self):
        return hash((self.array, self.pieces))

    def __repr__(self):
        parts = ", ".join(f"{region.render()} -> {value!r}" for region, value in self.pieces)
        return f"SupportedFunction({parts})"

    @staticmethod
    def constant(array: ArraySpec, value: Any) -> "SupportedFunction":
        return SupportedFunction(array, [(full_set(array), value)])

    @staticmethod
    def from_table(array: ArraySpec, labels: Sequence[str], table: Mapping[Tuple[int, ...], Any]) -> "SupportedFunction":
        """Explicit table over finite-domain support labels."""
        sizes = []
        for l in labels:
            dom = array.domain_of(l)
            if not isinstance(dom, FiniteDomain):
                raise TypeError(f"from_table needs finite domains; {l!r} ranges over N")
            sizes.append(dom.size)
        expected = set(itertools.product(*[range(s) for s in sizes]))
        if set(table) != expected:
            raise ValueError("table must be total over the support's value tuples")
        pieces = [
            (SupportedSet(array, [[(l, frozenset({k})) for l, k in zip(labels, key)]]), value)
            for key, value in table.items()
        ]
        return SupportedFunction(array, pieces)

    @staticmethod
    def from_guards(array: ArraySpec, label: str, pairs: Sequence[Tuple[PeriodicSet, Any]]) -> "SupportedFunction":
        """Guarded values on one N-valued coordinate; guards must partition N."""
        pieces = [(constraint_set(array, label, guard), value) for guard, value in pairs]
        return SupportedFunction(array, pieces)


class CoordProjection:
    """The function x -> x(label) on an N-valued coordinate.

    Not piecewise constant (its image is all of N), so it lives outside
    SupportedFunction; only the agreement sets needed by the properness
    argument are representable.
    """

    __slots__ = ("array", "label")

    def __init__(self, array: ArraySpec, label: str) -> None:
        if not isinstance(array.domain_of(label), OmegaDomain):
            raise TypeError("coordinate projection needs an N-valued coordinate")
        object.__setattr__(self, "array", array)
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):
        raise AttributeError("CoordProjection is immutable")

    def eval(self, point: Mapping[str, int]) -> int:
        return point[self.label]

    def __eq__(self, other):
        if not isinstance(other, CoordProjection):
            return NotImplemented
        return self.array == other.array and self.label == other.label

    def __hash__(self):
        return hash((self.array, self.label, "proj"))

    def __repr__(self):
        return f"CoordProjection({self.label})"


AnySupportedFunction = Union[SupportedFunction, CoordProjection]


def agreement_set(f: AnySupportedFunction, g: AnySupportedFunction) -> SupportedSet:
    """The set of index points where the two functions take equal values."""
    if f.array != g.array:
        raise ArrayMismatch("functions governed by different arrays")
    array = f.array
    if isinstance(f, CoordProjection) and isinstance(g, CoordProjection):
        if f.label == g.label:
            return full_set(array)
        raise UnrepresentableSet(
            "agreement of two distinct coordinate projections is a diagonal, "
            "which has no DNF representation over N-valued coordinates"
        )
    if isinstance(f, CoordProjection):
        f, g = g, f
    if isinstance(g, CoordProjection):
        acc = empty_set(array)
        for region, value in f.pieces:
            if isinstance(value, int) and not isinstance(value, bool) and value >= 0:
                acc = acc | (region & constraint_set(array, g.label, PeriodicSet.singleton(value)))
        return acc
    maps: Dict[str, List[ValueSet]] = {}
    for fn in (f, g):
        for region, _ in fn.pieces:
            for clause in region.clauses:
                for c in clause:
                    maps.setdefault(c.label, []).append(c.values)
    clauses = _canonical_clauses(array, maps, lambda p: f.eval(p) == g.eval(p))
    return SupportedSet(array, clauses, _canonical=True)


def equal_mod_D(f: AnySupportedFunction, g: AnySupportedFunction) -> Verdict:
    """Whether the agreement set of f and g lies in the Fubini product."""
    return fubini_member(agreement_set(f, g))


def combine(functions: Sequence[SupportedFunction], predicate) -> SupportedSet:
    """The set of points where predicate holds of the functions' values."""
    if not functions:
        raise ValueError("combine needs at least one function")
    array = functions[0].array
    for fn in functions[1:]:
        if fn.array != array:
            raise ArrayMismatch("functions governed by different arrays")
    maps: Dict[str, List[ValueSet]] = {}
    for fn in functions:
        for region, _ in fn.pieces:
            for clause in region.clauses:
                for c in clause:
                    maps.setdefault(c.label, []).append(c.values)
    clauses = _canonical_clauses(
        array, maps, lambda p: bool(predicate(*[fn.eval(p) for fn in functions]))
    )
    return SupportedSet(array, clauses, _canonical=True)
