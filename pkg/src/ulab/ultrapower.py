"""The ultrapower of a finite structure by the Fubini product.

Elements are classes of finite-support functions modulo D-almost-
everywhere equality; relations lift by D-largeness of their pointwise
truth sets.  With an all-principal array the quotient collapses onto the
base structure; with a free coordinate it acquires elements different
from every embedded one.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Tuple

from .filters import ArraySpec, FiniteDomain, OmegaDomain, PrincipalOracle, Verdict
from .index_algebra import (
    AnySupportedFunction,
    CoordProjection,
    SupportedFunction,
    combine,
    constraint_set,
    equal_mod_D,
    fubini_member,
)
from .periodic import PeriodicSet


class UnknownElement(ValueError):
    """Element not in the structure's universe."""


class ArityMismatch(ValueError):
    """Relation applied to the wrong number of arguments."""


class NotAllPrincipal(ValueError):
    """Operation requires every array coordinate to be principal."""


class NotFree(ValueError):
    """Operation requires a free ultrafilter on the chosen coordinate."""


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: FrozenSet[Tuple[Any, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tuples", frozenset(tuple(t) for t in self.tuples))
        if self.arity < 1:
            raise ValueError("relation arity must be positive")
        for t in self.tuples:
            if len(t) != self.arity:
                raise ValueError(f"tuple {t!r} does not match arity {self.arity}")


@dataclass(frozen=True)
class Structure:
    """Finite relational structure: a universe plus named tuple sets."""

    universe: Tuple[Any, ...]
    relations: Tuple[Relation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "relations", tuple(self.relations))
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe elements must be distinct")
        if not self.universe:
            raise ValueError("universe must be nonempty")
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique")
        elems = set(self.universe)
        for r in self.relations:
            for t in r.tuples:
                if not set(t) <= elems:
                    raise ValueError(f"relation {r.name} mentions elements outside the universe")

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(f"unknown relation {name!r}")

    def has_relation(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def holds(self, name: str, args: Sequence[Any]) -> bool:
        r = self.relation(name)
        if len(args) != r.arity:
            raise ArityMismatch(f"{name} expects {r.arity} arguments, got {len(args)}")
        return tuple(args) in r.tuples


class HyperElement:
    """Equivalence class of a finite-support function modulo the Fubini product.

    Equality is decided pairwise through the agreement set; the class is
    deliberately unhashable since a hash consistent with quotient equality
    would require canonical representatives.
    """

    __slots__ = ("representative", "array")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, representative: AnySupportedFunction) -> None:
        object.__setattr__(self, "representative", representative)
        object.__setattr__(self, "array", representative.array)

    def __setattr__(self, name, value):
        raise AttributeError("HyperElement is immutable")

    def __eq__(self, other):
        if not isinstance(other, HyperElement):
            return NotImplemented
        return equal_mod_D(self.representative, other.representative) is Verdict.IN

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __repr__(self):
        return f"HyperElement({self.representative!r})"


class UltrapowerModel:
    """The ultrapower of a finite base structure by an array's Fubini product."""

    def __init__(self, base: Structure, array: ArraySpec) -> None:
        self.base = base
        self.array = array
        self._truth_cache: Dict[Any, Any] = {}

    def star(self, r: Any) -> HyperElement:
        """The class of the constant function with value r."""
        if r not in self.base.universe:
            raise UnknownElement(f"{r!r} is not in the universe")
        return HyperElement(SupportedFunction.constant(self.array, r))

    def element(self, f: AnySupportedFunction) -> HyperElement:
        return HyperElement(f)

    def relation_lift(self, name: str, args: Sequence[HyperElement]) -> Verdict:
        """D-largeness of the pointwise truth set of the named relation."""
        rel = self.base.relation(name)
        if len(args) != rel.arity:
            raise ArityMismatch(f"{name} expects {rel.arity} arguments, got {len(args)}")
        fs = []
        for a in args:
            if a.array != self.array:
                from .index_algebra import ArrayMismatch

                raise ArrayMismatch("argument governed by a different array")
            if not isinstance(a.representative, SupportedFunction):
                raise TypeError("relation lift over a finite structure needs piecewise functions")
            fs.append(a.representative)
        defining = combine(fs, lambda *vals: tuple(vals) in rel.tuples)
        return fubini_member(defining)

    def equal(self, a: HyperElement, b: HyperElement) -> Verdict:
        return equal_mod_D(a.representative, b.representative)


def star_embed(model: UltrapowerModel, r: Any) -> HyperElement:
    return model.star(r)


def relation_lift(model: UltrapowerModel, name: str, args: Sequence[HyperElement]) -> Verdict:
    return model.relation_lift(name, args)


# -- principal collapse -------------------------------------------------------


@dataclass
class CollapseReport:
    point: Dict[str, int]
    mode: str
    function_count: int
    ok: bool
    lines: List[str]
    collapse: Any = None  # the verified map: HyperElement -> base element

    def summary(self) -> str:
        status = "ISOMORPHISM VERIFIED" if self.ok else "FAILED"
        return (
            f"collapse at point {self.point}: {status} "
            f"({self.function_count} functions checked, {self.mode})"
        )


def enumerate_functions(array: ArraySpec, values: Sequence[Any]) -> List[SupportedFunction]:
    """All finite-support functions into the value list, as explicit tables.

    Only meaningful when every coordinate domain is finite; the table runs
    over the full product of the domains.
    """
    labels = list(array.labels)
    sizes = []
    for l in labels:
        dom = array.domain_of(l)
        if not isinstance(dom, FiniteDomain):
            raise NotAllPrincipal("function enumeration needs finite value domains")
        sizes.append(dom.size)
    points = list(itertools.product(*[range(s) for s in sizes]))
    out = []
    for assignment in itertools.product(values, repeat=len(points)):
        table = dict(zip(points, assignment))
        if labels:
            out.append(SupportedFunction.from_table(array, labels, table))
        else:
            out.append(SupportedFunction.constant(array, assignment[0]))
    return out


def principal_collapse(
    model: UltrapowerModel,
    max_enumeration: int = 512,
    rng=None,
    sample_size: int = 64,
) -> CollapseReport:
    """Verify that evaluation at the principal point is an isomorphism.

    The map sends the class of f to f(p) where p picks each coordinate's
    principal point.  Verified: well-definedness (each f collapses onto the
    constant at its value), injectivity and surjectivity via the embedded
    constants, and relation preservation in both directions.
    """
    array = model.array
    if not array.all_principal():
        raise NotAllPrincipal("collapse needs an all-principal array")
    point = array.principal_point()
    universe = model.base.universe

    total = 1
    for l in array.labels:
        total *= array.domain_of(l).size  # type: ignore[union-attr]
    exhaustive = len(universe) ** total <= max_enumeration
    if exhaustive:
        functions = enumerate_functions(array, universe)
        mode = "exhaustive"
    else:
        functions = [SupportedFunction.constant(array, r) for r in universe]
        labels = list(array.labels)
        points = list(itertools.product(*[range(array.domain_of(l).size) for l in labels]))  # type: ignore[union-attr]
        rng = rng or random.Random(0)
        for _ in range(sample_size):
            table = {pt: rng.choice(universe) for pt in points}
            functions.append(SupportedFunction.from_table(array, labels, table))
        mode = f"constants + {sample_size} sampled"

    lines = [f"point {point}", f"mode {mode}"]
    ok = True

    constants = {r: SupportedFunction.constant(array, r) for r in universe}
    for f in functions:
        value = f.eval(point)
        verdict = equal_mod_D(f, constants[value])
        good = verdict is Verdict.IN
        ok &= good
        lines.append(f"welldef value={value!r} verdict={verdict} {'ok' if good else 'FAIL'}")
    for i, r in enumerate(universe):
        for s in universe[i + 1 :]:
            verdict = equal_mod_D(constants[r], constants[s])
            good = verdict is Verdict.OUT
            ok &= good
            lines.append(f"distinct {r!r} {s!r} verdict={verdict} {'ok' if good else 'FAIL'}")
    for rel in model.base.relations:
        for t in itertools.product(universe, repeat=rel.arity):
            base_truth = tuple(t) in rel.tuples
            verdict = model.relation_lift(rel.name, [HyperElement(constants[r]) for r in t])
            good = (verdict is Verdict.IN) == base_truth
            ok &= good
            lines.append(
                f"relation {rel.name}{t!r} base={base_truth} star={verdict} {'ok' if good else 'FAIL'}"
            )
        for f_tuple in _function_tuples(functions, rel.arity, limit=200):
            collapsed = tuple(f.eval(point) for f in f_tuple)
            base_truth = collapsed in rel.tuples
            verdict = model.relation_lift(rel.name, [HyperElement(f) for f in f_tuple])
            good = (verdict is Verdict.IN) == base_truth
            ok &= good
            lines.append(
                f"relation {rel.name} at collapsed {collapsed!r} base={base_truth} "
                f"star={verdict} {'ok' if good else 'FAIL'}"
            )

    def collapse(he: HyperElement) -> Any:
        return he.representative.eval(point)

    return CollapseReport(
        point=point,
        mode=mode,
        function_count=len(functions),
        ok=ok,
        lines=lines,
        collapse=collapse,
    )


def _function_tuples(functions: Sequence[SupportedFunction], arity: int, limit: int):
    out = []
    for t in itertools.product(functions, repeat=arity):
        out.append(t)
        if len(out) >= limit:
            break
    return out


# -- properness witness --------------------------------------------------------


@dataclass
class WitnessReport:
    label: str
    element: HyperElement
    singleton_verdicts: List[Tuple[int, Verdict]]
    cofinite_verdicts: List[Tuple[int, Verdict]]
    ok: bool
    lines: List[str]

    def summary(self) -> str:
        status = "PROPER" if self.ok else "FAILED"
        n = len(self.singleton_verdicts)
        return f"witness on {self.label}: {status} ({n} singleton and {n} cofinal queries)"


def properness_witness(array: ArraySpec, label: str | None = None, sample: Iterable[int] = range(100)) -> WitnessReport:
    """Exhibit a class different from, and above, every sampled embedded value.

    The witness is the coordinate projection on a free N-valued coordinate.
    Each singleton query {x : x(label) = r} must be rejected (the class
    differs from the embedded r) and each cofinal query {x : x(label) > r}
    accepted (the class is larger than every sampled standard value).
    """
    if label is None:
        for e in array.entries:
            if isinstance(e.domain, OmegaDomain):
                label = e.label
                break
        else:
            raise NotFree("array has no N-valued coordinate")
    oracle = array.oracle_of(label)
    if isinstance(oracle, PrincipalOracle):
        raise NotFree(f"coordinate {label!r} carries a principal ultrafilter")

    element = HyperElement(CoordProjection(array, label))
    singleton_verdicts: List[Tuple[int, Verdict]] = []
    cofinite_verdicts: List[Tuple[int, Verdict]] = []
    lines: List[str] = []
    ok = True
    for r in sample:
        v = fubini_member(constraint_set(array, label, PeriodicSet.singleton(r)))
        singleton_verdicts.append((r, v))
        good = v is Verdict.OUT
        ok &= good
        lines.append(f"singleton {{x({label}) = {r}}} -> {v} {'ok' if good else 'FAIL'}")
    for r in sample:
        v = fubini_member(constraint_set(array, label, PeriodicSet.greater_than(r)))
        cofinite_verdicts.append((r, v))
        good = v is Verdict.IN
        ok &= good
        lines.append(f"cofinal {{x({label}) > {r}}} -> {v} {'ok' if good else 'FAIL'}")
    return WitnessReport(
        label=label,
        element=element,
        singleton_verdicts=singleton_verdicts,
        cofinite_verdicts=cofinite_verdicts,
        ok=ok,
        lines=lines,
    )
