"""Superstructure levels over a finite base and their ultrapowers.

Level 0 holds the base elements as atoms (never equal to any set); each
later level adds every subset of the previous one.  Classes of finite-
support functions into a level form the level's ultrapower; membership
lifts pointwise, and in the all-principal regime every such class is
identified either with a lower-level class or with the set of lower-level
classes that lie in it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from .filters import Verdict
from .index_algebra import SupportedFunction, SupportedSet, agreement_set, combine, equal_mod_D, fubini_member
from .logic import (
    And,
    BoundedExists,
    BoundedForAll,
    Equals,
    Formula,
    Implies,
    Member,
    Not,
    Or,
    Term,
    Var,
    free_vars,
    node_count,
    render,
)
from .ultrapower import NotAllPrincipal, Structure, UltrapowerModel


class LevelTooLarge(ValueError):
    """Requested superstructure level is beyond the enumerable range."""


@dataclass(frozen=True)
class VAtom:
    """Base element as an urelement: rank 0, distinct from every set."""

    payload: Any

    @property
    def rank(self) -> int:
        return 0

    def render(self) -> str:
        return str(self.payload)

    def __repr__(self) -> str:
        return f"VAtom({self.payload!r})"


class VSet:
    """Extensional finite set of lower-rank elements."""

    __slots__ = ("members", "_rank", "_render")

    def __init__(self, members) -> None:
        members = frozenset(members)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_rank", 1 + max((m.rank for m in members), default=0))
        object.__setattr__(
            self,
            "_render",
            "{" + ", ".join(m.render() for m in sorted(members, key=_v_key)) + "}",
        )

    def __setattr__(self, name, value):
        raise AttributeError("VSet is immutable")

    @property
    def rank(self) -> int:
        return self._rank

    def render(self) -> str:
        return self._render

    def __eq__(self, other):
        if not isinstance(other, VSet):
            return NotImplemented
        return self.members == other.members

    def __hash__(self):
        return hash(("VSet", self.members))

    def __repr__(self):
        return f"VSet({self.render()})"


VElement = Any  # VAtom | VSet


def _v_key(v: VElement) -> Tuple[int, str]:
    return (0, v.render()) if isinstance(v, VAtom) else (1, v.render())


def v_member(e: VElement, s: VElement) -> bool:
    """Payload membership; false whenever the right side is an atom."""
    return isinstance(s, VSet) and e in s.members


def build_levels(structure: Structure, n: int) -> List[List[VElement]]:
    """Levels 0..n, each sorted canonically and duplicate-free."""
    if len(structure.universe) > 3 or n > 2:
        raise LevelTooLarge("enumeration is enforced for at most 3 atoms and level 2")
    if n < 0:
        raise ValueError("level must be non-negative")
    level: List[VElement] = sorted((VAtom(r) for r in structure.universe), key=_v_key)
    levels = [level]
    for _ in range(n):
        prev = levels[-1]
        nxt = set(prev)
        for k in range(len(prev) + 1):
            for combo in itertools.combinations(prev, k):
                nxt.add(VSet(combo))
        levels.append(sorted(nxt, key=_v_key))
    return levels


def build_V(structure: Structure, n: int) -> List[VElement]:
    return build_levels(structure, n)[n]


class StarVElement:
    """Class of a finite-support function into a fixed level's elements."""

    __slots__ = ("function", "level")

    def __init__(self, function: SupportedFunction, level: int) -> None:
        object.__setattr__(self, "function", function)
        object.__setattr__(self, "level", level)

    def __setattr__(self, name, value):
        raise AttributeError("StarVElement is immutable")

    __hash__ = None  # type: ignore[assignment]

    def __eq__(self, other):
        if not isinstance(other, StarVElement):
            return NotImplemented
        return (
            self.level == other.level
            and equal_mod_D(self.function, other.function) is Verdict.IN
        )

    def __repr__(self):
        return f"StarVElement(level={self.level}, {self.function!r})"


def star_of(model: UltrapowerModel, v: VElement, level: int) -> StarVElement:
    return StarVElement(SupportedFunction.constant(model.array, v), level)


def star_membership(e: StarVElement, s: StarVElement) -> Verdict:
    """Fubini verdict of the pointwise membership set {x : f_e(x) in f_s(x)}."""
    defining = combine([e.function, s.function], v_member)
    return fubini_member(defining)


@dataclass
class Identification:
    """A level-n class seen as a lower-level element or as a subset."""

    kind: str  # "element" or "subset"
    lower: StarVElement | None = None
    extension: Tuple[StarVElement, ...] = ()


def identify_as_subset(
    model: UltrapowerModel, levels: Sequence[Sequence[VElement]], s: StarVElement
) -> Identification:
    """Identify a level-n class per its D-large behaviour.

    If the representative lands in the previous level on a D-large set the
    class simply is a lower-level class; otherwise it is identified with
    its extension, the set of lower-level classes lying in it.
    """
    if not model.array.all_principal():
        raise NotAllPrincipal("identification enumerates classes, which needs the principal regime")
    n = s.level
    if n < 1:
        raise ValueError("identification applies to levels >= 1")
    prev = list(levels[n - 1])
    prev_set = set(prev)
    in_prev = combine([s.function], lambda v: v in prev_set)
    if fubini_member(in_prev) is Verdict.IN:
        return Identification("element", lower=StarVElement(s.function, n - 1))
    extension = tuple(
        star_of(model, v, n - 1)
        for v in prev
        if star_membership(star_of(model, v, n - 1), s) is Verdict.IN
    )
    return Identification("subset", extension=extension)


# -- bounded evaluation --------------------------------------------------------


def eval_v(levels: Sequence[Sequence[VElement]], f: Formula, valuation: Mapping[str, VElement] | None = None) -> bool:
    """Tarski evaluation with quantifiers bounded to superstructure levels."""
    env: Dict[str, VElement] = dict(valuation or {})

    def term_value(t: Term) -> VElement:
        if isinstance(t, Var):
            return env[t.name]
        raise TypeError("bounded sentences use variables only")

    def rec(g: Formula) -> bool:
        if isinstance(g, Member):
            return v_member(term_value(g.left), term_value(g.right))
        if isinstance(g, Equals):
            return term_value(g.left) == term_value(g.right)
        if isinstance(g, Not):
            return not rec(g.body)
        if isinstance(g, And):
            return rec(g.left) and rec(g.right)
        if isinstance(g, Or):
            return rec(g.left) or rec(g.right)
        if isinstance(g, Implies):
            return (not rec(g.left)) or rec(g.right)
        if isinstance(g, (BoundedForAll, BoundedExists)):
            hits = []
            for m in levels[g.level]:
                env[g.var] = m
                hits.append(rec(g.body))
            del env[g.var]
            return all(hits) if isinstance(g, BoundedForAll) else any(hits)
        raise TypeError(f"not a bounded formula: {g!r}")

    return rec(f)


def truth_set_v(
    model: UltrapowerModel,
    levels: Sequence[Sequence[VElement]],
    f: Formula,
    env: Mapping[str, SupportedFunction],
) -> SupportedSet:
    """Pointwise truth set of a bounded formula, with least-witness Skolem
    functions for bounded existentials."""
    key = (f, tuple(sorted(env.items())))
    cached = model._truth_cache.get(key)
    if cached is not None:
        return cached
    array = model.array

    def fn(t: Term) -> SupportedFunction:
        if isinstance(t, Var):
            return env[t.name]
        raise TypeError("bounded sentences use variables only")

    if isinstance(f, Member):
        out = combine([fn(f.left), fn(f.right)], v_member)
    elif isinstance(f, Equals):
        out = agreement_set(fn(f.left), fn(f.right))
    elif isinstance(f, Not):
        out = truth_set_v(model, levels, f.body, env).complement()
    elif isinstance(f, And):
        out = truth_set_v(model, levels, f.left, env) & truth_set_v(model, levels, f.right, env)
    elif isinstance(f, Or):
        out = truth_set_v(model, levels, f.left, env) | truth_set_v(model, levels, f.right, env)
    elif isinstance(f, Implies):
        out = truth_set_v(model, levels, f.left, env).complement() | truth_set_v(
            model, levels, f.right, env
        )
    elif isinstance(f, BoundedExists):
        pieces = []
        covered: SupportedSet | None = None
        for m in levels[f.level]:
            s_m = truth_set_v(model, levels, f.body, {**env, f.var: SupportedFunction.constant(array, m)})
            region = s_m if covered is None else s_m & covered.complement()
            covered = s_m if covered is None else covered | s_m
            if not region.is_empty():
                pieces.append((region, m))
        assert covered is not None
        rest = covered.complement()
        if not rest.is_empty():
            pieces.append((rest, levels[f.level][0]))
        skolem = SupportedFunction(array, pieces)
        out = truth_set_v(model, levels, f.body, {**env, f.var: skolem})
    elif isinstance(f, BoundedForAll):
        out = truth_set_v(model, levels, BoundedExists(f.var, f.level, Not(f.body)), env).complement()
    else:
        raise TypeError(f"not a bounded formula: {f!r}")
    model._truth_cache[key] = out
    return out


def eval_star_v(
    model: UltrapowerModel,
    levels: Sequence[Sequence[VElement]],
    f: Formula,
    valuation: Mapping[str, StarVElement] | None = None,
) -> Verdict:
    env = {name: sv.function for name, sv in (valuation or {}).items()}
    return fubini_member(truth_set_v(model, levels, f, env))


# -- bounded sentence enumeration and transfer ---------------------------------

BOUNDED_PRUNING_RULES: Tuple[str, ...] = (
    "node metric: every AST node counts, terms included",
    "bound variables are named canonically by nesting depth (v0, v1, ...)",
    "conjunction and disjunction operands are ordered and distinct",
    "equality operands are ordered (membership operands are not: membership "
    "is asymmetric)",
    "doubly negated formulas are skipped",
    "quantifier bodies must mention the quantified variable",
)


def enumerate_bounded_sentences(max_level: int, max_depth: int, max_nodes: int) -> List[Formula]:
    """All sentences whose quantifiers are bounded to levels 0..max_level."""
    from collections import defaultdict

    memo: Dict[Tuple[int, int], List[Formula]] = {}

    def key(g: Formula) -> Tuple[int, str]:
        return (node_count(g), render(g))

    def formulas(k: int, d: int) -> List[Formula]:
        if (k, d) in memo:
            return memo[(k, d)]
        terms = [Var(f"v{i}") for i in range(k)]
        by_size: Dict[int, List[Formula]] = defaultdict(list)
        if 3 <= max_nodes:
            for t1 in terms:
                for t2 in terms:
                    by_size[3].append(Member(t1, t2))
            for i, t1 in enumerate(terms):
                for t2 in terms[i:]:
                    by_size[3].append(Equals(t1, t2))
        inner = formulas(k + 1, d - 1) if d >= 1 else []
        quantifiable = [g for g in inner if f"v{k}" in free_vars(g)]
        for n in range(1, max_nodes + 1):
            grown: List[Formula] = []
            for g in by_size.get(n - 1, []):
                if not isinstance(g, Not):
                    grown.append(Not(g))
            for i in range(1, n - 1):
                for a in by_size.get(i, []):
                    for b in by_size.get(n - 1 - i, []):
                        if key(a) < key(b):
                            grown.append(And(a, b))
                            grown.append(Or(a, b))
                        grown.append(Implies(a, b))
            for g in quantifiable:
                if node_count(g) == n - 1:
                    for level in range(max_level + 1):
                        grown.append(BoundedForAll(f"v{k}", level, g))
                        grown.append(BoundedExists(f"v{k}", level, g))
            by_size[n].extend(grown)
        out: List[Formula] = []
        for n in sorted(by_size):
            out.extend(sorted(by_size[n], key=render))
        memo[(k, d)] = out
        return out

    return formulas(0, max_depth)


@dataclass
class BoundedTransferReport:
    pruning: Tuple[str, ...]
    level: int
    level_sizes: Tuple[int, ...]
    total: int
    agreements: int
    counterexamples: List[str]
    rows: List[Tuple[bool, Verdict, str]]

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def lines(self) -> List[str]:
        out = [f"pruning: {rule}" for rule in self.pruning]
        out.append("level sizes: " + ", ".join(f"|V_{i}| = {s}" for i, s in enumerate(self.level_sizes)))
        out.append(f"sentences checked: {self.total}")
        out.append(f"agreements: {self.agreements}")
        out.append(f"counterexamples: {len(self.counterexamples)}")
        for s in self.counterexamples:
            out.append(f"counterexample: {s}")
        for base, star, text in self.rows:
            out.append(f"{'true' if base else 'false'} {star} {text}")
        return out


def bounded_transfer_check(
    structure: Structure,
    model: UltrapowerModel,
    n: int,
    depth_bound: int,
    node_bound: int = 10,
) -> BoundedTransferReport:
    """Compare level-bounded truth with its ultrapower counterpart."""
    if not model.array.all_principal():
        raise NotAllPrincipal("bounded transfer runs in the all-principal regime")
    levels = build_levels(structure, n)
    sentences = enumerate_bounded_sentences(n, depth_bound, node_bound)
    rows: List[Tuple[bool, Verdict, str]] = []
    counterexamples: List[str] = []
    agreements = 0
    for s in sentences:
        base = eval_v(levels, s)
        star = eval_star_v(model, levels, s)
        text = render(s)
        rows.append((base, star, text))
        if base == (star is Verdict.IN):
            agreements += 1
        else:
            counterexamples.append(text)
    return BoundedTransferReport(
        pruning=BOUNDED_PRUNING_RULES,
        level=n,
        level_sizes=tuple(len(lv) for lv in levels),
        total=len(sentences),
        agreements=agreements,
        counterexamples=counterexamples,
        rows=rows,
    )
