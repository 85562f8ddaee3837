"""First-order formulas over finite relational signatures.

Provides the AST with parser and canonical renderer, exhaustive Tarski
evaluation over a finite structure, the reduced evaluation over an
ultrapower (atoms become pointwise truth sets, connectives become set
algebra, existential quantifiers become least-witness Skolem functions),
and a transfer checker that enumerates all sentences within given bounds
and compares the two evaluations.
"""

from __future__ import annotations

import itertools
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

from .filters import Verdict
from .index_algebra import SupportedFunction, SupportedSet, agreement_set, combine
from .index_algebra import fubini_member
from .ultrapower import ArityMismatch, HyperElement, Structure, UltrapowerModel


class UnknownRelation(ValueError):
    """Relation symbol absent from the signature."""


class FormulaSyntaxError(ValueError):
    def __init__(self, position: int, expected: str, found: str = "") -> None:
        self.position = position
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found else ""
        super().__init__(f"syntax error at position {position}: expected {expected}{detail}")


# -- terms and formulas -------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    index: int


Term = Union[Var, Const]


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Equals(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Member(Formula):
    """Set membership atom, meaningful in the superstructure levels."""

    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class BoundedForAll(Formula):
    """Quantifier ranging over one superstructure level."""

    var: str
    level: int
    body: Formula


@dataclass(frozen=True)
class BoundedExists(Formula):
    var: str
    level: int
    body: Formula


_BINARY = (And, Or, Implies)
_QUANT = (ForAll, Exists, BoundedForAll, BoundedExists)


def render_term(t: Term) -> str:
    return t.name if isinstance(t, Var) else f"c{t.index}"


def _open_tail(f: Formula) -> bool:
    """Whether the rendering ends in a quantifier body that would swallow
    a following connective; such left operands need parentheses."""
    if isinstance(f, _QUANT):
        return True
    if isinstance(f, Not):
        return _open_tail(f.body)
    return False


def _render_left(f: Formula) -> str:
    text = render(f)
    return f"({text})" if _open_tail(f) else text


def render(f: Formula) -> str:
    """Canonical text; parse(render(f)) reproduces f exactly."""
    if isinstance(f, Atom):
        return f"{f.name}({', '.join(render_term(t) for t in f.args)})"
    if isinstance(f, Equals):
        return f"{render_term(f.left)} = {render_term(f.right)}"
    if isinstance(f, Member):
        return f"{render_term(f.left)} in {render_term(f.right)}"
    if isinstance(f, Not):
        return "!" + render(f.body)
    if isinstance(f, And):
        return f"({_render_left(f.left)} & {render(f.right)})"
    if isinstance(f, Or):
        return f"({_render_left(f.left)} | {render(f.right)})"
    if isinstance(f, Implies):
        return f"({_render_left(f.left)} -> {render(f.right)})"
    if isinstance(f, ForAll):
        return f"forall {f.var}. {render(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}. {render(f.body)}"
    if isinstance(f, BoundedForAll):
        return f"forall {f.var} in V{f.level}. {render(f.body)}"
    if isinstance(f, BoundedExists):
        return f"exists {f.var} in V{f.level}. {render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def node_count(f: Formula) -> int:
    """Number of AST nodes, terms included."""
    if isinstance(f, Atom):
        return 1 + len(f.args)
    if isinstance(f, (Equals, Member)):
        return 3
    if isinstance(f, Not):
        return 1 + node_count(f.body)
    if isinstance(f, _BINARY):
        return 1 + node_count(f.left) + node_count(f.right)
    if isinstance(f, _QUANT):
        return 1 + node_count(f.body)
    raise TypeError(f"not a formula: {f!r}")


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, (Atom, Equals, Member)):
        return 0
    if isinstance(f, Not):
        return quantifier_depth(f.body)
    if isinstance(f, _BINARY):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    if isinstance(f, _QUANT):
        return 1 + quantifier_depth(f.body)
    raise TypeError(f"not a formula: {f!r}")


def free_vars(f: Formula) -> frozenset:
    def term_vars(t: Term) -> frozenset:
        return frozenset({t.name}) if isinstance(t, Var) else frozenset()

    if isinstance(f, Atom):
        out: frozenset = frozenset()
        for t in f.args:
            out |= term_vars(t)
        return out
    if isinstance(f, (Equals, Member)):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, _BINARY):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, _QUANT):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


# -- parser -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<lparen>\()|(?P<rparen>\))|(?P<comma>,)|(?P<dot>\.)"
    r"|(?P<bang>!)|(?P<amp>&)|(?P<pipe>\|)|(?P<eq>=)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*))"
)

_CONST_RE = re.compile(r"^c(\d+)$")
_LEVEL_RE = re.compile(r"^V(\d+)$")


class _Tokens:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.kind = ""
        self.value = ""
        self.start = 0
        self.advance()

    def advance(self) -> None:
        if self.pos >= len(self.text):
            self.kind, self.value, self.start = "eof", "", self.pos
            return
        m = _TOKEN_RE.match(self.text, self.pos)
        if not m or m.end() == self.pos:
            stripped = self.text[self.pos :].lstrip()
            if not stripped:
                self.kind, self.value, self.start = "eof", "", len(self.text)
                return
            raise FormulaSyntaxError(len(self.text) - len(stripped), "a token", stripped[0])
        self.start = m.start(m.lastgroup)  # type: ignore[arg-type]
        self.kind = m.lastgroup or ""
        self.value = m.group(m.lastgroup)  # type: ignore[arg-type]
        if self.kind == "ident" and self.value in ("forall", "exists", "in"):
            self.kind = self.value
        self.pos = m.end()

    def expect(self, kind: str) -> str:
        if self.kind != kind:
            raise FormulaSyntaxError(self.start, kind, self.value or self.kind)
        v = self.value
        self.advance()
        return v


class _Parser:
    def __init__(self, text: str, signature: Mapping[str, int] | None) -> None:
        self.toks = _Tokens(text)
        self.signature = signature

    def parse(self) -> Formula:
        f = self.implies()
        if self.toks.kind != "eof":
            raise FormulaSyntaxError(self.toks.start, "end of input", self.toks.value)
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.toks.kind == "arrow":
            self.toks.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.toks.kind == "pipe":
            self.toks.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.toks.kind == "amp":
            self.toks.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.toks.kind == "bang":
            self.toks.advance()
            return Not(self.unary())
        if self.toks.kind in ("forall", "exists"):
            return self.quantifier()
        return self.atom()

    def quantifier(self) -> Formula:
        kind = self.toks.kind
        self.toks.advance()
        var = self.toks.expect("ident")
        level: int | None = None
        if self.toks.kind == "in":
            self.toks.advance()
            pos = self.toks.start
            name = self.toks.expect("ident")
            m = _LEVEL_RE.match(name)
            if not m:
                raise FormulaSyntaxError(pos, "a level name V<k>", name)
            level = int(m.group(1))
        self.toks.expect("dot")
        body = self.implies()
        if level is None:
            return ForAll(var, body) if kind == "forall" else Exists(var, body)
        return BoundedForAll(var, level, body) if kind == "forall" else BoundedExists(var, level, body)

    def atom(self) -> Formula:
        if self.toks.kind == "lparen":
            self.toks.advance()
            f = self.implies()
            self.toks.expect("rparen")
            return f
        pos = self.toks.start
        name = self.toks.expect("ident")
        if self.toks.kind == "lparen":
            self.toks.advance()
            args: List[Term] = []
            if self.toks.kind != "rparen":
                args.append(self.term())
                while self.toks.kind == "comma":
                    self.toks.advance()
                    args.append(self.term())
            self.toks.expect("rparen")
            if self.signature is not None:
                if name not in self.signature:
                    raise UnknownRelation(f"unknown relation {name!r} at position {pos}")
                if self.signature[name] != len(args):
                    raise ArityMismatch(
                        f"{name} expects {self.signature[name]} arguments, got {len(args)}"
                    )
            return Atom(name, tuple(args))
        left = self.term_from_name(name, pos)
        if self.toks.kind == "eq":
            self.toks.advance()
            return Equals(left, self.term())
        if self.toks.kind == "in":
            self.toks.advance()
            return Member(left, self.term())
        raise FormulaSyntaxError(self.toks.start, "'=', 'in' or '('", self.toks.value or self.toks.kind)

    def term(self) -> Term:
        pos = self.toks.start
        name = self.toks.expect("ident")
        return self.term_from_name(name, pos)

    def term_from_name(self, name: str, pos: int) -> Term:
        m = _CONST_RE.match(name)
        if m:
            return Const(int(m.group(1)))
        if self.signature is not None and name in self.signature:
            raise FormulaSyntaxError(pos, "a term", name)
        return Var(name)


def parse(text: str, signature: Mapping[str, int] | None = None) -> Formula:
    """Parse a formula; with a signature, relation names and arities are checked."""
    return _Parser(text, signature).parse()


# -- Tarski evaluation over the finite base ----------------------------------


def eval_base(structure: Structure, f: Formula, valuation: Mapping[str, Any] | None = None) -> bool:
    """Exhaustive evaluation; quantifiers range over the finite universe."""
    v: Dict[str, Any] = dict(valuation or {})

    def term_value(t: Term) -> Any:
        if isinstance(t, Var):
            if t.name not in v:
                raise KeyError(f"unbound variable {t.name}")
            return v[t.name]
        return structure.universe[t.index]

    def rec(g: Formula) -> bool:
        if isinstance(g, Atom):
            return structure.holds(g.name, [term_value(t) for t in g.args])
        if isinstance(g, Equals):
            return term_value(g.left) == term_value(g.right)
        if isinstance(g, Member):
            raise TypeError("membership atoms need the superstructure evaluator")
        if isinstance(g, Not):
            return not rec(g.body)
        if isinstance(g, And):
            return rec(g.left) and rec(g.right)
        if isinstance(g, Or):
            return rec(g.left) or rec(g.right)
        if isinstance(g, Implies):
            return (not rec(g.left)) or rec(g.right)
        if isinstance(g, (ForAll, Exists)):
            hits = []
            for m in structure.universe:
                v[g.var] = m
                hits.append(rec(g.body))
            del v[g.var]
            return all(hits) if isinstance(g, ForAll) else any(hits)
        raise TypeError("bounded quantifiers need the superstructure evaluator")

    return rec(f)


# -- reduced evaluation over the ultrapower -----------------------------------


def truth_set(model: UltrapowerModel, f: Formula, env: Mapping[str, SupportedFunction]) -> SupportedSet:
    """The pointwise truth set of the formula as a finite-support set.

    Atoms and equalities come from the argument functions' pieces;
    connectives are set algebra; an existential quantifier evaluates the
    body at a least-witness Skolem function assembled from the per-element
    truth sets.
    """
    key = (f, tuple(sorted(env.items())))
    cached = model._truth_cache.get(key)
    if cached is not None:
        return cached

    array = model.array
    universe = model.base.universe

    def term_fn(t: Term) -> SupportedFunction:
        if isinstance(t, Var):
            if t.name not in env:
                raise KeyError(f"unbound variable {t.name}")
            return env[t.name]
        return SupportedFunction.constant(array, universe[t.index])

    if isinstance(f, Atom):
        rel = model.base.relation(f.name)
        if len(f.args) != rel.arity:
            raise ArityMismatch(f"{f.name} expects {rel.arity} arguments")
        fns = [term_fn(t) for t in f.args]
        out = combine(fns, lambda *vals: tuple(vals) in rel.tuples)
    elif isinstance(f, Equals):
        out = agreement_set(term_fn(f.left), term_fn(f.right))
    elif isinstance(f, Member):
        raise TypeError("membership atoms need the superstructure evaluator")
    elif isinstance(f, Not):
        out = truth_set(model, f.body, env).complement()
    elif isinstance(f, And):
        out = truth_set(model, f.left, env) & truth_set(model, f.right, env)
    elif isinstance(f, Or):
        out = truth_set(model, f.left, env) | truth_set(model, f.right, env)
    elif isinstance(f, Implies):
        out = truth_set(model, f.left, env).complement() | truth_set(model, f.right, env)
    elif isinstance(f, Exists):
        skolem = skolem_function(model, f.var, f.body, env)
        out = truth_set(model, f.body, {**env, f.var: skolem})
    elif isinstance(f, ForAll):
        out = truth_set(model, Exists(f.var, Not(f.body)), env).complement()
    else:
        raise TypeError("bounded quantifiers need the superstructure evaluator")

    model._truth_cache[key] = out
    return out


def skolem_function(
    model: UltrapowerModel, var: str, body: Formula, env: Mapping[str, SupportedFunction]
) -> SupportedFunction:
    """Pointwise least witness for an existential quantifier.

    Where some universe element satisfies the body, the function picks the
    least such element in the universe's listed order; elsewhere it falls
    back to the first element (the body is false there regardless).
    """
    array = model.array
    universe = model.base.universe
    pieces = []
    covered = None
    for m in universe:
        s_m = truth_set(model, body, {**env, var: SupportedFunction.constant(array, m)})
        region = s_m if covered is None else s_m & covered.complement()
        covered = s_m if covered is None else covered | s_m
        if not region.is_empty():
            pieces.append((region, m))
    assert covered is not None
    rest = covered.complement()
    if not rest.is_empty():
        pieces.append((rest, universe[0]))
    return SupportedFunction(array, pieces)


def eval_star(
    model: UltrapowerModel, f: Formula, valuation: Mapping[str, HyperElement] | None = None
) -> Verdict:
    """Fubini membership of the formula's truth set."""
    env: Dict[str, SupportedFunction] = {}
    for name, he in (valuation or {}).items():
        rep = he.representative
        if not isinstance(rep, SupportedFunction):
            raise TypeError("star evaluation needs piecewise representatives")
        env[name] = rep
    return fubini_member(truth_set(model, f, env))


def eval_star_principal(
    model: UltrapowerModel, f: Formula, valuation: Mapping[str, HyperElement] | None = None
) -> bool:
    """Independent second path in the all-principal regime: evaluate the
    base structure at the collapsed values."""
    point = model.array.principal_point()
    v = {name: he.representative.eval(point) for name, he in (valuation or {}).items()}
    return eval_base(model.base, f, v)


# -- sentence enumeration and the transfer check ------------------------------

PRUNING_RULES: Tuple[str, ...] = (
    "node metric: every AST node counts, terms included",
    "bound variables are named canonically by nesting depth (v0, v1, ...): "
    "alpha-variants are enumerated once",
    "conjunction and disjunction operands are ordered and distinct "
    "(commutative and idempotent duplicates skipped)",
    "equality operands are ordered (symmetric duplicates skipped)",
    "doubly negated formulas are skipped",
    "quantifier bodies must mention the quantified variable",
)


def _formula_key(f: Formula) -> Tuple[int, str]:
    return (node_count(f), render(f))


def enumerate_formulas(
    signature: Mapping[str, int],
    max_depth: int,
    max_nodes: int,
    n_free: int = 0,
    constants: Sequence[int] = (),
) -> List[Formula]:
    """All formulas within the bounds, modulo the recorded pruning rules.

    Free variables are drawn from v0..v{n_free-1}; quantifiers bind the
    next canonical name inward.
    """
    memo: Dict[Tuple[int, int], List[Formula]] = {}

    def formulas(k: int, d: int) -> List[Formula]:
        if (k, d) in memo:
            return memo[(k, d)]
        terms: List[Term] = [Var(f"v{i}") for i in range(k)]
        terms += [Const(i) for i in constants]
        by_size: Dict[int, List[Formula]] = defaultdict(list)
        for name in sorted(signature):
            arity = signature[name]
            for combo in itertools.product(terms, repeat=arity):
                if 1 + arity <= max_nodes:
                    by_size[1 + arity].append(Atom(name, tuple(combo)))
        if 3 <= max_nodes:
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
                        ka, kb = _formula_key(a), _formula_key(b)
                        if ka < kb:
                            grown.append(And(a, b))
                            grown.append(Or(a, b))
                        grown.append(Implies(a, b))
            for g in quantifiable:
                if node_count(g) == n - 1:
                    grown.append(ForAll(f"v{k}", g))
                    grown.append(Exists(f"v{k}", g))
            by_size[n].extend(grown)
        out: List[Formula] = []
        for n in sorted(by_size):
            out.extend(sorted(by_size[n], key=render))
        memo[(k, d)] = out
        return out

    return formulas(n_free, max_depth)


def enumerate_sentences(
    signature: Mapping[str, int],
    max_depth: int,
    max_nodes: int,
    constants: Sequence[int] = (),
) -> List[Formula]:
    return enumerate_formulas(signature, max_depth, max_nodes, n_free=0, constants=constants)


@dataclass
class TransferReport:
    """Outcome of comparing base truth with ultrapower truth sentence by sentence."""

    pruning: Tuple[str, ...]
    total: int
    agreements: int
    counterexamples: List[str]
    rows: List[Tuple[bool, Verdict, str]]

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def lines(self) -> List[str]:
        out = [f"pruning: {rule}" for rule in self.pruning]
        out.append(f"sentences checked: {self.total}")
        out.append(f"agreements: {self.agreements}")
        out.append(f"counterexamples: {len(self.counterexamples)}")
        for s in self.counterexamples:
            out.append(f"counterexample: {s}")
        for base, star, text in self.rows:
            out.append(f"{'true' if base else 'false'} {star} {text}")
        return out


def transfer_check(
    structure: Structure,
    model: UltrapowerModel,
    depth_bound: int,
    node_bound: int,
    signature: Sequence[str] | None = None,
) -> TransferReport:
    """Check eval_base against eval_star on every sentence within bounds.

    A sub-signature restricts the enumerated language to the named
    relations; equality is always available.
    """
    if signature is None:
        sig = {r.name: r.arity for r in structure.relations}
    else:
        sig = {}
        for name in signature:
            if not structure.has_relation(name):
                raise UnknownRelation(f"unknown relation {name!r}")
            sig[name] = structure.relation(name).arity
    sentences = enumerate_sentences(sig, depth_bound, node_bound)
    rows: List[Tuple[bool, Verdict, str]] = []
    counterexamples: List[str] = []
    agreements = 0
    for s in sentences:
        base = eval_base(structure, s)
        star = eval_star(model, s)
        text = render(s)
        rows.append((base, star, text))
        if base == (star is Verdict.IN):
            agreements += 1
        else:
            counterexamples.append(text)
    return TransferReport(
        pruning=PRUNING_RULES,
        total=len(sentences),
        agreements=agreements,
        counterexamples=counterexamples,
        rows=rows,
    )
