"""Formula parsing, Tarski and reduced evaluation, and the transfer checker."""

import itertools
import random

import pytest

from ulab.filters import (
    FactorialTowerOracle,
    FiniteDomain,
    OMEGA,
    PrincipalOracle,
    Verdict,
    make_array,
)
from ulab.index_algebra import (
    SupportedFunction,
    broken_complement_fubini,
    from_dnf,
    fubini_member,
)
from ulab.logic import (
    And,
    Atom,
    Const,
    Equals,
    Exists,
    ForAll,
    FormulaSyntaxError,
    Not,
    UnknownRelation,
    Var,
    enumerate_formulas,
    enumerate_sentences,
    eval_base,
    eval_star,
    eval_star_principal,
    free_vars,
    node_count,
    parse,
    quantifier_depth,
    render,
    skolem_function,
    transfer_check,
    truth_set,
)
from ulab.periodic import PeriodicSet
from ulab.ultrapower import ArityMismatch, HyperElement, Relation, Structure, UltrapowerModel

LE = Relation("R", 2, frozenset((a, b) for a in range(3) for b in range(3) if a <= b))
LT = Relation("R", 2, frozenset((a, b) for a in range(3) for b in range(3) if a < b))
M_LE = Structure((0, 1, 2), (LE,))
M_LT = Structure((0, 1, 2), (LT,))


def principal_model(structure, points, size=3):
    dom = FiniteDomain(size)
    array = make_array([(f"a{i}", dom, PrincipalOracle(dom, p)) for i, p in enumerate(points)])
    return UltrapowerModel(structure, array)


class TestParser:
    def test_quantifier_and_connective_shapes(self):
        f = parse("forall x. x = x")
        assert f == ForAll("x", Equals(Var("x"), Var("x")))
        g = parse("exists x. (R(x, c0) & !R(c0, x))")
        assert g == Exists(
            "x", And(Atom("R", (Var("x"), Const(0))), Not(Atom("R", (Const(0), Var("x")))))
        )

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            parse("forall x. R(x)", signature={"R": 2})

    def test_unknown_relation(self):
        with pytest.raises(UnknownRelation):
            parse("forall x. S(x, x)", signature={"R": 2})

    def test_syntax_error_position(self):
        with pytest.raises(FormulaSyntaxError) as err:
            parse("forall x x = x")
        assert err.value.position == 9

    def test_round_trip_on_rendered_forms(self):
        texts = [
            "forall x. x = x",
            "exists y. (R(y, c1) -> !y = c0)",
            "((P(x) & Q(y)) | !R(x, y))",
            "forall v0. exists v1. (R(v0, v1) & !v0 = v1)",
            "forall s in V1. exists a in V0. a in s",
        ]
        for t in texts:
            f = parse(t)
            assert parse(render(f)) == f

    def test_round_trip_on_enumerated_sentences(self):
        for s in enumerate_sentences({"R": 2, "P": 1}, 2, 7):
            assert parse(render(s)) == s

    def test_precedence(self):
        f = parse("P(x) -> Q(x) -> S(x)")
        assert render(f) == "(P(x) -> (Q(x) -> S(x)))"
        g = parse("P(x) & Q(x) | S(x)")
        assert render(g) == "((P(x) & Q(x)) | S(x))"


class TestNodeMetrics:
    def test_counts(self):
        f = parse("forall x. exists y. R(x, y)")
        assert node_count(f) == 5
        assert quantifier_depth(f) == 2
        g = parse("(R(c0, c1) & !c0 = c1)")
        assert node_count(g) == 8
        assert quantifier_depth(g) == 0

    def test_free_vars(self):
        f = parse("forall x. R(x, y)")
        assert free_vars(f) == frozenset({"y"})


class TestEvalBase:
    def test_identity_sentence(self):
        for structure in (M_LE, M_LT, Structure((0,),)):
            assert eval_base(structure, parse("forall x. x = x")) is True

    def test_le_has_upper_bounds(self):
        assert eval_base(M_LE, parse("forall x. exists y. R(x, y)")) is True

    def test_lt_has_no_maximum(self):
        assert eval_base(M_LT, parse("exists x. forall y. R(x, y)")) is False


def pointwise_truth_set(model, phi, env_functions):
    """Independent Los oracle: enumerate the finite index space pointwise."""
    array = model.array
    labels = array.labels
    sizes = [array.domain_of(l).size for l in labels]
    clauses = []
    for vals in itertools.product(*[range(n) for n in sizes]):
        point = dict(zip(labels, vals))
        valuation = {v: f.eval(point) for v, f in env_functions.items()}
        if eval_base(model.base, phi, valuation):
            clauses.append([(l, frozenset({point[l]})) for l in labels])
    return from_dnf(array, clauses)


class TestEvalStar:
    def test_identity(self):
        m = principal_model(M_LE, (1, 2))
        assert eval_star(m, parse("forall x. x = x")) is Verdict.IN

    def test_free_factorial_tower_coordinate(self):
        array = make_array([("w", OMEGA, FactorialTowerOracle())])
        base = Structure((0, 1), (Relation("P", 1, frozenset({(1,)})),))
        m = UltrapowerModel(base, array)
        f = SupportedFunction.from_guards(
            array, "w", [(PeriodicSet.residues(2, {0}), 1), (PeriodicSet.residues(2, {1}), 0)]
        )
        assert eval_star(m, parse("P(x)"), {"x": HyperElement(f)}) is Verdict.IN

    def test_negation_duality(self):
        m = principal_model(M_LT, (0, 2))
        for s in enumerate_sentences({"R": 2}, 2, 6):
            v = eval_star(m, s)
            vn = eval_star(m, Not(s))
            assert (v is Verdict.IN) == (vn is Verdict.OUT)

    def test_principal_second_path_agreement(self):
        for structure, points in [(M_LE, (1, 2)), (M_LT, (0, 0)), (M_LT, (2,))]:
            m = principal_model(structure, points)
            for s in enumerate_sentences({"R": 2}, 2, 7):
                assert (eval_star(m, s) is Verdict.IN) == eval_star_principal(m, s)

    def test_los_equivalence_exhaustive_small(self):
        # |A| = 1, N = 2, |M| = 2: every function, every formula with one
        # free variable
        base = Structure((0, 1), (Relation("R", 2, frozenset({(0, 1), (1, 1)})),))
        m = principal_model(base, (1,), size=2)
        from ulab.ultrapower import enumerate_functions

        functions = enumerate_functions(m.array, base.universe)
        formulas = enumerate_formulas({"R": 2}, 1, 6, n_free=1)
        assert formulas
        for phi in formulas:
            if free_vars(phi) - {"v0"}:
                continue
            for f in functions:
                star = eval_star(m, phi, {"v0": HyperElement(f)})
                oracle = fubini_member(pointwise_truth_set(m, phi, {"v0": f}))
                assert star == oracle, (render(phi), f)

    def test_los_equivalence_grid(self):
        rng = random.Random(17)
        from ulab.ultrapower import enumerate_functions

        for labels in (1, 2):
            for n in (2, 3):
                for msize in (2, 3):
                    universe = tuple(range(msize))
                    rel = Relation(
                        "R",
                        2,
                        frozenset(
                            t
                            for t in itertools.product(universe, repeat=2)
                            if rng.random() < 0.5
                        ),
                    )
                    base = Structure(universe, (rel,))
                    points = tuple(rng.randrange(n) for _ in range(labels))
                    m = principal_model(base, points, size=n)
                    functions = enumerate_functions(m.array, universe)
                    if len(functions) > 12:
                        functions = functions[:: len(functions) // 12][:12]
                    formulas = enumerate_formulas({"R": 2}, 2, 6, n_free=1)[:40]
                    for phi in formulas:
                        if free_vars(phi) - {"v0"}:
                            continue
                        for f in functions:
                            star = eval_star(m, phi, {"v0": HyperElement(f)})
                            oracle = fubini_member(pointwise_truth_set(m, phi, {"v0": f}))
                            assert star == oracle

    def test_quantifiers_over_a_free_coordinate(self):
        # base ({0,1}, le), one factorial-tower coordinate, x bound to the
        # parity function: truth sets computed by hand
        le2 = Relation("R", 2, frozenset({(0, 0), (0, 1), (1, 1)}))
        base = Structure((0, 1), (le2,))
        array = make_array([("w", OMEGA, FactorialTowerOracle())])
        m = UltrapowerModel(base, array)
        parity = SupportedFunction.from_guards(
            array, "w", [(PeriodicSet.residues(2, {0}), 0), (PeriodicSet.residues(2, {1}), 1)]
        )
        he = HyperElement(parity)
        # forall y. x <= y holds exactly where the parity function is 0: the
        # evens, which the tower accepts
        assert eval_star(m, parse("forall y. R(x, y)"), {"x": he}) is Verdict.IN
        # exists y. y <= x holds everywhere (0 is below everything)
        assert eval_star(m, parse("exists y. R(y, x)"), {"x": he}) is Verdict.IN
        # forall y. y <= x holds exactly on the odds, which the tower rejects
        assert eval_star(m, parse("forall y. R(y, x)"), {"x": he}) is Verdict.OUT
        # negation duality on an open formula with a genuinely free verdict
        assert eval_star(m, parse("!forall y. R(y, x)"), {"x": he}) is Verdict.IN

    def test_skolem_truth_set_equals_union(self):
        m = principal_model(M_LE, (1, 2))
        body = parse("R(v0, v1)")
        env = {"v0": SupportedFunction.constant(m.array, 1)}
        g = skolem_function(m, "v1", body, env)
        via_skolem = truth_set(m, Exists("v1", body), env)
        union = None
        for elem in m.base.universe:
            s = truth_set(m, body, {**env, "v1": SupportedFunction.constant(m.array, elem)})
            union = s if union is None else union | s
        assert via_skolem == union
        # least witness for R(1, v1) with R = "less or equal" is 1
        assert g.eval(m.array.principal_point()) == 1


class TestSentenceEnumeration:
    def test_deterministic_and_bounded(self):
        a = enumerate_sentences({"R": 2}, 2, 7)
        b = enumerate_sentences({"R": 2}, 2, 7)
        assert [render(s) for s in a] == [render(s) for s in b]
        assert all(node_count(s) <= 7 and quantifier_depth(s) <= 2 for s in a)
        assert all(not free_vars(s) for s in a)

    def test_known_members(self):
        rendered = {render(s) for s in enumerate_sentences({"R": 2}, 2, 7)}
        assert "forall v0. exists v1. R(v0, v1)" in rendered
        assert "forall v0. v0 = v0" in rendered
        assert "!exists v0. !v0 = v0" in rendered

    def test_no_duplicates(self):
        sentences = enumerate_sentences({"R": 2, "P": 1}, 2, 7)
        rendered = [render(s) for s in sentences]
        assert len(rendered) == len(set(rendered))


class TestTransferCheck:
    def test_one_point_structure(self):
        one = Structure((0,), (Relation("R", 2, frozenset({((0, 0))})),))
        m = principal_model(one, (0,), size=1)
        report = transfer_check(one, m, 2, 7)
        assert report.ok and report.total > 0

    def test_le_structure_two_labels(self):
        m = principal_model(M_LE, (1, 2))
        report = transfer_check(M_LE, m, 2, 7)
        assert report.ok
        assert report.agreements == report.total

    def test_sub_signature(self):
        two = Structure((0, 1), (LE := Relation("le", 2, frozenset({(0, 0), (0, 1), (1, 1)})),
                                 Relation("odd", 1, frozenset({(1,)}))))
        m = principal_model(two, (0,), size=2)
        full = transfer_check(two, m, 1, 5)
        restricted = transfer_check(two, m, 1, 5, signature=["odd"])
        assert restricted.total < full.total
        assert restricted.ok
        with pytest.raises(UnknownRelation):
            transfer_check(two, m, 1, 5, signature=["missing"])

    def test_report_lines_format(self):
        one = Structure((0,), ())
        m = principal_model(one, (0,), size=1)
        report = transfer_check(one, m, 1, 5)
        lines = report.lines()
        assert any(line.startswith("pruning: ") for line in lines)
        assert any(line.startswith(("true In ", "false Out ")) for line in lines)

    def test_mutation_sensitivity(self):
        m = principal_model(M_LT, (0, 2))
        clean = transfer_check(M_LT, m, 2, 7)
        assert clean.ok
        with broken_complement_fubini():
            mutated = transfer_check(M_LT, UltrapowerModel(M_LT, m.array), 2, 7)
        assert len(mutated.counterexamples) >= 1
