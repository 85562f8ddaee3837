"""Rational-function germs: arithmetic, order, classification, independence."""

import random
from fractions import Fraction

import pytest

from ulab.filters import Verdict, ft_membership
from ulab.germs import (
    Comparison,
    DivisionByZeroGerm,
    Germ,
    GermSyntaxError,
    InfiniteGerm,
    arith,
    classify,
    compare,
    parse_germ,
    standard_part,
)
from ulab.periodic import PeriodicSet

N = Germ.variable()
ONE = Germ.one()
ZERO = Germ.zero()
INV_N1 = ONE / (N + ONE)  # 1/(n+1)


def rand_germ(rng, max_degree=4, max_coeff=9):
    def poly(allow_zero):
        p = [rng.randint(-max_coeff, max_coeff) for _ in range(rng.randint(1, max_degree + 1))]
        if not allow_zero and not any(p):
            p[-1] = 1
        return p

    return Germ(poly(True), poly(False))


def eventual_comparison_oracle(f, g):
    """Evaluate beyond the Cauchy bound of everything involved."""
    n0 = max(f.cauchy_bound(), g.cauchy_bound(), (f - g).cauchy_bound())
    diff = f.eval(n0) - g.eval(n0)
    if diff == 0:
        return Comparison.EQ
    return Comparison.GT if diff > 0 else Comparison.LT


class TestArith:
    def test_additive_inverse(self):
        assert arith("add", INV_N1, arith("neg", INV_N1)).is_zero()

    def test_n_times_reciprocal(self):
        assert arith("mul", N, INV_N1) == Germ((0, 1), (1, 1))

    def test_inv_zero(self):
        with pytest.raises(DivisionByZeroGerm):
            arith("inv", ZERO)

    def test_canonical_lowest_terms(self):
        assert Germ((2, 2), (2,)) == Germ((1, 1))
        assert Germ((0, 1, 1), (0, 1)) == Germ((1, 1))  # (n^2+n)/n = n+1
        g = Germ((1,), (-1, -1))
        assert g.den[-1] > 0 and g.num == (-1,)

    def test_pointwise_agreement_on_cofinite_domain(self):
        rng = random.Random(2)
        for _ in range(100):
            f, g = rand_germ(rng), rand_germ(rng)
            h = f + g
            n0 = max(f.cauchy_bound(), g.cauchy_bound(), h.cauchy_bound())
            for n in range(n0, n0 + 5):
                assert h.eval(n) == f.eval(n) + g.eval(n)
            h = f * g
            n0 = max(n0, h.cauchy_bound())
            for n in range(n0, n0 + 5):
                assert h.eval(n) == f.eval(n) * g.eval(n)


class TestCompare:
    def test_reflexive_eq(self):
        rng = random.Random(3)
        for _ in range(50):
            f = rand_germ(rng)
            assert compare(f, f) is Comparison.EQ

    def test_infinitesimal_positive(self):
        assert compare(INV_N1, ZERO) is Comparison.GT
        assert eventual_comparison_oracle(INV_N1, ZERO) is Comparison.GT

    def test_ratio_below_one(self):
        m = N / (N + ONE)
        assert compare(m, ONE) is Comparison.LT
        assert eventual_comparison_oracle(m, ONE) is Comparison.LT

    def test_oracle_agreement_fuzz(self):
        rng = random.Random(4)
        for _ in range(500):
            f, g = rand_germ(rng), rand_germ(rng)
            assert compare(f, g) is eventual_comparison_oracle(f, g)

    def test_trichotomy(self):
        rng = random.Random(5)
        for _ in range(300):
            f, g = rand_germ(rng), rand_germ(rng)
            verdicts = [compare(f, g), compare(g, f)]
            if f == g:
                assert verdicts == [Comparison.EQ, Comparison.EQ]
            else:
                assert sorted(v.value for v in verdicts) == ["GT", "LT"]

    def test_rational_embedding_is_ordered(self):
        rng = random.Random(6)
        for _ in range(200):
            q1 = Fraction(rng.randint(-30, 30), rng.randint(1, 12))
            q2 = Fraction(rng.randint(-30, 30), rng.randint(1, 12))
            c = compare(Germ.from_fraction(q1), Germ.from_fraction(q2))
            expected = (
                Comparison.EQ if q1 == q2 else Comparison.GT if q1 > q2 else Comparison.LT
            )
            assert c is expected
            assert Germ.from_fraction(q1) + Germ.from_fraction(q2) == Germ.from_fraction(q1 + q2)
            assert Germ.from_fraction(q1) * Germ.from_fraction(q2) == Germ.from_fraction(q1 * q2)


SAMPLED_RADII = [Fraction(10) ** k for k in range(-6, 7)]


def definitional_classify_kind(f):
    """Quantifier criterion over the sampled radii, zero handled by the
    standard-part convention."""
    if f.is_zero():
        return "appreciable"
    absf = f.abs()
    if all(compare(absf, Germ.from_fraction(r)) is Comparison.LT for r in SAMPLED_RADII):
        return "infinitesimal"
    if all(compare(absf, Germ.from_fraction(r)) is Comparison.GT for r in SAMPLED_RADII):
        return "infinite"
    return "appreciable"


class TestClassify:
    def test_canonical_examples(self):
        assert str(classify(INV_N1)) == "Infinitesimal"
        assert str(classify(N * N)) == "Infinite"
        g = parse_germ("(2*n+1)/(n+1)")
        assert str(classify(g)) == "Appreciable(2)"

    def test_degree_criterion_matches_definitional(self):
        rng = random.Random(7)
        for _ in range(400):
            f = rand_germ(rng)
            assert classify(f).kind == definitional_classify_kind(f)

    def test_appreciable_part_is_infinitesimally_close(self):
        rng = random.Random(8)
        for _ in range(200):
            f = rand_germ(rng)
            c = classify(f)
            if c.kind != "appreciable" or f.is_zero():
                continue
            residue = f - Germ.from_fraction(c.value)
            assert classify(residue).kind in ("infinitesimal", "appreciable")
            if classify(residue).kind == "appreciable":
                assert classify(residue).value == 0

    def test_zero_is_appreciable_zero(self):
        c = classify(ZERO)
        assert c.kind == "appreciable" and c.value == 0


class TestStandardPart:
    def test_constant(self):
        assert standard_part(Germ((3,))) == 3

    def test_ratio(self):
        assert standard_part(parse_germ("(2*n+1)/(n+1)")) == 2

    def test_infinite_raises(self):
        with pytest.raises(InfiniteGerm):
            standard_part(N)

    def test_infinitesimal_maps_to_zero(self):
        assert standard_part(INV_N1) == 0


class TestFieldLaws:
    def test_fuzz_triples(self):
        rng = random.Random(9)
        for _ in range(500):
            a, b, c = rand_germ(rng), rand_germ(rng), rand_germ(rng)
            assert a + b == b + a
            assert (a + b) + c == a + (b + c)
            assert a * b == b * a
            assert (a * b) * c == a * (b * c)
            assert a * (b + c) == a * b + a * c
            assert a + ZERO == a and a * ONE == a
            if not a.is_zero():
                assert a * a.inverse() == ONE
            if compare(a, b) is Comparison.LT:
                assert compare(a + c, b + c) is Comparison.LT
            if compare(ZERO, a) is Comparison.LT and compare(ZERO, b) is Comparison.LT:
                assert compare(ZERO, a * b) is Comparison.LT


class TestUltrafilterIndependence:
    def test_comparison_sets_are_finite_or_cofinite(self):
        rng = random.Random(10)
        for _ in range(300):
            f, g = rand_germ(rng), rand_germ(rng)
            if f == g:
                continue
            n0 = max(f.cauchy_bound(), g.cauchy_bound(), (f - g).cauchy_bound())
            eventually_less = compare(f, g) is Comparison.LT

            def defined_and_less(n):
                try:
                    return f.eval(n) < g.eval(n)
                except ZeroDivisionError:
                    return False

            truth_set = PeriodicSet(
                1,
                {0} if eventually_less else set(),
                n0 + 1,
                {n: defined_and_less(n) for n in range(n0 + 1)},
            )
            assert truth_set.is_finite() or truth_set.is_cofinite()
            assert (ft_membership(truth_set) is Verdict.IN) == eventually_less


class TestGermParser:
    def test_round_trip(self):
        rng = random.Random(11)
        for _ in range(200):
            g = rand_germ(rng)
            assert parse_germ(g.render()) == g

    def test_powers(self):
        assert parse_germ("n^3") == N * N * N
        assert parse_germ("2*n**2 - 1") == Germ((-1, 0, 2))

    def test_division_anywhere(self):
        assert parse_germ("1/(n+1) + 1") == parse_germ("(n+2)/(n+1)")

    def test_division_by_zero_polynomial(self):
        with pytest.raises(DivisionByZeroGerm):
            parse_germ("1/(n - n)")

    def test_syntax_errors(self):
        for bad in ["", "n +", "(n", "n^x", "q + 1"]:
            with pytest.raises(GermSyntaxError):
                parse_germ(bad)
