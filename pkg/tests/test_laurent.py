import itertools
import random
from fractions import Fraction as F

import pytest

import helpers
from plhsolve.errors import InternalCheckFailed, UnboundedValue
from plhsolve.laurent import (
    EPS,
    Laurent,
    ONE,
    ZERO,
    concretize_epsilon,
    order_embedding_ints,
)


def L(**kw):
    return Laurent({int(k): F(v) for k, v in kw.items()})


def mono(e, c=1):
    return Laurent.monomial(e, c)


class TestArithmetic:
    def test_add(self):
        a = Laurent({0: 1, 1: 2})  # 1 + 2e
        b = Laurent({0: 3, 1: -1})  # 3 - e
        assert a + b == Laurent({0: 4, 1: 1})

    def test_add_identity(self):
        rng = random.Random(1)
        for _ in range(30):
            x = helpers.random_laurent(rng)
            assert x + ZERO == x

    def test_add_inverse_empty_support(self):
        total = mono(-1) + mono(-1, -1)
        assert total == ZERO
        assert total.terms == ()

    def test_mul_monomials(self):
        assert mono(-1, 2) * mono(2, 3) == mono(1, 6)

    def test_mul_expand(self):
        assert (ONE + EPS) * (ONE - EPS) == Laurent({0: 1, 2: -1})

    def test_mul_unit(self):
        rng = random.Random(2)
        for _ in range(30):
            x = helpers.random_laurent(rng)
            assert x * ONE == x

    def test_div_monomial(self):
        assert mono(1, 6).div_monomial(mono(2, 3)) == mono(-1, 2)
        with pytest.raises(ZeroDivisionError):
            (ONE + EPS).div_monomial(ONE + EPS)


class TestOrder:
    def test_eps_below_one(self):
        assert EPS < ONE

    def test_inverse_eps_dominates_rationals(self):
        assert mono(-1) > Laurent(10**6)

    def test_tie_break_at_higher_exponent(self):
        assert ONE + EPS > ONE

    def test_negative_leading(self):
        assert mono(-1, -1) < Laurent(-(10**6))


class TestStandardPart:
    def test_reads_exponent_zero(self):
        assert (Laurent(3) + mono(3, 5)).standard_part() == 3

    def test_zero(self):
        assert ZERO.standard_part() == 0

    def test_unbounded(self):
        with pytest.raises(UnboundedValue):
            (mono(-1, -2) + ONE).standard_part()


class TestConcretize:
    def test_three_scales(self):
        values = [EPS, ONE, mono(-1)]
        e0 = concretize_epsilon(values)
        assert 0 < e0 < 1 < F(1, 1) / e0

    def test_singleton(self):
        assert concretize_epsilon([ZERO]) > 0

    def test_parallel_perturbations(self):
        e0 = concretize_epsilon([ONE + EPS, ONE + EPS.scale(2)])
        assert 1 + e0 < 1 + 2 * e0

    def test_preserves_order_randomized(self):
        rng = random.Random(3)
        for _ in range(20):
            values = [helpers.random_laurent(rng) for _ in range(5)]
            e0 = concretize_epsilon(values)
            for a, b in itertools.combinations(values, 2):
                da = a.evaluate(e0)
                db = b.evaluate(e0)
                assert (da < db) == (a < b)
                assert (da == db) == (a == b)


class TestEmbedding:
    def test_pairwise_and_combo_order(self):
        rng = random.Random(4)
        vals = [helpers.random_laurent(rng) for _ in range(8)] + [ZERO, ONE, EPS]
        emb = order_embedding_ints(vals, combo_size=2)
        idx = range(len(vals))
        for i, j in itertools.product(idx, idx):
            assert (emb[i] < emb[j]) == (vals[i] < vals[j])
        for i, j, k, l in itertools.product(idx, repeat=4):
            assert (emb[i] + emb[j] <= emb[k] + emb[l]) == (
                vals[i] + vals[j] <= vals[k] + vals[l]
            )


class TestPropertySuites:
    def test_order_axioms(self):
        assert helpers.run_order_axiom_suite(random.Random(10), 200) == 200

    def test_ring_axioms(self):
        assert helpers.run_ring_axiom_suite(random.Random(11), 200) == 200

    def test_order_compatibility(self):
        assert helpers.run_order_compatibility_suite(random.Random(12), 200) == 200

    def test_canonical_form(self):
        assert helpers.run_canonical_form_suite(random.Random(13), 200) == 200

    def test_rational_embedding(self):
        assert helpers.run_embedding_suite(random.Random(14), 200) == 200
