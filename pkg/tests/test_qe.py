import itertools
import random
from fractions import Fraction as F

import pytest

import helpers
from plhsolve import fm, qe, syntax as sx
from plhsolve.errors import MultipleGuards, ResourceLimitExceeded
from plhsolve.laurent import EPS, Laurent
from plhsolve.syntax import And, Atom, Const, Exists, Forall, Leaf, Not, Or, Scaled


def V(i, c=1):
    return Scaled(F(c), i)


def C(x):
    return Const(Laurent(F(x)))


def atom(lhs, op, rhs):
    return sx.normalize_atom(Atom(lhs, op, rhs))


class TestEliminateClause:
    def test_equality_substitution(self):
        # exists x ((1/2)x = y and x < 3)  ->  2y < 3
        clause = [Atom(V(0, F(1, 2)), sx.EQ, V(1)), Atom(V(0), sx.LT, C(3))]
        out = qe.eliminate_exists_clause(clause, 0)
        rng = random.Random(1)
        for _ in range(20):
            y = Laurent(F(rng.randint(-8, 8), rng.randint(1, 3)))
            expected = fm.fm_satisfiable(
                [
                    fm.atom_to_constraint(a)
                    for a in [
                        Atom(V(0, F(1, 2)), sx.EQ, Const(y)),
                        Atom(V(0), sx.LT, C(3)),
                    ]
                ],
                1,
            ).sat
            assert qe.evaluate_qf(out, (None, y)) == expected

    def test_bound_pairing(self):
        # exists x (y < x and x < z)  ->  y < z
        clause = [Atom(V(1), sx.LT, V(0)), Atom(V(0), sx.LT, V(2))]
        out = qe.eliminate_exists_clause(clause, 0)
        assert out == Leaf(atom(V(1), sx.LT, V(2)))
        # brute witness search on a rational grid
        grid = [Laurent(F(n, 2)) for n in range(-4, 5)]
        for y, z in itertools.product(grid, repeat=2):
            has_witness = any(y < x < z for x in grid + [ (y+z).scale(F(1,2)) ])
            assert qe.evaluate_qf(out, (None, y, z)) == has_witness

    def test_false_clause(self):
        assert qe.eliminate_exists_clause([sx.FALSE], 0) == Leaf(sx.FALSE)


class TestEliminateQuantifiers:
    def test_density(self):
        f = Forall(0, Exists(1, Leaf(Atom(V(0), sx.LT, V(1)))))
        assert qe.eliminate_quantifiers(f) == Leaf(sx.TRUE)

    def test_irreflexive(self):
        f = Exists(0, Leaf(Atom(V(0), sx.LT, V(0))))
        assert qe.eliminate_quantifiers(f) == Leaf(sx.FALSE)

    def test_double_substitution(self):
        # exists x (2x = y and x = z)  ->  y = 2z (up to normal form)
        f = Exists(0, And((Leaf(Atom(V(0, 2), sx.EQ, V(1))), Leaf(Atom(V(0), sx.EQ, V(2))))))
        out = qe.eliminate_quantifiers(f)
        rng = random.Random(2)
        for _ in range(25):
            y = Laurent(F(rng.randint(-9, 9), rng.randint(1, 3)))
            z = Laurent(F(rng.randint(-9, 9), rng.randint(1, 3)))
            assert qe.evaluate_qf(out, (None, y, z)) == (y == z.scale(2))

    def test_output_is_positive_and_quantifier_free(self):
        rng = random.Random(3)
        for _ in range(60):
            atoms = helpers.random_atom_set(rng, 3, coeff_pool=(-3, -2, -1, 1, 2, 3))
            body = And(tuple(Leaf(a) for a in atoms))
            if rng.random() < 0.5:
                body = Not(body)
            f = Exists(rng.randrange(3), body)
            out = qe.eliminate_quantifiers(f)
            assert sx.is_positive(out)

    def test_one_block_matches_witness_search(self):
        rng = random.Random(4)
        for _ in range(40):
            atoms = helpers.random_atom_set(
                rng, 3, max_atoms=3, coeff_pool=(-3, -2, -1, 1, 2, 3)
            )
            f = Exists(0, And(tuple(Leaf(a) for a in atoms)))
            out = qe.eliminate_quantifiers(f)
            for _ in range(30):
                y = Laurent(F(rng.randint(-6, 6), rng.randint(1, 2)))
                z = Laurent(F(rng.randint(-6, 6), rng.randint(1, 2)))
                pinned = [
                    fm.atom_to_constraint(a) for a in atoms
                ] + [
                    fm.LinearConstraint.make({1: 1}, sx.EQ, y),
                    fm.LinearConstraint.make({2: 1}, sx.EQ, z),
                ]
                expected = fm.fm_satisfiable(pinned, 3).sat
                assert qe.evaluate_qf(out, (None, y, z)) == expected

    def test_rational_points_agree_with_extension_points(self):
        rng = random.Random(5)
        for _ in range(30):
            atoms = helpers.random_atom_set(rng, 2)
            f = Exists(0, And(tuple(Leaf(a) for a in atoms)))
            out = qe.eliminate_quantifiers(f)
            for _ in range(10):
                q = F(rng.randint(-6, 6), rng.randint(1, 3))
                assert qe.evaluate_qf(out, (None, Laurent(q))) == qe.evaluate_qf(
                    out, (None, Laurent(q) + (EPS - EPS))
                )

    def test_atom_cap(self):
        atoms = tuple(
            Leaf(Atom(V(0), sx.LT, C(i + 1))) for i in range(70)
        )
        with pytest.raises(ResourceLimitExceeded):
            qe.eliminate_quantifiers(Exists(0, And(atoms)))


class TestEvaluation:
    def test_atom_at_point(self):
        assert qe.evaluate_qf(Leaf(atom(V(0), sx.LT, V(1, 2))), (Laurent(1), Laurent(1)))

    def test_tau1_constant(self):
        f = Leaf(atom(V(0), sx.EQ, Const(EPS)))
        assert qe.evaluate_qf(f, (EPS,))

    def test_tariff_guard(self, tariff_language):
        piece = tariff_language["f"].pieces[0]
        point = (Laurent(1), Laurent(1))
        assert all(qe.evaluate_atom(a, point) for a in piece.guard)

    def test_tariff_values(self, tariff_language):
        f = tariff_language["f"]
        assert qe.evaluate_cost(f, (Laurent(1), Laurent(1))) == Laurent(3)
        assert qe.evaluate_cost(f, (Laurent(1), Laurent(3))) == Laurent(F(9, 2))
        assert qe.evaluate_cost(f, (Laurent(-1), Laurent(0))) is qe.INFINITE

    def test_multiple_guards_detected(self):
        overlapping = sx.PlhCostFunction(
            "bad",
            1,
            (
                sx.Piece(V(0), (atom(C(0), sx.LT, V(0)),)),
                sx.Piece(V(0, 2), (atom(C(-1), sx.LT, V(0)),)),
            ),
        )
        with pytest.raises(MultipleGuards):
            qe.evaluate_cost(overlapping, (Laurent(1),))

    def test_objective_absorbs_infinite(self, tariff_language):
        inst = sx.VcspInstance(2, (("f", (0, 1)), ("f", (1, 0))), None)
        value = qe.evaluate_objective(
            inst, tariff_language, (Laurent(1), Laurent(1))
        )
        assert value == Laurent(3) + Laurent(3)
        value = qe.evaluate_objective(
            inst, tariff_language, (Laurent(-1), Laurent(0))
        )
        assert value is qe.INFINITE
