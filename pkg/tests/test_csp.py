import itertools
import random
from fractions import Fraction as F

import pytest

import helpers
from plhsolve import csp, qe, sampler, syntax as sx
from plhsolve.errors import NotMaxClosed
from plhsolve.laurent import Laurent
from plhsolve.sampler import SampleDomain


def small_sample(values):
    vals = tuple(sorted(Laurent(F(x)) for x in values))
    return SampleDomain(vals, frozenset(), 1, "csp")


def brute_force_tuples(defn, sample, arity):
    out = set()
    for point in itertools.product(range(len(sample)), repeat=arity):
        values = tuple(sample.elements[i] for i in point)
        if qe.evaluate_qf(defn, values):
            out.add(point)
    return out


class TestInterpretRelation:
    def test_geq_max_counts(self, order_relations):
        defn = csp.positive_definition(order_relations["geqmax"])
        s5 = small_sample([-2, -1, 0, 1, 2])
        rel = csp.interpret_relation(defn, s5, 3, name="geqmax")
        expected = brute_force_tuples(defn, s5, 3)
        assert set(rel.tuples) == expected
        assert len(expected) == sum(k * k for k in range(1, 6))

    def test_false_relation_empty(self):
        s = small_sample([-1, 0, 1])
        rel = csp.interpret_relation(sx.Leaf(sx.FALSE), s, 2, name="none")
        assert rel.tuples == []

    def test_true_unary_full(self):
        s = small_sample([-1, 0, 1])
        rel = csp.interpret_relation(sx.Leaf(sx.TRUE), s, 1, name="all")
        assert len(rel.tuples) == 3

    def test_matches_brute_force_randomized(self):
        rng = random.Random(31)
        s = small_sample([-2, -1, 0, 1, 2])
        for _ in range(25):
            atoms = helpers.random_atom_set(rng, 2)
            defn = sx.And(tuple(sx.Leaf(a) for a in atoms))
            rel = csp.interpret_relation(defn, s, 2, name="r")
            assert set(rel.tuples) == brute_force_tuples(defn, s, 2)


def brute_force_closure_violation(tuples, combine):
    for t, s in itertools.combinations(sorted(tuples), 2):
        u = tuple(combine(a, b) for a, b in zip(t, s))
        if u not in tuples:
            return tuple(sorted((t, s)))
    return None


class TestMaxClosed:
    def test_geq_max_preserved_both(self, order_relations):
        defn = csp.positive_definition(order_relations["geqmax"])
        s5 = small_sample([-2, -1, 0, 1, 2])
        rel = csp.interpret_relation(defn, s5, 3, name="geqmax")
        assert csp.check_max_closed(rel, s5, also_min=True).preserved

    def test_disequality_violation(self):
        s2 = small_sample([0, 1])
        neq = sx.Or(
            (
                sx.Leaf(sx.normalize_atom(sx.Atom(sx.Scaled(F(1), 0), sx.LT, sx.Scaled(F(1), 1)))),
                sx.Leaf(sx.normalize_atom(sx.Atom(sx.Scaled(F(1), 1), sx.LT, sx.Scaled(F(1), 0)))),
            )
        )
        rel = csp.interpret_relation(neq, s2, 2, name="neq")
        report = csp.check_max_closed(rel, s2)
        assert not report.preserved
        assert report.index_pair == ((0, 1), (1, 0))
        assert report.pair == (
            (Laurent(0), Laurent(1)),
            (Laurent(1), Laurent(0)),
        )

    def test_empty_relation_vacuous(self):
        s = small_sample([0, 1])
        rel = csp.interpret_relation(sx.Leaf(sx.FALSE), s, 2, name="none")
        assert csp.check_max_closed(rel, s).preserved

    def test_agrees_with_pairwise_brute_force(self):
        rng = random.Random(32)
        s = small_sample([-1, 0, 1, 2])
        for _ in range(40):
            atoms = helpers.random_atom_set(rng, 2, max_atoms=2)
            defn = sx.Or(tuple(sx.Leaf(a) for a in atoms))
            rel = csp.interpret_relation(defn, s, 2, name="r")
            tuples = set(rel.tuples)
            report = csp.check_max_closed(rel, s)
            expected = brute_force_closure_violation(tuples, max)
            assert report.preserved == (expected is None)
            if not report.preserved:
                # the reported pair must be a genuine violation
                t, u = report.index_pair
                joined = tuple(max(a, b) for a, b in zip(t, u))
                assert t in tuples and u in tuples and joined not in tuples


class TestSolve:
    def test_sat_with_lower_bound(self, order_relations):
        inst = sx.VcspInstance(3, (("geqmax", (0, 1, 2)), ("above1", (1,))), None)
        result = csp.solve_csp(inst, order_relations)
        assert result.sat
        assert csp.qe_decision(inst, order_relations)

    def test_strict_cycle_unsat(self, order_relations):
        inst = sx.VcspInstance(2, (("ltrel", (0, 1)), ("ltrel", (1, 0))), None)
        result = csp.solve_csp(inst, order_relations)
        assert not result.sat
        assert not csp.qe_decision(inst, order_relations)

    def test_doubling_cycle_above_one_unsat(self, order_relations):
        inst = sx.VcspInstance(
            2, (("dbl", (0, 1)), ("dbl", (1, 0)), ("above1", (0,))), None
        )
        result = csp.solve_csp(inst, order_relations)
        assert not result.sat
        assert not csp.qe_decision(inst, order_relations)

    def test_witness_satisfies_all(self, order_relations):
        rng = random.Random(33)
        prepared = {
            name: csp.positive_definition(r) for name, r in order_relations.items()
        }
        for _ in range(30):
            inst = random_csp_instance(rng, order_relations)
            result = csp.solve_csp(inst, order_relations)
            if result.sat:
                for name, scope in inst.summands:
                    point = tuple(result.witness[v] for v in scope)
                    assert qe.evaluate_qf(prepared[name], point)

    def test_rejects_non_max_closed(self):
        neq = sx.Relation(
            "neq",
            2,
            sx.Or(
                (
                    sx.Leaf(sx.normalize_atom(sx.Atom(sx.Scaled(F(1), 0), sx.LT, sx.Scaled(F(1), 1)))),
                    sx.Leaf(sx.normalize_atom(sx.Atom(sx.Scaled(F(1), 1), sx.LT, sx.Scaled(F(1), 0)))),
                )
            ),
        )
        inst = sx.VcspInstance(2, (("neq", (0, 1)),), None)
        with pytest.raises(NotMaxClosed):
            csp.solve_csp(inst, {"neq": neq})

    def test_monotone_under_constraints(self, order_relations):
        rng = random.Random(34)
        for _ in range(20):
            inst = random_csp_instance(rng, order_relations, max_apps=3)
            extended = sx.VcspInstance(
                inst.num_vars,
                inst.summands + random_csp_instance(rng, order_relations, num_vars=inst.num_vars, max_apps=1).summands,
                None,
            )
            if csp.solve_csp(extended, order_relations).sat:
                assert csp.solve_csp(inst, order_relations).sat


def random_csp_instance(rng, relations, num_vars=None, max_apps=4):
    num_vars = num_vars or rng.randint(1, 3)
    names = sorted(relations)
    apps = []
    for _ in range(rng.randint(1, max_apps)):
        name = rng.choice(names)
        arity = relations[name].arity
        apps.append((name, tuple(rng.randrange(num_vars) for _ in range(arity))))
    return sx.VcspInstance(num_vars, tuple(apps), None)


class TestOracleAgreement:
    def test_randomized(self, order_relations):
        rng = random.Random(35)
        for _ in range(50):
            inst = random_csp_instance(rng, order_relations)
            assert csp.solve_csp(inst, order_relations).sat == csp.qe_decision(
                inst, order_relations
            )
