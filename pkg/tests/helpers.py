"""Shared generators and independent oracles for the test suite.

Everything that produces an expected value lives here and goes through a
different code path than the machinery under test: brute-force enumeration,
backtracking search, raw-dictionary Laurent arithmetic, or the
Fourier-Motzkin oracle.
"""

import itertools
from fractions import Fraction

from plhsolve import fm, parser, qe, sampler, syntax as sx
from plhsolve.laurent import Laurent
from plhsolve.syntax import Atom, Const, Scaled

# ---------------------------------------------------------------------------
# random values


def random_fraction(rng, pool=(-3, -2, -1, 1, 2, 3), denominators=(1, 2, 3)):
    return Fraction(rng.choice(pool), rng.choice(denominators))


def random_laurent(rng, lo=-2, hi=4, max_terms=3):
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        e = rng.randint(lo, hi)
        terms[e] = random_fraction(rng)
    return Laurent(terms)


# ---------------------------------------------------------------------------
# Laurent property suites (shared with the acceptance gate)


def run_order_axiom_suite(rng, trials):
    for _ in range(trials):
        a, b, c = (random_laurent(rng) for _ in range(3))
        # totality and antisymmetry
        assert (a < b) + (b < a) + (a == b) == 1
        # transitivity
        x, y, z = sorted([a, b, c])
        assert x <= y <= z and x <= z
    return trials


def run_ring_axiom_suite(rng, trials):
    for _ in range(trials):
        a = random_laurent(rng, -2, 4)
        b = random_laurent(rng, -2, 4)
        c = random_laurent(rng, -2, 4)
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
    return trials


def run_order_compatibility_suite(rng, trials):
    done = 0
    while done < trials:
        a, b, c = (random_laurent(rng) for _ in range(3))
        if a == b:
            continue
        lo, hi = (a, b) if a < b else (b, a)
        assert lo + c < hi + c
        if c.sign() > 0:
            assert lo * c < hi * c
        done += 1
    return done


def run_canonical_form_suite(rng, trials):
    for _ in range(trials):
        a = random_laurent(rng)
        b = random_laurent(rng)
        for value in (a + b, a - b, a * b, -a, abs(b)):
            assert all(c != 0 for _, c in value.terms)
            assert list(value.terms) == sorted(value.terms)
    return trials


def run_embedding_suite(rng, trials):
    for _ in range(trials):
        p = random_fraction(rng)
        q = random_fraction(rng)
        a, b = Laurent(p), Laurent(q)
        assert (a + b).standard_part() == p + q
        assert (a * b).standard_part() == p * q
        assert (a < b) == (p < q)
    return trials


# ---------------------------------------------------------------------------
# random atoms and backtracking searches over sampled domains


def random_atom(rng, num_vars, coeff_pool=(-2, -1, 1, 2), const_pool=(-1, 0, 1, 2)):
    def term():
        if rng.random() < 0.3:
            return Const(Laurent(Fraction(rng.choice(const_pool))))
        return Scaled(Fraction(rng.choice(coeff_pool)), rng.randrange(num_vars))

    while True:
        atom = sx.normalize_atom(
            Atom(term(), rng.choice([sx.LT, sx.EQ]), term())
        )
        if not isinstance(atom, sx.BoolAtom):
            return atom


def random_atom_set(rng, num_vars, max_atoms=3, **kw):
    return [random_atom(rng, num_vars, **kw) for _ in range(rng.randint(1, max_atoms))]


def atoms_to_constraints(atoms):
    return [fm.atom_to_constraint(a) for a in atoms]


def _prepare_domains(atoms, num_vars, elements):
    """Split atoms into ground / unary / binary, pre-filtering per-variable
    domains with the unary ones.  Returns None on a ground contradiction."""
    unary = [[] for _ in range(num_vars)]
    binary = [[] for _ in range(num_vars)]  # keyed by the later variable
    for a in atoms:
        avars = sx.atom_vars(a)
        if not avars:
            if not qe.evaluate_atom(a, ()):
                return None
        elif len(avars) == 1:
            unary[avars[0]].append(a)
        else:
            binary[max(avars)].append((min(avars), a))
    domains = []
    for v in range(num_vars):
        dom = [
            x
            for x in elements
            if all(_eval_at(a, v, x, None, None) for a in unary[v])
        ]
        domains.append(dom)
    return domains, binary


def _eval_at(atom, v, x, w=None, y=None):
    point = {}
    point[v] = x
    if w is not None:
        point[w] = y

    class _P:
        def __getitem__(self, i):
            return point[i]

    return qe.evaluate_atom(atom, _P())


def find_csp_solution_in_sample(atoms, num_vars, sample):
    """Exhaustive backtracking with forward checking for a point of
    sample**num_vars satisfying every atom."""
    prep = _prepare_domains(atoms, num_vars, sample.elements)
    if prep is None:
        return None
    domains, binary = prep
    point = [None] * num_vars

    def rec(k, doms):
        if k == num_vars:
            return tuple(point)
        for x in doms[k]:
            point[k] = x
            nxt = list(doms)
            dead = False
            for j in range(k + 1, num_vars):
                pruned = [
                    y
                    for y in nxt[j]
                    if all(
                        earlier != k or _eval_at(a, k, x, j, y)
                        for earlier, a in binary[j]
                    )
                ]
                if not pruned:
                    dead = True
                    break
                nxt[j] = pruned
            if dead:
                continue
            if all(
                _eval_at(a, earlier, point[earlier], k, x)
                for earlier, a in binary[k]
                if earlier < k
            ):
                hit = rec(k + 1, nxt)
                if hit is not None:
                    return hit
        return None

    # binary atoms between already-assigned pairs are checked on assignment
    # of the later variable; same-variable "binary" atoms cannot occur after
    # normalization collapses them to unary form via atom_vars
    return rec(0, domains)


def find_vcsp_solution_in_sample(atoms, alphas, threshold, num_vars, sample):
    """Backtracking with forward checking for a sampled point satisfying the
    atoms with sum(alphas[i] * x_i) <= threshold."""
    prep = _prepare_domains(atoms, num_vars, sample.elements)
    if prep is None:
        return None
    domains, binary = prep
    u = Laurent(threshold) if not isinstance(threshold, Laurent) else threshold
    point = [None] * num_vars

    def floor_for(doms, k):
        total = Laurent()
        for j in range(k, num_vars):
            total = total + min(x.scale(alphas[j]) for x in doms[j])
        return total

    def rec(k, doms, cost):
        if cost + floor_for(doms, k) > u:
            return None
        if k == num_vars:
            return tuple(point)
        for x in doms[k]:
            point[k] = x
            nxt = list(doms)
            dead = False
            for j in range(k + 1, num_vars):
                pruned = [
                    y
                    for y in nxt[j]
                    if all(
                        earlier != k or _eval_at(a, k, x, j, y)
                        for earlier, a in binary[j]
                    )
                ]
                if not pruned:
                    dead = True
                    break
                nxt[j] = pruned
            if dead:
                continue
            if all(
                _eval_at(a, earlier, point[earlier], k, x)
                for earlier, a in binary[k]
                if earlier < k
            ):
                hit = rec(k + 1, nxt, cost + x.scale(alphas[k]))
                if hit is not None:
                    return hit
        return None

    if any(not d for d in domains):
        return None
    return rec(0, domains, Laurent())


# ---------------------------------------------------------------------------
# independent sample count (raw-dictionary arithmetic, no Laurent class)


def independent_domain_count(atoms, d, regime):
    """|sample| recomputed from the construction's definition with plain
    dictionaries of Fractions standing in for Laurent numbers."""

    def to_map(value):
        return tuple(sorted((e, c) for e, c in value.terms))

    def scale_map(m, q):
        return tuple((e, c * q) for e, c in m if c * q != 0)

    def shift_scale(m, q, shift):
        return tuple(sorted((e + shift, c * q) for e, c in m if c * q != 0))

    def add_maps(a, b):
        acc = {}
        for e, c in itertools.chain(a, b):
            acc[e] = acc.get(e, Fraction(0)) + c
        return tuple(sorted((e, c) for e, c in acc.items() if c != 0))

    def abs_map(m):
        if m and m[0][1] < 0:
            return tuple((e, -c) for e, c in m)
        return m

    atoms = sampler.atom_set(atoms)
    if regime == "vcsp":
        atoms = sampler.augment_for_vcsp(atoms)
        shift = 3
    else:
        shift = 1
    var_ratios = set()
    const_scales = set()
    for a in atoms:
        lhs, rhs = a.lhs, a.rhs
        if isinstance(lhs, Scaled) and isinstance(rhs, Scaled):
            var_ratios.add(lhs.coeff / rhs.coeff)
        elif isinstance(lhs, Scaled):
            const_scales.add(scale_map(to_map(rhs.value), 1 / lhs.coeff))
        elif isinstance(rhs, Scaled):
            const_scales.add(scale_map(to_map(lhs.value), 1 / rhs.coeff))
    ratios = sorted({abs(r) for r in var_ratios})
    scales = {abs_map(k) for k in const_scales}
    scales.add(((0, Fraction(1)),))

    def vectors(count, budget):
        if count == 0:
            yield ()
            return
        for e in range(-budget, budget + 1):
            for rest in vectors(count - 1, budget - abs(e)):
                yield (e,) + rest

    base = set()
    for vec in vectors(len(ratios), d - 1):
        prod = Fraction(1)
        for h, e in zip(ratios, vec):
            prod *= h**e
        for k in scales:
            base.add(scale_map(k, prod))
    spread = set()
    for x in base:
        for n in range(-d, d + 1):
            spread.add(add_maps(x, shift_scale(x, Fraction(n), shift)))
    full = set(spread)
    full.update(tuple((e, -c) for e, c in m) for m in spread)
    full.add(())
    return len(full)


# ---------------------------------------------------------------------------
# known-submodular language pool for randomized optimizer tests


def _parse_lang(text):
    return parser.parse(text, "language")


MAX2 = """
(lang (def max2 2
  (piece (var 0) (and (lt (var 1) (var 0))))
  (piece (var 1) (and (lt (var 0) (var 1))))
  (piece (var 0) (and (eq (var 0) (var 1))))))
"""

MAX3 = """
(lang (def max3 3
  (piece (var 0) (and (lt (var 1) (var 0)) (lt (var 2) (var 0))))
  (piece (var 1) (and (lt (var 0) (var 1)) (lt (var 2) (var 1))))
  (piece (var 2) (and (lt (var 0) (var 2)) (lt (var 1) (var 2))))
  (piece (var 0) (and (eq (var 0) (var 1)) (lt (var 2) (var 0))))
  (piece (var 0) (and (eq (var 0) (var 2)) (lt (var 1) (var 0))))
  (piece (var 1) (and (eq (var 1) (var 2)) (lt (var 0) (var 1))))
  (piece (var 0) (and (eq (var 0) (var 1)) (eq (var 1) (var 2))))))
"""

MINNEG = """
(lang (def minneg 2
  (piece (var 0) (and (lt (var 0) (scale -1 (var 1)))))
  (piece (scale -1 (var 1)) (and (lt (scale -1 (var 1)) (var 0))))
  (piece (var 0) (and (eq (var 0) (scale -1 (var 1)))))))
"""


def submodular_pool(rng):
    """A deterministic pool of known-submodular shapes; value coefficients
    vary freely (they never touch the sampled ratios), guard coefficients
    stay in {-1, 1} so sampled domains stay small."""
    pool = []

    def unary_linear(tag):
        c = random_fraction(rng)
        return _parse_lang(
            "(lang (def u%s 1 (piece (scale %s (var 0)) (and true))))" % (tag, c)
        )["u%s" % tag]

    def unary_interval(tag):
        c = random_fraction(rng)
        a = rng.choice([-2, -1, 0])
        b = rng.choice([1, 2, 3])
        return _parse_lang(
            "(lang (def w%s 1 (piece (scale %s (var 0)) "
            "(and (lt (const %d) (var 0)) (lt (var 0) (const %d))))))"
            % (tag, c, a, b)
        )["w%s" % tag]

    def pin(tag):
        v = rng.choice([-1, 0, 1, 2])
        return _parse_lang(
            "(lang (def p%s 1 (piece (const 0) (and (eq (var 0) (const %d))))))"
            % (tag, v)
        )["p%s" % tag]

    for i in range(3):
        pool.append(unary_linear(i))
        pool.append(unary_interval(i))
    pool.append(pin(0))
    pool.append(_parse_lang(MAX2)["max2"])
    pool.append(_parse_lang(MINNEG)["minneg"])
    pool.append(_parse_lang(MAX3)["max3"])
    return pool


def random_submodular_instance(rng, max_vars=3, max_summands=6):
    pool = submodular_pool(rng)
    num_vars = rng.randint(1, max_vars)
    functions = {}
    summands = []
    ternary_used = False
    for _ in range(rng.randint(1, max_summands)):
        f = rng.choice(pool)
        if f.arity > num_vars + 0 and f.arity > num_vars:
            f = pool[0]
        if f.arity == 3:
            if ternary_used or num_vars < 2:
                f = pool[0]
            else:
                ternary_used = True
        functions[f.name] = f
        scope = tuple(rng.randrange(num_vars) for _ in range(f.arity))
        summands.append((f.name, scope))
    language = sx.Language(functions)
    instance = sx.VcspInstance(num_vars, tuple(summands), None)
    return instance, language


def enumerate_sample_minimum(instance, language, sample):
    """Direct minimum of the instance cost over sample**num_vars, with the
    pure-Python evaluator (no tables)."""
    best = None
    feasible = False
    for point in itertools.product(sample.elements, repeat=instance.num_vars):
        value = qe.evaluate_objective(instance, language, point)
        if value is qe.INFINITE:
            continue
        feasible = True
        if best is None or value < best:
            best = value
    return feasible, best
