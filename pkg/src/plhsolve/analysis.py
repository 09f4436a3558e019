"""Submodularity certification on grids, and reductions between finite
cost tables and their piecewise extensions.

The submodularity check is exact over its grid but only over its grid: the
report says pass-on-grid, never submodular-over-Q.  Pairs whose right-hand
side is infinite and pairs comparable in the product order satisfy the
inequality by inspection, so only incomparable pairs of finite-cost points
are enumerated; their costs are compared through the exact integer order
embedding so the scan vectorizes.  Any violation the vectorized scan flags
is re-derived with Laurent arithmetic before being reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bulk, limits, qe, sampler, syntax as sx
from .errors import InternalCheckFailed, ResourceLimitExceeded
from .laurent import Laurent, rat
from .syntax import Atom, Const, Scaled

_PAIR_BLOCK_CELLS = 4_000_000


@dataclass(frozen=True)
class SubmodularityReport:
    passed: bool
    pair: tuple | None = None  # (a, b) as tuples of Laurent when violated
    grid_size: int = 0


def default_grid(f: sx.PlhCostFunction) -> sampler.SampleDomain:
    """Instance-free grid for checking a single function: the vcsp sample of
    its own guard atoms with budget twice the arity."""
    return sampler.vcsp_sample(f.guard_atoms(), 2 * f.arity)


def check_submodular(
    f: sx.PlhCostFunction,
    grid: sampler.SampleDomain | None = None,
    max_pairs: int = limits.MAX_PAIR_CHECKS,
) -> SubmodularityReport:
    """Does f(max(x,y)) + f(min(x,y)) <= f(x) + f(y) hold for every pair of
    grid points?  Infinite costs follow the usual convention: the inequality
    fails exactly when both sides of a pair cost finitely but their max or
    min does not, or when the finite sums compare the wrong way."""
    if grid is None:
        grid = default_grid(f)
    witness = _scan_violations(f, grid, max_pairs)
    if witness is None:
        return SubmodularityReport(True, None, len(grid))
    return SubmodularityReport(False, witness, len(grid))


def find_violation_witness(
    f: sx.PlhCostFunction,
    grid: sampler.SampleDomain | None = None,
    max_pairs: int = limits.MAX_PAIR_CHECKS,
):
    """First violating pair in ascending scan order, or None."""
    if grid is None:
        grid = default_grid(f)
    return _scan_violations(f, grid, max_pairs)


def _scan_violations(f, grid, max_pairs):
    n = len(grid)
    arity = f.arity
    if n**arity > limits.MAX_TABLE_CELLS:
        raise ResourceLimitExceeded(
            "grid table for %r needs %d cells" % (f.name, n**arity)
        )
    if arity == 1:
        # Points on a chain are pairwise comparable: {max, min} = {x, y}.
        return None
    tables = bulk.AtomTables(grid.elements)
    finite, slots = bulk.build_slot_tables(f, tables, limits.MAX_TABLE_CELLS)
    finite_flat = finite.ravel()
    slot_flat = [arr.ravel() for _, arr in slots]
    pts = np.argwhere(finite).astype(np.int64)
    m = len(pts)
    if m * m > max_pairs:
        raise ResourceLimitExceeded(
            "%d finite grid points make %d pairs, cap is %d"
            % (m, m * m, max_pairs)
        )
    if m == 0:
        return None
    if n**arity < 2**31:
        pts = pts.astype(np.int32)
    strides = np.array(
        [n ** (arity - 1 - k) for k in range(arity)], dtype=pts.dtype
    )
    pt_idx = pts @ strides
    pt_slots = [s[pt_idx] for s in slot_flat]
    block = max(1, _PAIR_BLOCK_CELLS // max(m, 1))
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        hit = _scan_block(
            pts, pt_slots, finite_flat, slot_flat, strides, i0, i1, m
        )
        if hit is not None:
            return _verify_violation(f, grid, pts[hit[0]], pts[hit[1]])
    return None


def _scan_block(pts, pt_slots, finite_flat, slot_flat, strides, i0, i1, m):
    P = pts[i0:i1, None, :]
    Q = pts[None, i0:, :]
    mn = np.minimum(P, Q)
    mx = np.maximum(P, Q)
    # Only unordered pairs with j > i, and only incomparable ones, can fail:
    # when the points are comparable, {max, min} is {x, y} itself.
    tri = np.arange(i0, m)[None, :] > np.arange(i0, i1)[:, None]
    comparable = (mn == P).all(axis=2) | (mn == Q).all(axis=2)
    interesting = tri & ~comparable
    if not interesting.any():
        return None
    mn_idx = mn @ strides
    mx_idx = mx @ strides
    del mn, mx
    fin = finite_flat[mn_idx] & finite_flat[mx_idx]
    # x, y finite with min or max infinite violates the domain convention.
    bad = interesting & ~fin
    # Otherwise walk the exponent slots: the cost sums differ at the first
    # slot with a nonzero difference, and the pair fails when it is positive.
    tied = interesting & fin
    for s, ps in zip(slot_flat, pt_slots):
        if not tied.any():
            break
        d = (s[mn_idx] + s[mx_idx]) - (ps[i0:i1, None] + ps[None, i0:])
        bad |= tied & (d > 0)
        tied &= d == 0
    if not bad.any():
        return None
    where = np.argwhere(bad)[0]
    return i0 + int(where[0]), i0 + int(where[1])


def _verify_violation(f, grid, ranks_a, ranks_b):
    a = tuple(grid.elements[int(i)] for i in ranks_a)
    b = tuple(grid.elements[int(i)] for i in ranks_b)
    fa, fb = qe.evaluate_cost(f, a), qe.evaluate_cost(f, b)
    mn = tuple(min(x, y) for x, y in zip(a, b))
    mx = tuple(max(x, y) for x, y in zip(a, b))
    fmn, fmx = qe.evaluate_cost(f, mn), qe.evaluate_cost(f, mx)
    if fa is qe.INFINITE or fb is qe.INFINITE:
        raise InternalCheckFailed("flagged pair has an infinite side")
    if fmn is not qe.INFINITE and fmx is not qe.INFINITE and fmn + fmx <= fa + fb:
        raise InternalCheckFailed("vectorized scan flagged a satisfied pair")
    return (a, b)


def rationalize_violation(f: sx.PlhCostFunction, pair):
    """Map a violating pair to rational points that still violate the
    inequality.

    Substituting a small enough rational for eps preserves every guard
    comparison at the four involved points and the order of the two cost
    sums, so the violation survives; this is verified exactly before the
    rational pair is returned.
    """
    from .laurent import concretize_epsilon

    a, b = pair
    mn = tuple(min(x, y) for x, y in zip(a, b))
    mx = tuple(max(x, y) for x, y in zip(a, b))
    points = (a, b, mn, mx)
    anchors = {Laurent(), Laurent(1)}
    for p in points:
        anchors.update(p)
        for piece in f.pieces:
            for atom in piece.guard:
                if isinstance(atom, sx.BoolAtom):
                    continue
                anchors.add(qe.evaluate_term(atom.lhs, p))
                anchors.add(qe.evaluate_term(atom.rhs, p))
    costs = [qe.evaluate_cost(f, p) for p in points]
    if qe.INFINITE not in costs:
        fa, fb, fmn, fmx = costs
        anchors.add(fmn + fmx)
        anchors.add(fa + fb)
    eps0 = concretize_epsilon(anchors)
    ar = tuple(v.evaluate(eps0) for v in a)
    br = tuple(v.evaluate(eps0) for v in b)
    la = tuple(Laurent(x) for x in ar)
    lb = tuple(Laurent(x) for x in br)
    lmn = tuple(min(x, y) for x, y in zip(la, lb))
    lmx = tuple(max(x, y) for x, y in zip(la, lb))
    fa, fb = qe.evaluate_cost(f, la), qe.evaluate_cost(f, lb)
    fmn, fmx = qe.evaluate_cost(f, lmn), qe.evaluate_cost(f, lmx)
    still_violated = (
        fa is not qe.INFINITE
        and fb is not qe.INFINITE
        and (fmn is qe.INFINITE or fmx is qe.INFINITE or fmn + fmx > fa + fb)
    )
    if not still_violated:
        raise InternalCheckFailed("violation did not survive rationalization")
    return ar, br


# --------------------------------------------------------------------------
# finite-domain constructions


def restrict_to_values(name: str, values) -> sx.PlhCostFunction:
    """Unary crisp constraint: cost 0 on the given rationals, +inf elsewhere."""
    pieces = []
    for v in sorted(rat(x) for x in set(values)):
        guard = (sx.normalize_atom(Atom(Scaled(Fraction(1), 0), sx.EQ, Const(Laurent(v)))),)
        pieces.append(sx.Piece(Const(Laurent()), guard))
    return sx.make_function(name, 1, pieces)


def extend_table(name: str, table: dict, domain) -> sx.PlhCostFunction:
    """Piecewise function agreeing with a finite cost table on domain**n and
    +inf elsewhere.  Table keys are tuples of rationals; INFINITE entries
    (or missing keys) stay infinite."""
    domain = sorted(rat(x) for x in set(domain))
    keys = sorted(table.keys())
    if not keys:
        raise ValueError("empty table")
    arity = len(keys[0])
    pieces = []
    for key in keys:
        value = table[key]
        if value is qe.INFINITE:
            continue
        guard = tuple(
            sx.normalize_atom(
                Atom(Scaled(Fraction(1), i), sx.EQ, Const(Laurent(rat(k))))
            )
            for i, k in enumerate(key)
        )
        pieces.append(sx.Piece(Const(Laurent(rat(value))), guard))
    return sx.make_function(name, arity, pieces)


def finite_instance_optimum(instance: sx.VcspInstance, tables: dict, domain):
    """Exhaustive optimum of an instance whose functions are cost tables
    over a finite set of rationals.  Returns (feasible, minimum value)."""
    import itertools

    domain = sorted(rat(x) for x in set(domain))
    best = None
    for point in itertools.product(domain, repeat=instance.num_vars):
        total = Fraction(0)
        ok = True
        for name, scope in instance.summands:
            key = tuple(point[v] for v in scope)
            value = tables[name].get(key, qe.INFINITE)
            if value is qe.INFINITE:
                ok = False
                break
            total += rat(value)
        if ok and (best is None or total < best):
            best = total
    return (best is not None), best


def build_hardness_gadget(
    f: sx.PlhCostFunction,
    witness,
    base_instance: sx.VcspInstance,
    base_tables: dict,
    f_symbol: str,
    chi_name: str = "chi",
):
    """Lift an instance over finite cost tables to the piecewise language.

    witness is a pair of points certifying that f is not submodular; the
    finite set D collects their coordinates.  Every table function becomes
    its piecewise extension, the symbol standing for f's restriction becomes
    f itself, and a membership constraint restricting each variable to D is
    added, so the lifted instance's infimum is finite only at D-valued
    points and equals the finite instance's optimum.

    Returns (instance, language).
    """
    a, b = witness
    domain = sorted(set(rat(x) for x in a) | set(rat(x) for x in b))
    functions = {}
    for name, table in base_tables.items():
        if name == f_symbol:
            continue
        functions[name] = extend_table(name, table, domain)
    if f_symbol in {s for s, _ in base_instance.summands} or f_symbol in base_tables:
        functions[f_symbol] = sx.PlhCostFunction(f_symbol, f.arity, f.pieces)
    if chi_name in functions:
        raise ValueError("chi name %r collides with a base function" % chi_name)
    functions[chi_name] = restrict_to_values(chi_name, domain)
    summands = list(base_instance.summands)
    for v in range(base_instance.num_vars):
        summands.append((chi_name, (v,)))
    instance = sx.VcspInstance(
        base_instance.num_vars, tuple(summands), base_instance.threshold
    )
    language = sx.Language(functions)
    sx.validate_instance(instance, language)
    return instance, language
