"""Ground-truth linear-arithmetic decisions by Fourier-Motzkin elimination.

Everything here is deliberately exponential and exact: this module is the
independent oracle the samplers and solvers are tested against, not a
production LP solver.  Constraints are sparse rational linear forms compared
against Laurent bounds, so systems mixing rationals with infinitesimal
constants are decided in the same code path.

Equalities are removed by Gaussian substitution first (keeping witnesses
exact and avoiding the usual two-inequality split); the remaining strict and
weak inequalities are projected variable by variable, and a witness is
rebuilt by back-substitution through the recorded bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import syntax as sx
from .errors import InternalCheckFailed, PlhError, ResourceLimitExceeded
from .laurent import Laurent, rat
from .syntax import Const, Scaled

LT, LEQ, EQ = sx.LT, sx.LEQ, sx.EQ


@dataclass(frozen=True)
class LinearConstraint:
    """sum(coeffs[i] * x_i) op bound, with rational coefficients and a
    Laurent bound.  No nonzero coefficient means a ground comparison."""

    coeffs: tuple  # sorted tuple of (var, Fraction), all coefficients nonzero
    op: str  # lt | leq | eq
    bound: Laurent

    @classmethod
    def make(cls, coeffs, op, bound) -> "LinearConstraint":
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        acc = {}
        for v, c in items:
            c = acc.get(v, Fraction(0)) + rat(c)
            if c:
                acc[v] = c
            else:
                acc.pop(v, None)
        if not isinstance(bound, Laurent):
            bound = Laurent(rat(bound))
        return cls(tuple(sorted(acc.items())), op, bound)

    def coeff_map(self) -> dict:
        return dict(self.coeffs)

    def is_ground(self) -> bool:
        return not self.coeffs

    def ground_holds(self) -> bool:
        zero = Laurent()
        if self.op == LT:
            return zero < self.bound
        if self.op == LEQ:
            return zero <= self.bound
        return zero == self.bound

    def holds_at(self, point) -> bool:
        lhs = Laurent()
        for v, c in self.coeffs:
            lhs = lhs + point[v].scale(c)
        if self.op == LT:
            return lhs < self.bound
        if self.op == LEQ:
            return lhs <= self.bound
        return lhs == self.bound


def atom_to_constraint(atom: sx.Atom, scope=None) -> LinearConstraint:
    """Translate ``lhs op rhs`` into ``lhs - rhs op 0`` form.  ``scope`` maps
    the atom's formal variable indices to instance variables; repeated
    variables in a scope accumulate coefficients."""
    coeffs: dict[int, Fraction] = {}
    bound = Laurent()

    def add(term, sign):
        nonlocal bound
        if isinstance(term, Scaled):
            v = term.var if scope is None else scope[term.var]
            coeffs[v] = coeffs.get(v, Fraction(0)) + sign * term.coeff
        else:
            bound = bound - term.value.scale(sign)

    add(atom.lhs, 1)
    add(atom.rhs, -1)
    return LinearConstraint.make(coeffs, atom.op, bound)


# --------------------------------------------------------------------------
# elimination engine


@dataclass(frozen=True)
class SatResult:
    sat: bool
    witness: tuple | None  # tuple of Laurent, length nvars, when sat


def _split(constraint, v):
    """Isolate x_v: returns ('lower'|'upper', residual coeffs, residual bound,
    strict).  A lower bound means expr < x_v (or <=)."""
    cmap = constraint.coeff_map()
    cv = cmap.pop(v)
    # sum(c x) op b  <=>  cv * x_v op b - sum_other  <=>  x_v op' (b - sum)/cv
    residual = tuple((w, -c / cv) for w, c in sorted(cmap.items()))
    bound = constraint.bound.scale(Fraction(1, 1) / cv)
    strict = constraint.op == LT
    side = "upper" if cv > 0 else "lower"
    return side, residual, bound, strict


def _combine(lo, up):
    """The comparison lower-expr (<, <=) upper-expr as a new constraint."""
    _, lo_coeffs, lo_bound, lo_strict = lo
    _, up_coeffs, up_bound, up_strict = up
    coeffs = dict(lo_coeffs)
    for w, c in up_coeffs:
        coeffs[w] = coeffs.get(w, Fraction(0)) - c
    op = LT if (lo_strict or up_strict) else LEQ
    return LinearConstraint.make(coeffs, op, up_bound - lo_bound)


def _gauss_eliminate(constraints, protect):
    """Substitute away every equality that touches an unprotected variable.
    Returns (inequality constraints, substitution stack) or None when a
    ground contradiction surfaces."""
    work = list(constraints)
    subs = []  # (var, residual coeffs tuple, residual bound) meaning x = expr
    while True:
        pivot_idx = None
        pivot_var = None
        for i, c in enumerate(work):
            if c.op != EQ:
                continue
            candidates = [v for v, _ in c.coeffs if v not in protect]
            if candidates:
                pivot_idx, pivot_var = i, min(candidates)
                break
        if pivot_idx is None:
            break
        c = work.pop(pivot_idx)
        cmap = c.coeff_map()
        cv = cmap.pop(pivot_var)
        expr_coeffs = tuple((w, -k / cv) for w, k in sorted(cmap.items()))
        expr_bound = c.bound.scale(Fraction(1, 1) / cv)
        subs.append((pivot_var, expr_coeffs, expr_bound))
        next_work = []
        for d in work:
            dmap = d.coeff_map()
            dv = dmap.pop(pivot_var, None)
            if dv is None:
                next_work.append(d)
                continue
            for w, k in expr_coeffs:
                dmap[w] = dmap.get(w, Fraction(0)) + dv * k
            new = LinearConstraint.make(dmap, d.op, d.bound - expr_bound.scale(dv))
            next_work.append(new)
        work = next_work
    out = []
    for c in work:
        if c.is_ground():
            if not c.ground_holds():
                return None
            continue
        if c.op == EQ:
            # Equality purely on protected variables: split into two bounds.
            out.append(LinearConstraint(c.coeffs, LEQ, c.bound))
            neg = tuple((v, -k) for v, k in c.coeffs)
            out.append(LinearConstraint(neg, LEQ, -c.bound))
        else:
            out.append(c)
    return out, subs


def _fm_project(constraints, order):
    """Fourier-Motzkin projection.  Returns (residual constraints, bound
    records per eliminated variable) or None on a ground contradiction."""
    work = list(constraints)
    records = []
    for v in order:
        lowers, uppers, rest = [], [], []
        for c in work:
            if any(w == v for w, _ in c.coeffs):
                part = _split(c, v)
                (lowers if part[0] == "lower" else uppers).append(part)
            else:
                rest.append(c)
        records.append((v, lowers, uppers))
        for lo, up in itertools.product(lowers, uppers):
            c = _combine(lo, up)
            if c.is_ground():
                if not c.ground_holds():
                    return None
                continue
            rest.append(c)
        work = rest
    for c in work:
        if c.is_ground():
            if not c.ground_holds():
                return None
    return [c for c in work if not c.is_ground()], records


def _eval_affine(coeffs, bound, point):
    out = bound
    for w, c in coeffs:
        out = out + point[w].scale(c)
    return out


def _pick_value(lowers, uppers, point):
    """Back-substitution rule: midpoint between the binding bounds, one step
    beyond a single bound, zero when unconstrained."""
    lo_val = lo_strict = None
    for _, coeffs, bound, strict in lowers:
        val = _eval_affine(coeffs, bound, point)
        if lo_val is None or val > lo_val:
            lo_val, lo_strict = val, strict
        elif val == lo_val and strict:
            lo_strict = True
    up_val = up_strict = None
    for _, coeffs, bound, strict in uppers:
        val = _eval_affine(coeffs, bound, point)
        if up_val is None or val < up_val:
            up_val, up_strict = val, strict
        elif val == up_val and strict:
            up_strict = True
    if lo_val is None and up_val is None:
        return Laurent()
    if up_val is None:
        return lo_val + 1
    if lo_val is None:
        return up_val - 1
    if lo_val > up_val or (lo_val == up_val and (lo_strict or up_strict)):
        raise InternalCheckFailed("empty interval surfaced during back-substitution")
    return (lo_val + up_val).scale(Fraction(1, 2))


def fm_satisfiable(constraints, nvars: int, order=None) -> SatResult:
    """Exact satisfiability over any ordered Q-vector space extending Q
    (rationals, or Laurent numbers when infinitesimal bounds appear).  On
    success the returned witness is checked against every input constraint
    before being handed back."""
    ground_bad = any(c.is_ground() and not c.ground_holds() for c in constraints)
    if ground_bad:
        return SatResult(False, None)
    live = [c for c in constraints if not c.is_ground()]
    gauss = _gauss_eliminate(live, protect=frozenset())
    if gauss is None:
        return SatResult(False, None)
    inequalities, subs = gauss
    if order is None:
        order = range(nvars)
    substituted = {v for v, _, _ in subs}
    order = [v for v in order if v not in substituted]
    projected = _fm_project(inequalities, order)
    if projected is None:
        return SatResult(False, None)
    residual, records = projected
    if residual:
        raise InternalCheckFailed("projection left non-ground constraints behind")
    point = [Laurent() for _ in range(nvars)]
    for v, lowers, uppers in reversed(records):
        point[v] = _pick_value(lowers, uppers, point)
    for v, coeffs, bound in reversed(subs):
        point[v] = _eval_affine(coeffs, bound, point)
    witness = tuple(point)
    for c in constraints:
        if not c.holds_at(witness):
            raise InternalCheckFailed("witness fails constraint %r" % (c,))
    return SatResult(True, witness)


# --------------------------------------------------------------------------
# linear infimum


INFEASIBLE = "infeasible"
MINUS_INFINITY = "minus_infinity"
FINITE = "finite"


@dataclass(frozen=True)
class InfimumResult:
    status: str  # infeasible | minus_infinity | finite
    value: Laurent | None = None
    attained: bool | None = None


def linear_infimum(objective, constraints, nvars: int) -> InfimumResult:
    """Infimum of sum(objective[i] * x_i) subject to the constraints.

    A fresh variable t is equated with the objective, every original
    variable is eliminated, and the infimum of t is read off the residual
    one-variable system; the infimum is attained exactly when the binding
    lower bound on t is weak.
    """
    if not fm_satisfiable(constraints, nvars).sat:
        return InfimumResult(INFEASIBLE)
    t = nvars
    obj = {v: rat(c) for v, c in objective.items() if rat(c)}
    obj[t] = Fraction(-1)
    system = list(constraints) + [LinearConstraint.make(obj, EQ, Laurent())]
    gauss = _gauss_eliminate(
        [c for c in system if not c.is_ground()], protect=frozenset({t})
    )
    if gauss is None:
        raise InternalCheckFailed("feasible system became contradictory")
    inequalities, subs = gauss
    substituted = {v for v, _, _ in subs}
    order = [v for v in range(nvars) if v not in substituted]
    projected = _fm_project(inequalities, order)
    if projected is None:
        raise InternalCheckFailed("feasible system became contradictory")
    residual, _ = projected
    lo_val = lo_strict = None
    up_val = up_strict = None
    for c in residual:
        side, coeffs, bound, strict = _split(c, t)
        if coeffs:
            raise InternalCheckFailed("residual bound still mentions a variable")
        if side == "lower":
            if lo_val is None or bound > lo_val:
                lo_val, lo_strict = bound, strict
            elif bound == lo_val and strict:
                lo_strict = True
        else:
            if up_val is None or bound < up_val:
                up_val, up_strict = bound, strict
            elif bound == up_val and strict:
                up_strict = True
    if lo_val is None:
        return InfimumResult(MINUS_INFINITY)
    if up_val is not None and (
        lo_val > up_val or (lo_val == up_val and (lo_strict or up_strict))
    ):
        raise InternalCheckFailed("feasible system with empty objective range")
    return InfimumResult(FINITE, lo_val, not lo_strict)


# --------------------------------------------------------------------------
# whole-instance oracle by piece enumeration


DEFAULT_MAX_SUMMANDS = 12
DEFAULT_MAX_SELECTIONS = 200_000


def vcsp_oracle(
    instance: sx.VcspInstance,
    language: sx.Language,
    max_summands: int = DEFAULT_MAX_SUMMANDS,
    max_selections: int = DEFAULT_MAX_SELECTIONS,
) -> InfimumResult:
    """Infimum of an instance by exhaustive piece selection.

    For every way of choosing one piece per summand, the conjunction of the
    chosen guards is a linear system and the objective restricted to it is
    linear; the instance infimum is the best of the per-selection infima,
    attained exactly when some selection achieving it attains its own.
    """
    sx.validate_instance(instance, language)
    if len(instance.summands) > max_summands:
        raise ResourceLimitExceeded(
            "oracle capped at %d summands, instance has %d"
            % (max_summands, len(instance.summands))
        )
    piece_lists = [language[name].pieces for name, _ in instance.summands]
    total = 1
    for pl in piece_lists:
        total *= max(len(pl), 1)
    if total > max_selections:
        raise ResourceLimitExceeded(
            "oracle capped at %d piece selections, instance needs %d"
            % (max_selections, total)
        )
    best: Laurent | None = None
    best_attained = False
    feasible = False
    for selection in itertools.product(*piece_lists):
        constraints = []
        objective: dict[int, Fraction] = {}
        offset = Laurent()
        contradiction = False
        for (name, scope), piece in zip(instance.summands, selection):
            for a in piece.guard:
                if a is sx.TRUE:
                    continue
                if a is sx.FALSE:
                    contradiction = True
                    break
                c = atom_to_constraint(a, scope)
                if c.is_ground():
                    if not c.ground_holds():
                        contradiction = True
                        break
                else:
                    constraints.append(c)
            if contradiction:
                break
            value = piece.value
            if isinstance(value, Scaled):
                v = scope[value.var]
                objective[v] = objective.get(v, Fraction(0)) + value.coeff
            else:
                offset = offset + value.value
        if contradiction:
            continue
        res = linear_infimum(objective, constraints, instance.num_vars)
        if res.status == INFEASIBLE:
            continue
        feasible = True
        if res.status == MINUS_INFINITY:
            return InfimumResult(MINUS_INFINITY)
        value = res.value + offset
        if best is None or value < best:
            best, best_attained = value, res.attained
        elif value == best and res.attained:
            best_attained = True
    if not feasible:
        return InfimumResult(INFEASIBLE)
    return InfimumResult(FINITE, best, best_attained)


def oracle_threshold(result: InfimumResult, threshold) -> bool:
    """Does some assignment have finite cost <= threshold?  (threshold INF
    degenerates to feasibility.)"""
    if result.status == INFEASIBLE:
        return False
    if threshold is sx.INF:
        return True
    if result.status == MINUS_INFINITY:
        return True
    u = Laurent(rat(threshold))
    return result.value < u or (result.value == u and result.attained)


# --------------------------------------------------------------------------
# guard disjointness (the semantic half of language validation)


def overlapping_pieces(f: sx.PlhCostFunction):
    """First pair of pieces whose guards are simultaneously satisfiable, or
    None when all guards are pairwise disjoint."""
    for (i, p), (j, q) in itertools.combinations(enumerate(f.pieces), 2):
        constraints = []
        contradiction = False
        for a in itertools.chain(p.guard, q.guard):
            if a is sx.TRUE:
                continue
            if a is sx.FALSE:
                contradiction = True
                break
            c = atom_to_constraint(a)
            if c.is_ground():
                if not c.ground_holds():
                    contradiction = True
                    break
            else:
                constraints.append(c)
        if contradiction:
            continue
        if fm_satisfiable(constraints, f.arity).sat:
            return i, j
    return None


_verified_disjoint: set = set()


def check_disjoint_guards(f: sx.PlhCostFunction):
    if f in _verified_disjoint:
        return
    pair = overlapping_pieces(f)
    if pair is not None:
        raise PlhError(
            "pieces %d and %d of %r overlap; piece guards must be disjoint"
            % (pair[0], pair[1], f.name)
        )
    _verified_disjoint.add(f)


def check_language(language: sx.Language):
    for f in language:
        check_disjoint_guards(f)
