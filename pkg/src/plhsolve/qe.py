"""Quantifier elimination and evaluation for order-and-scaling formulas.

Elimination of one existential quantifier from a conjunction of atoms works
in two stages: if the variable occurs in an equality, solve for it and
substitute everywhere; otherwise every occurrence is in a strict inequality,
the variable's lower and upper bound terms are collected, and the变
conjunction of all lower-vs-upper comparisons replaces it (the classic
pairing step of Fourier-Motzkin, valid over any ordered vector space
extending the rationals because the order is dense and unbounded).

General formulas are handled innermost-first: negations are pushed to atoms
and removed by the order axioms (not(s<t) becomes t<s or s=t, not(s=t)
becomes s<t or t<s), the body is put in disjunctive normal form, and each
clause is eliminated independently.  Outputs are always negation-free.
"""

from __future__ import annotations

import itertools

from . import syntax as sx
from .errors import MultipleGuards, PlhError, ResourceLimitExceeded
from .laurent import Laurent
from .syntax import (
    And,
    Atom,
    BoolAtom,
    Const,
    Exists,
    FALSE,
    Forall,
    Leaf,
    Not,
    Or,
    Scaled,
    TRUE,
)

DEFAULT_MAX_ATOMS = 64


class Infinite:
    """Cost of a point outside every piece; absorbing under addition."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinite"


INFINITE = Infinite()


# --------------------------------------------------------------------------
# evaluation


def evaluate_term(t: sx.Term, point) -> Laurent:
    if isinstance(t, Scaled):
        return point[t.var].scale(t.coeff)
    return t.value


def evaluate_atom(atom, point) -> bool:
    if isinstance(atom, BoolAtom):
        return atom.value
    lhs = evaluate_term(atom.lhs, point)
    rhs = evaluate_term(atom.rhs, point)
    if atom.op == sx.LT:
        return lhs < rhs
    if atom.op == sx.LEQ:
        return lhs <= rhs
    return lhs == rhs


def evaluate_qf(f, point) -> bool:
    if isinstance(f, Leaf):
        return evaluate_atom(f.atom, point)
    if isinstance(f, And):
        return all(evaluate_qf(p, point) for p in f.parts)
    if isinstance(f, Or):
        return any(evaluate_qf(p, point) for p in f.parts)
    if isinstance(f, Not):
        return not evaluate_qf(f.body, point)
    raise PlhError("formula is not quantifier-free: %r" % (f,))


def evaluate_cost(f: sx.PlhCostFunction, point):
    """Value of the unique satisfied piece, or INFINITE.  Two pieces firing
    at once means the language was never validated; that is reported, not
    silently resolved."""
    if len(point) != f.arity:
        raise PlhError("point arity %d != function arity %d" % (len(point), f.arity))
    hit = None
    for piece in f.pieces:
        if all(evaluate_atom(a, point) for a in piece.guard):
            if hit is not None:
                raise MultipleGuards(
                    "pieces of %r overlap at %s" % (f.name, tuple(point))
                )
            hit = piece
    if hit is None:
        return INFINITE
    return evaluate_term(hit.value, point)


def evaluate_objective(inst: sx.VcspInstance, language: sx.Language, assignment):
    """Total instance cost at an assignment; INFINITE absorbs."""
    total = Laurent()
    for name, scope in inst.summands:
        c = evaluate_cost(language[name], tuple(assignment[v] for v in scope))
        if c is INFINITE:
            return INFINITE
        total = total + c
    return total


# --------------------------------------------------------------------------
# negation-free normal forms


def _negate_atom(atom):
    if isinstance(atom, BoolAtom):
        return Leaf(FALSE if atom.value else TRUE)
    if atom.op == sx.LT:
        return Or(
            (
                Leaf(sx.normalize_atom(Atom(atom.rhs, sx.LT, atom.lhs))),
                Leaf(sx.normalize_atom(Atom(atom.lhs, sx.EQ, atom.rhs))),
            )
        )
    if atom.op == sx.EQ:
        return Or(
            (
                Leaf(sx.normalize_atom(Atom(atom.lhs, sx.LT, atom.rhs))),
                Leaf(sx.normalize_atom(Atom(atom.rhs, sx.LT, atom.lhs))),
            )
        )
    raise PlhError("cannot negate internal weak inequality")


def to_positive(f):
    """Push negations down to atoms and remove them; quantifier-free in,
    negation-free out."""
    if isinstance(f, Leaf):
        return f
    if isinstance(f, And):
        return And(tuple(to_positive(p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(to_positive(p) for p in f.parts))
    if isinstance(f, Not):
        return _negate_positive(to_positive(f.body))
    raise PlhError("formula is not quantifier-free: %r" % (f,))


def _negate_positive(f):
    if isinstance(f, Leaf):
        return _negate_atom(f.atom)
    if isinstance(f, And):
        return Or(tuple(_negate_positive(p) for p in f.parts))
    if isinstance(f, Or):
        return And(tuple(_negate_positive(p) for p in f.parts))
    raise PlhError("expected a negation-free formula: %r" % (f,))


def _dnf_clauses(f):
    """Clauses (atom lists) of the disjunctive normal form of a
    negation-free formula.  TRUE conjuncts vanish; FALSE kills a clause."""
    if isinstance(f, Leaf):
        if f.atom is TRUE:
            return [[]]
        if f.atom is FALSE:
            return []
        return [[f.atom]]
    if isinstance(f, Or):
        out = []
        for p in f.parts:
            out.extend(_dnf_clauses(p))
        return out
    if isinstance(f, And):
        clauses = [[]]
        for p in f.parts:
            part_clauses = _dnf_clauses(p)
            clauses = [c + d for c, d in itertools.product(clauses, part_clauses)]
            if not clauses:
                return []
        return clauses
    raise PlhError("expected a negation-free formula: %r" % (f,))


def _count_atoms(f) -> int:
    if isinstance(f, Leaf):
        return 1
    if isinstance(f, (And, Or)):
        return sum(_count_atoms(p) for p in f.parts)
    if isinstance(f, (Not, Exists, Forall)):
        return _count_atoms(f.body)
    raise PlhError("not a formula: %r" % (f,))


# --------------------------------------------------------------------------
# single-quantifier elimination over a conjunction


def _divide_term(t: sx.Term, k) -> sx.Term:
    if isinstance(t, Scaled):
        return Scaled(t.coeff / k, t.var)
    return Const(t.value.scale(1 / k))


def _substitute(atom: Atom, v: int, replacement: sx.Term):
    def sub(t):
        if isinstance(t, Scaled) and t.var == v:
            if isinstance(replacement, Scaled):
                return Scaled(t.coeff * replacement.coeff, replacement.var)
            return Const(replacement.value.scale(t.coeff))
        return t

    return sx.normalize_atom(Atom(sub(atom.lhs), atom.op, sub(atom.rhs)))


def _mentions(atom: Atom, v: int) -> bool:
    return v in sx.atom_vars(atom)


def eliminate_exists_clause(clause, v: int, max_atoms=DEFAULT_MAX_ATOMS):
    """Quantifier-free formula equivalent to exists v . (conjunction of the
    given normalized atoms), over every ordered Q-vector space extending Q."""
    atoms = []
    for a in clause:
        a = sx.normalize_atom(a)
        if a is FALSE:
            return Leaf(FALSE)
        if a is not TRUE:
            atoms.append(a)
    if len(atoms) > max_atoms:
        raise ResourceLimitExceeded(
            "clause has %d atoms, cap is %d" % (len(atoms), max_atoms)
        )
    if not any(_mentions(a, v) for a in atoms):
        return _conj_of(atoms)

    # An equality pins the variable: solve for it and substitute (first such
    # atom in input order, for reproducibility).
    for i, a in enumerate(atoms):
        if a.op != sx.EQ or not _mentions(a, v):
            continue
        lhs, rhs = a.lhs, a.rhs
        lhs_has = isinstance(lhs, Scaled) and lhs.var == v
        rhs_has = isinstance(rhs, Scaled) and rhs.var == v
        if lhs_has and rhs_has:
            # k*v = h*v with k != h forces v = 0.
            replacement: sx.Term = Const(Laurent())
        elif lhs_has:
            replacement = _divide_term(rhs, lhs.coeff)
        else:
            replacement = _divide_term(lhs, rhs.coeff)
        rest = []
        for j, b in enumerate(atoms):
            if j == i:
                continue
            b = _substitute(b, v, replacement) if _mentions(b, v) else b
            if b is FALSE:
                return Leaf(FALSE)
            if b is not TRUE:
                rest.append(b)
        return _conj_of(rest)

    # Only strict inequalities mention the variable: collect bound terms.
    lowers, uppers, rest = [], [], []
    for a in atoms:
        if not _mentions(a, v):
            rest.append(a)
            continue
        lhs, rhs = a.lhs, a.rhs
        lhs_has = isinstance(lhs, Scaled) and lhs.var == v
        rhs_has = isinstance(rhs, Scaled) and rhs.var == v
        if lhs_has and rhs_has:
            # k*v < h*v is a pure sign condition on v.
            if lhs.coeff < rhs.coeff:
                lowers.append(Const(Laurent()))
            else:
                uppers.append(Const(Laurent()))
        elif lhs_has:
            # k*v < t
            bound = _divide_term(rhs, lhs.coeff)
            (uppers if lhs.coeff > 0 else lowers).append(bound)
        else:
            # t < k*v
            bound = _divide_term(lhs, rhs.coeff)
            (lowers if rhs.coeff > 0 else uppers).append(bound)
    for lo, hi in itertools.product(lowers, uppers):
        a = sx.normalize_atom(Atom(lo, sx.LT, hi))
        if a is FALSE:
            return Leaf(FALSE)
        if a is not TRUE:
            rest.append(a)
    return _conj_of(rest)


def _conj_of(atoms):
    if not atoms:
        return Leaf(TRUE)
    if len(atoms) == 1:
        return Leaf(atoms[0])
    return And(tuple(Leaf(a) for a in atoms))


def _simplify_or(parts):
    out = []
    for p in parts:
        if isinstance(p, Leaf) and p.atom is TRUE:
            return Leaf(TRUE)
        if isinstance(p, Leaf) and p.atom is FALSE:
            continue
        out.append(p)
    if not out:
        return Leaf(FALSE)
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def eliminate_quantifiers(f, max_atoms=DEFAULT_MAX_ATOMS):
    """Equivalent quantifier-free, negation-free formula.  Quantifiers are
    removed innermost-first; universal ones via not-exists-not."""
    if _count_atoms(f) > max_atoms:
        raise ResourceLimitExceeded(
            "formula has %d atoms, cap is %d" % (_count_atoms(f), max_atoms)
        )

    def rec(g):
        if isinstance(g, Leaf):
            return g
        if isinstance(g, And):
            return And(tuple(rec(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(rec(p) for p in g.parts))
        if isinstance(g, Not):
            return _negate_positive(rec(g.body))
        if isinstance(g, Exists):
            return _eliminate_exists(g.var, rec(g.body))
        if isinstance(g, Forall):
            return _negate_positive(_eliminate_exists(g.var, _negate_positive(rec(g.body))))
        raise PlhError("not a formula: %r" % (g,))

    def _eliminate_exists(v, body):
        clauses = _dnf_clauses(body)
        return _simplify_or([eliminate_exists_clause(c, v, max_atoms) for c in clauses])

    return rec(f)
