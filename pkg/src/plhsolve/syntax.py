"""ASTs for terms, atoms, formulas, cost functions, and problem instances.

Terms are either a rational multiple of a variable or a Laurent constant;
the signature has no addition, so every atom compares exactly two such
terms.  Cost functions are piecewise: a list of (value term, guard) pieces
whose guards are conjunctions of atoms and must be pairwise disjoint; the
function is +infinity wherever no guard holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import PlhError
from .laurent import Laurent, ZERO, rat

# Exponent window for constants admitted in language definitions.
CONST_WINDOW = (-1, 1)


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Scaled:
    """The term coeff * x_var."""

    coeff: Fraction
    var: int


@dataclass(frozen=True)
class Const:
    """A constant term (rationals are Laurent numbers with support {0})."""

    value: Laurent


Term = Scaled | Const


def const(x) -> Const:
    return Const(x if isinstance(x, Laurent) else Laurent(rat(x)))


def var(i: int, coeff=1) -> Scaled:
    return Scaled(rat(coeff), i)


def term_vars(t: Term):
    return (t.var,) if isinstance(t, Scaled) else ()


# --------------------------------------------------------------------------
# atoms

LT, EQ, LEQ = "lt", "eq", "leq"


@dataclass(frozen=True)
class Atom:
    lhs: Term
    op: str  # lt | eq | leq (leq arises only from weaken())
    rhs: Term


@dataclass(frozen=True)
class BoolAtom:
    value: bool


TRUE = BoolAtom(True)
FALSE = BoolAtom(False)


def _canon_term(t: Term) -> Term:
    # A variable scaled by zero is the constant zero.
    if isinstance(t, Scaled) and not t.coeff:
        return Const(ZERO)
    return t


def _term_negative(t: Term) -> bool:
    if isinstance(t, Scaled):
        return t.coeff < 0
    return t.value.sign() < 0


def _negate_term(t: Term) -> Term:
    if isinstance(t, Scaled):
        return Scaled(-t.coeff, t.var)
    return Const(-t.value)


def normalize_atom(atom):
    """Bring an atom to the canonical form all other modules assume.

    Ground comparisons collapse to TRUE/FALSE, as do trivially (un)satisfiable
    same-variable comparisons with equal coefficients.  When both sides carry
    negative coefficients, both are negated (and the sides of a strict
    inequality swapped) so that never both are negative.  Idempotent.
    """
    if isinstance(atom, BoolAtom):
        return atom
    lhs, rhs = _canon_term(atom.lhs), _canon_term(atom.rhs)
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        if atom.op == LT:
            return TRUE if lhs.value < rhs.value else FALSE
        if atom.op == LEQ:
            return TRUE if lhs.value <= rhs.value else FALSE
        return TRUE if lhs.value == rhs.value else FALSE
    if (
        isinstance(lhs, Scaled)
        and isinstance(rhs, Scaled)
        and lhs.var == rhs.var
        and lhs.coeff == rhs.coeff
    ):
        return FALSE if atom.op == LT else TRUE
    if _term_negative(lhs) and _term_negative(rhs):
        lhs, rhs = _negate_term(lhs), _negate_term(rhs)
        if atom.op in (LT, LEQ):
            lhs, rhs = rhs, lhs
    return Atom(lhs, atom.op, rhs)


def weaken(atom: Atom) -> Atom:
    """The non-strict companion of an atom: < becomes <=, = stays."""
    if isinstance(atom, BoolAtom):
        raise PlhError("cannot weaken a truth constant")
    if atom.op == LT:
        return Atom(atom.lhs, LEQ, atom.rhs)
    return atom


def atom_vars(atom):
    if isinstance(atom, BoolAtom):
        return ()
    return tuple(dict.fromkeys(term_vars(atom.lhs) + term_vars(atom.rhs)))


# --------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Leaf:
    atom: object  # Atom | BoolAtom


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Exists:
    var: int
    body: object


@dataclass(frozen=True)
class Forall:
    var: int
    body: object


def conj(parts) -> object:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts) -> object:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def is_quantifier_free(f) -> bool:
    if isinstance(f, Leaf):
        return True
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(p) for p in f.parts)
    if isinstance(f, Not):
        return is_quantifier_free(f.body)
    return False


def is_positive(f) -> bool:
    """Quantifier-free and containing no negations."""
    if isinstance(f, Leaf):
        return True
    if isinstance(f, (And, Or)):
        return all(is_positive(p) for p in f.parts)
    return False


def formula_atoms(f):
    """All comparison atoms of a formula, in syntactic order, TRUE/FALSE excluded."""
    out = []

    def walk(g):
        if isinstance(g, Leaf):
            if isinstance(g.atom, Atom):
                out.append(g.atom)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body)

    walk(f)
    return out


def formula_vars(f):
    """Free variables of a formula."""
    if isinstance(f, Leaf):
        return set(atom_vars(f.atom))
    if isinstance(f, (And, Or)):
        out = set()
        for p in f.parts:
            out |= formula_vars(p)
        return out
    if isinstance(f, Not):
        return formula_vars(f.body)
    if isinstance(f, (Exists, Forall)):
        return formula_vars(f.body) - {f.var}
    raise PlhError("not a formula: %r" % (f,))


def rename_vars(f, mapping):
    """Substitute variable indices (used for instantiating definitions and
    for alpha-renaming bound variables)."""

    def sub_term(t):
        if isinstance(t, Scaled):
            return Scaled(t.coeff, mapping.get(t.var, t.var))
        return t

    if isinstance(f, Leaf):
        if isinstance(f.atom, BoolAtom):
            return f
        a = f.atom
        return Leaf(Atom(sub_term(a.lhs), a.op, sub_term(a.rhs)))
    if isinstance(f, And):
        return And(tuple(rename_vars(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(rename_vars(p, mapping) for p in f.parts))
    if isinstance(f, Not):
        return Not(rename_vars(f.body, mapping))
    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return type(f)(f.var, rename_vars(f.body, inner))
    raise PlhError("not a formula: %r" % (f,))


def alpha_rename(f, first_fresh: int):
    """Rename every bound variable to a fresh index >= first_fresh so bound
    and free variables never collide."""
    counter = [first_fresh]

    def walk(g):
        if isinstance(g, Leaf):
            return g
        if isinstance(g, And):
            return And(tuple(walk(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p) for p in g.parts))
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, (Exists, Forall)):
            fresh = counter[0]
            counter[0] += 1
            body = walk(rename_vars(g.body, {g.var: fresh}))
            return type(g)(fresh, body)
        raise PlhError("not a formula: %r" % (g,))

    return walk(f)


# --------------------------------------------------------------------------
# cost functions, relations, instances


@dataclass(frozen=True)
class Piece:
    value: Term
    guard: tuple  # tuple of Atom, conjunction semantics; () means always


@dataclass(frozen=True)
class PlhCostFunction:
    name: str
    arity: int
    pieces: tuple  # tuple of Piece

    def guard_atoms(self):
        out = []
        for p in self.pieces:
            out.extend(p.guard)
        return out


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    defn: object  # formula over variables 0..arity-1 (free); may be quantified


@dataclass(frozen=True)
class Language:
    functions: dict  # name -> PlhCostFunction

    def __getitem__(self, name) -> PlhCostFunction:
        return self.functions[name]

    def __iter__(self):
        return iter(self.functions.values())


INF = object()  # threshold marker for "+infinity" (feasibility query)


@dataclass(frozen=True)
class VcspInstance:
    num_vars: int
    summands: tuple  # tuple of (function name, tuple of variable indices)
    threshold: object = None  # Fraction | INF | None


def make_piece(value: Term, guard_atoms) -> Piece:
    """Normalize guard atoms; TRUE conjuncts drop, a FALSE conjunct makes the
    piece vacuous (kept, it simply never fires)."""
    guard = []
    for a in guard_atoms:
        n = normalize_atom(a)
        if n is TRUE:
            continue
        if n is FALSE:
            return Piece(value, (FALSE,))
        guard.append(n)
    return Piece(value, tuple(guard))


def make_function(name: str, arity: int, pieces) -> PlhCostFunction:
    f = PlhCostFunction(name, arity, tuple(pieces))
    validate_function(f)
    return f


def validate_function(f: PlhCostFunction):
    """Structural checks: variable indices in range, constants inside the
    admissible exponent window.  Guard disjointness is a semantic property
    checked separately against the linear-arithmetic oracle."""
    lo, hi = CONST_WINDOW

    def check_term(t, what):
        if isinstance(t, Scaled):
            if not 0 <= t.var < f.arity:
                raise PlhError(
                    "%s of %r uses variable %d outside arity %d"
                    % (what, f.name, t.var, f.arity)
                )
        elif not t.value.fits_window(lo, hi):
            raise PlhError(
                "%s of %r has constant %r outside the exponent window [%d, %d]"
                % (what, f.name, t.value, lo, hi)
            )

    for p in f.pieces:
        check_term(p.value, "value term")
        for a in p.guard:
            if isinstance(a, BoolAtom):
                continue
            check_term(a.lhs, "guard atom")
            check_term(a.rhs, "guard atom")


def validate_instance(inst: VcspInstance, language: Language):
    for name, scope in inst.summands:
        if name not in language.functions:
            raise PlhError("instance applies unknown function %r" % name)
        f = language.functions[name]
        if len(scope) != f.arity:
            raise PlhError(
                "function %r has arity %d but is applied to %d variables"
                % (name, f.arity, len(scope))
            )
        for v in scope:
            if not 0 <= v < inst.num_vars:
                raise PlhError("variable index %d out of range" % v)
