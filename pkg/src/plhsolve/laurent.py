"""Exact arithmetic in the field of finite-support Laurent numbers over Q.

A Laurent number is a finite formal sum ``sum_i a_i * eps**i`` with rational
coefficients ``a_i`` and integer exponents ``i`` (possibly negative), where
``eps`` is a positive infinitesimal: ``0 < eps``, and ``eps < q`` for every
positive rational ``q``.  Consequently ``eps**-1`` is larger than every
rational.  The induced total order is lexicographic on coefficients read in
increasing exponent order.

All coefficients are `fractions.Fraction`; there is no floating point
anywhere.  Values are immutable and hashable.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .errors import InternalCheckFailed, UnboundedValue

__all__ = [
    "Laurent",
    "ZERO",
    "ONE",
    "EPS",
    "rat",
    "concretize_epsilon",
    "order_embedding_ints",
]


def rat(x) -> Fraction:
    """Coerce ints, strings like ``-3/4``, and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class Laurent:
    """Immutable finite-support Laurent number with exact rational coefficients.

    The canonical representation stores only nonzero coefficients, as a tuple
    of ``(exponent, coefficient)`` pairs sorted by exponent.  The empty tuple
    is zero.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        if terms is None:
            self._terms = ()
            return
        if isinstance(terms, Laurent):
            self._terms = terms._terms
            return
        if isinstance(terms, (int, Fraction)):
            c = rat(terms)
            self._terms = ((0, c),) if c else ()
            return
        acc: dict[int, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for exp, coeff in items:
            c = acc.get(exp, Fraction(0)) + rat(coeff)
            if c:
                acc[exp] = c
            else:
                acc.pop(exp, None)
        self._terms = tuple(sorted(acc.items()))

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "Laurent":
        c = rat(coeff)
        out = cls.__new__(cls)
        out._terms = ((exponent, c),) if c else ()
        return out

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self):
        return self._terms

    def coeff(self, exponent: int) -> Fraction:
        for e, c in self._terms:
            if e == exponent:
                return c
        return Fraction(0)

    def support(self):
        return tuple(e for e, _ in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        """True when the support is contained in {0}."""
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == 0)

    def fits_window(self, lo: int, hi: int) -> bool:
        """True iff every exponent with a nonzero coefficient lies in [lo, hi]."""
        return all(lo <= e <= hi for e, _ in self._terms)

    def sign(self) -> int:
        """-1, 0, or 1: the sign of the leading (lowest-exponent) coefficient."""
        if not self._terms:
            return 0
        return 1 if self._terms[0][1] > 0 else -1

    def standard_part(self) -> Fraction:
        """The coefficient at exponent 0, defined only for values with no
        eps**-k component; raises UnboundedValue otherwise."""
        if self._terms and self._terms[0][0] < 0:
            raise UnboundedValue("value %s has a negative-exponent component" % (self,))
        return self.coeff(0)

    def evaluate(self, eps0: Fraction) -> Fraction:
        """Substitute the positive rational ``eps0`` for eps, exactly."""
        e0 = rat(eps0)
        return sum((c * e0**e for e, c in self._terms), Fraction(0))

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Laurent(itertools.chain(self._terms, other._terms))

    __radd__ = __add__

    def __neg__(self):
        out = Laurent.__new__(Laurent)
        out._terms = tuple((e, -c) for e, c in self._terms)
        return out

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc: dict[int, Fraction] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                e = e1 + e2
                c = acc.get(e, Fraction(0)) + c1 * c2
                if c:
                    acc[e] = c
                else:
                    del acc[e]
        out = Laurent.__new__(Laurent)
        out._terms = tuple(sorted(acc.items()))
        return out

    __rmul__ = __mul__

    def scale(self, c) -> "Laurent":
        c = rat(c)
        if not c:
            return ZERO
        out = Laurent.__new__(Laurent)
        out._terms = tuple((e, k * c) for e, k in self._terms)
        return out

    def div_monomial(self, other: "Laurent") -> "Laurent":
        """Divide by a monomial q*eps**k.  General series inversion is
        deliberately unsupported (it would need infinite support)."""
        other = _coerce(other)
        if len(other._terms) != 1:
            raise ZeroDivisionError("division only by nonzero monomials q*eps^k")
        exp, coeff = other._terms[0]
        out = Laurent.__new__(Laurent)
        out._terms = tuple((e - exp, c / coeff) for e, c in self._terms)
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- total lexicographic order -----------------------------------------

    def _cmp(self, other: "Laurent") -> int:
        # Lowest exponent dominates: walk both supports in increasing
        # exponent order, missing coefficients count as zero.
        a, b = self._terms, other._terms
        i = j = 0
        while i < len(a) or j < len(b):
            ea = a[i][0] if i < len(a) else None
            eb = b[j][0] if j < len(b) else None
            if eb is None or (ea is not None and ea < eb):
                return 1 if a[i][1] > 0 else -1
            if ea is None or eb < ea:
                return -1 if b[j][1] > 0 else 1
            if a[i][1] != b[j][1]:
                return 1 if a[i][1] > b[j][1] else -1
            i += 1
            j += 1
        return 0

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) >= 0

    def __repr__(self):
        if not self._terms:
            return "Laurent(0)"
        parts = []
        for e, c in self._terms:
            if e == 0:
                parts.append(str(c))
            elif e == 1:
                parts.append("%s*eps" % c)
            else:
                parts.append("%s*eps^%d" % (c, e))
        return "Laurent(%s)" % " + ".join(parts)


def _coerce(x):
    if isinstance(x, Laurent):
        return x
    if isinstance(x, (int, Fraction)):
        return Laurent(x)
    return NotImplemented


ZERO = Laurent()
ONE = Laurent(1)
EPS = Laurent.monomial(1)


def laurent_compare(a: Laurent, b: Laurent) -> int:
    """-1, 0, or 1 according to the total lexicographic order."""
    return a._cmp(_coerce(b))


def _safe_radius(diff: Laurent) -> Fraction:
    # Below this radius the sign of diff(eps0) matches the sign of the
    # leading coefficient: for 0 < eps0 <= min(radius, 1) every trailing
    # term is dwarfed by the leading one.
    lead = abs(diff.terms[0][1])
    trail = sum((abs(c) for _, c in diff.terms[1:]), Fraction(0))
    return lead / (1 + trail)


def concretize_epsilon(values) -> Fraction:
    """A positive rational eps0 such that substituting eps := eps0 preserves
    every pairwise order relation among the given Laurent numbers.

    The candidate is half the smallest per-pair safe radius (capped at 1);
    correctness is then verified exhaustively on all pairs rather than
    trusted from the analysis.
    """
    vals = list(dict.fromkeys(values))
    eps0 = Fraction(1)
    for a, b in itertools.combinations(vals, 2):
        diff = a - b
        if not diff.is_zero():
            eps0 = min(eps0, _safe_radius(diff))
    eps0 = eps0 / 2
    for a, b in itertools.combinations(vals, 2):
        diff = a - b
        got = diff.evaluate(eps0)
        want = diff.sign()
        if (got > 0) - (got < 0) != want:
            raise InternalCheckFailed(
                "epsilon substitution %s failed to preserve order of %s and %s"
                % (eps0, a, b)
            )
    return eps0


def order_embedding_ints(values, combo_size: int = 1) -> list[int]:
    """Map Laurent numbers to plain integers preserving the order of small
    signed combinations.

    For the returned list ``n_i`` and any signed sum of at most
    ``combo_size`` of the inputs per side, ``sum_I n_i <= sum_J n_j`` holds
    exactly when the corresponding Laurent sums compare the same way.  This
    lets bulk engines (numpy tables) add and compare costs with plain integer
    arithmetic while staying exact.

    The embedding writes each value's coefficients, scaled to a common
    integer denominator, as digits of a number in a base large enough that
    no carry can cross between exponent slots even after ``2 * combo_size``
    additions and subtractions.
    """
    vals = list(values)
    if not vals:
        return []
    denom_lcm = 1
    lo, hi = 0, 0
    max_num = 1
    for v in vals:
        for e, c in v.terms:
            denom_lcm = math.lcm(denom_lcm, c.denominator)
            lo = min(lo, e)
            hi = max(hi, e)
    for v in vals:
        for _, c in v.terms:
            max_num = max(max_num, abs(int(c * denom_lcm)))
    # Any comparison decided here is the sign of a difference of two sums of
    # at most combo_size embedded values, whose digits are bounded by
    # 2 * combo_size * max_num; a base two beyond that bound keeps the
    # leading digit decisive over the whole trailing tail.
    base = 2 * (1 + 2 * combo_size * max_num)
    out = []
    for v in vals:
        n = 0
        for e, c in v.terms:
            n += int(c * denom_lcm) * base ** (hi - e)
        out.append(n)
    return out
