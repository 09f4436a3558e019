"""Finite sampling domains for the order-and-scaling constraint solvers.

Given the atoms appearing in a problem's constraints, a finite, symmetric
set of Laurent numbers is built that is guaranteed to contain a solution
whenever one exists (for conjunctions with at most ``d`` distinct variables).
The construction collects the coefficient ratios occurring in the atoms,
closes them under short products, and perturbs each magnitude by small
infinitesimal steps so that strict inequalities between tied magnitudes can
still be realized.

Two regimes exist.  The plain (csp) regime perturbs with ``n*eps`` and its
elements live in exponent window [0, 1].  The optimization (vcsp) regime
first augments the atoms with bounds tying every variable scale to
``eps``/``eps**-1``, perturbs with ``n*eps**3`` so perturbations cannot
collide with the augmented scales, and its elements live in window [-1, 4].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import limits, syntax as sx
from .errors import PlhError, ResourceLimitExceeded
from .laurent import Laurent, ZERO
from .syntax import Atom, Const, Scaled

CSP, VCSP = "csp", "vcsp"

_REGIME_WINDOW = {CSP: (0, 1), VCSP: (-1, 4)}


def atom_set(atoms) -> frozenset:
    """Normalize and deduplicate, dropping truth constants."""
    out = set()
    for a in atoms:
        n = sx.normalize_atom(a)
        if not isinstance(n, sx.BoolAtom):
            out.add(n)
    return frozenset(out)


def ratio_sets(atoms):
    """Coefficient ratios of an atom set.

    Returns (variable_ratios, constant_scales): for an atom comparing
    c1*x_i with c2*x_j the first set gains c1/c2; for an atom comparing a
    variable term with a constant the second set gains constant/coefficient.
    """
    var_ratios: set[Fraction] = set()
    const_scales: set[Laurent] = set()
    for a in atoms:
        if isinstance(a, sx.BoolAtom):
            continue
        lhs, rhs = a.lhs, a.rhs
        if isinstance(lhs, Scaled) and isinstance(rhs, Scaled):
            var_ratios.add(lhs.coeff / rhs.coeff)
        elif isinstance(lhs, Scaled) and isinstance(rhs, Const):
            const_scales.add(rhs.value.scale(1 / lhs.coeff))
        elif isinstance(lhs, Const) and isinstance(rhs, Scaled):
            const_scales.add(lhs.value.scale(1 / rhs.coeff))
        # constant-vs-constant atoms normalize away and cannot occur here
    return var_ratios, const_scales


def _exponent_vectors(count: int, budget: int):
    if count == 0:
        yield ()
        return
    for e in range(-budget, budget + 1):
        for rest in _exponent_vectors(count - 1, budget - abs(e)):
            yield (e,) + rest


def base_magnitudes(atoms, depth: int) -> set:
    """All values |k| * prod |h_i|**e_i with k a constant scale (1 is always
    included), h_i the variable ratios, and sum |e_i| < depth."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    var_ratios, const_scales = ratio_sets(atoms)
    ratios = sorted(abs(h) for h in var_ratios)
    scales = {abs(k) for k in const_scales}
    scales.add(Laurent(1))
    out = set()
    for vec in _exponent_vectors(len(ratios), depth - 1):
        prod = Fraction(1)
        for h, e in zip(ratios, vec):
            prod *= h**e
        for k in scales:
            out.add(k.scale(prod))
    return out


@dataclass(frozen=True)
class SampleDomain:
    elements: tuple  # distinct Laurent numbers, sorted ascending
    atoms: frozenset  # the atom set the domain was built from
    d: int
    regime: str

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def rank(self, value: Laurent) -> int:
        import bisect

        i = bisect.bisect_left(self.elements, value)
        if i < len(self.elements) and self.elements[i] == value:
            return i
        raise KeyError("value %r not in sample" % (value,))

    @property
    def zero_rank(self) -> int:
        return self.rank(ZERO)


def _finish_domain(values, atoms, d, regime, max_size) -> SampleDomain:
    lo, hi = _REGIME_WINDOW[regime]
    full = set(values)
    full.update(-v for v in values)
    full.add(ZERO)
    for v in full:
        if not v.fits_window(lo, hi):
            raise PlhError(
                "sample element %r falls outside exponent window [%d, %d]; "
                "%s-regime atoms admit only the matching constants" % (v, lo, hi, regime)
            )
    elements = tuple(sorted(full))
    if len(elements) > max_size:
        raise ResourceLimitExceeded(
            "sample has %d elements, cap is %d (set PLH_MAX_DOMAIN to raise)"
            % (len(elements), max_size)
        )
    return SampleDomain(elements, frozenset(atoms), d, regime)


def csp_sample(atoms, d: int, max_size=None) -> SampleDomain:
    """Sampling domain for satisfiability questions with at most d variables:
    every base magnitude x is spread into x + n*x*eps for -d <= n <= d, then
    the set is mirrored and zero added."""
    if d < 1:
        raise ValueError("d must be >= 1")
    atoms = atom_set(atoms)
    eps = Laurent.monomial(1)
    spread = set()
    for x in base_magnitudes(atoms, d):
        step = x * eps
        for n in range(-d, d + 1):
            spread.add(x + step.scale(n))
    return _finish_domain(
        spread, atoms, d, CSP, max_size or limits.max_sample_size()
    )


def augment_for_vcsp(atoms) -> frozenset:
    """Add the scale bounds eps < x, x < -eps, -eps**-1 < x, x < eps**-1
    whose ratios anchor the infinitesimal and unbounded magnitudes."""
    eps = Laurent.monomial(1)
    inv = Laurent.monomial(-1)
    x = Scaled(Fraction(1), 0)
    extra = [
        Atom(Const(eps), sx.LT, x),
        Atom(x, sx.LT, Const(-eps)),
        Atom(Const(-inv), sx.LT, x),
        Atom(x, sx.LT, Const(inv)),
    ]
    return atom_set(list(atoms) + extra)


def vcsp_sample(atoms, d: int, max_size=None) -> SampleDomain:
    """Sampling domain for optimization with at most d variables: the atom
    set is augmented with the eps-scale bounds, and the perturbation step is
    eps**3 so that it cannot collide with any augmented magnitude."""
    if d < 1:
        raise ValueError("d must be >= 1")
    atoms = atom_set(atoms)
    augmented = augment_for_vcsp(atoms)
    cube = Laurent.monomial(3)
    spread = set()
    for x in base_magnitudes(augmented, d):
        step = x * cube
        for n in range(-d, d + 1):
            spread.add(x + step.scale(n))
    return _finish_domain(
        spread, atoms, d, VCSP, max_size or limits.max_sample_size()
    )
