"""The main optimizer over sampled Laurent domains.

An instance is solved by sampling a finite domain from the guard atoms of
the functions it uses (budget: its variable count; the sample never depends
on the threshold), building exact integer-embedded cost tables, and then

- answering threshold queries by depth-first search over assignments with
  guard-consistency pruning and admissible cost bounds,
- computing the infimum by full enumeration, classifying the minimal
  sampled value: a negative eps**-1 coefficient means the cost is unbounded
  below, a purely rational minimum is an attained infimum, and a rational
  plus a positive infinitesimal tail is an unattained infimum equal to its
  rational part.

The classification is cross-checked against the piece-enumeration oracle
whenever the instance is small enough for it; disagreement is a hard error.

The module also exposes the lattice-set reduction: feasible assignments are
encoded as downward-closed subsets of (sample values x variables), turning
componentwise max/min into set union/intersection, with a brute-force
minimizer over that family used to cross-check the direct search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import bulk, fm, limits, qe, sampler, syntax as sx
from .errors import (
    InternalCheckFailed,
    OracleMismatch,
    PlhError,
    ResourceLimitExceeded,
    SubmodularityViolation,
)
from .laurent import Laurent, concretize_epsilon, rat

INFEASIBLE = "infeasible"
MINUS_INFINITY = "minus_infinity"
FINITE = "finite"


@dataclass(frozen=True)
class SolveResult:
    status: str  # infeasible | minus_infinity | finite
    infimum: Laurent | None = None
    attained: bool | None = None
    witness: tuple | None = None  # present iff attained; cost equals infimum
    rational_witness: tuple | None = None


@dataclass(frozen=True)
class ThresholdResult:
    answer: str  # yes | no | infeasible
    witness: tuple | None = None


def sample_for_instance(
    instance: sx.VcspInstance, language: sx.Language, max_size=None
) -> sampler.SampleDomain:
    """Sample from the guard atoms of the functions the instance applies;
    the threshold plays no role here."""
    sx.validate_instance(instance, language)
    atoms = []
    for name in dict.fromkeys(name for name, _ in instance.summands):
        atoms.extend(language[name].guard_atoms())
    return sampler.vcsp_sample(atoms, instance.num_vars, max_size=max_size)


# --------------------------------------------------------------------------
# shared machinery


class _Workspace:
    """Embedded cost tables of one instance over one sample."""

    def __init__(self, instance, language, sample, extra_values=()):
        self.instance = instance
        self.language = language
        self.sample = sample
        self.n = len(sample)
        self.d = instance.num_vars
        if self.n**self.d > limits.MAX_ASSIGNMENTS:
            raise ResourceLimitExceeded(
                "assignment space %d^%d exceeds cap %d"
                % (self.n, self.d, limits.MAX_ASSIGNMENTS)
            )
        functions = [
            language[name]
            for name in dict.fromkeys(name for name, _ in instance.summands)
        ]
        self.atom_tables = bulk.AtomTables(sample.elements)
        self.tables, self.extra_ints = bulk.build_cost_tables(
            functions,
            self.atom_tables,
            combo_size=len(instance.summands) + 1 + len(extra_values),
            extra_values=extra_values,
            max_cells=limits.MAX_TABLE_CELLS,
        )

    def feasibility_mask(self):
        mask = np.ones((self.n,) * self.d, dtype=bool)
        for name, scope in self.instance.summands:
            mask &= bulk.gather(self.tables[name].finite, scope, self.d, self.n)
        return mask

    def total_cost(self):
        """(finite mask, embedded total) over the full assignment space."""
        mask = self.feasibility_mask()
        int64 = all(t.int64 for t in self.tables.values())
        total = np.zeros((self.n,) * self.d, dtype=np.int64 if int64 else object)
        for name, scope in self.instance.summands:
            total = total + bulk.gather(self.tables[name].cost, scope, self.d, self.n)
        return mask, total

    def exact_cost(self, ranks) -> Laurent | object:
        point = [self.sample.elements[i] for i in ranks]
        return qe.evaluate_objective(self.instance, self.language, point)

    def zero_proximal_order(self):
        z = self.sample.zero_rank
        return sorted(range(self.n), key=lambda i: (abs(i - z), i))

    def witness_key(self, ranks):
        z = self.sample.zero_rank
        return tuple((abs(i - z), i) for i in ranks)


def _pick_witness(mask_or_indices, workspace: _Workspace):
    """Deterministic representative: closest to the all-zero assignment,
    ties broken by rank, coordinate by coordinate."""
    best = None
    for ranks in mask_or_indices:
        ranks = tuple(int(i) for i in ranks)
        if best is None or workspace.witness_key(ranks) < workspace.witness_key(best):
            best = ranks
    return best


# --------------------------------------------------------------------------
# threshold decision by depth-first search


def solve_threshold(
    instance: sx.VcspInstance,
    language: sx.Language,
    threshold=None,
    check_submodularity: bool = False,
    rationalize: bool = False,
) -> ThresholdResult:
    """Is there an assignment of finite cost <= threshold?

    The threshold defaults to the instance's own; INF (or None with an
    INF-instance) asks for plain feasibility.  The search is depth-first
    over sampled assignments with two prunes: values whose guards admit no
    finite completion of some summand, and partial assignments whose
    admissible cost bound already exceeds the threshold.  Any witness is
    re-verified with exact Laurent arithmetic before being returned.
    """
    fm.check_language(_used_language(instance, language))
    if check_submodularity:
        _advisory_submodularity_check(instance, language)
    if threshold is None:
        threshold = instance.threshold
    if threshold is None:
        threshold = sx.INF
    sample = sample_for_instance(instance, language)
    feasibility_only = threshold is sx.INF
    extra = () if feasibility_only else (Laurent(rat(threshold)),)
    ws = _Workspace(instance, language, sample, extra_values=extra)

    found = _dfs_search(ws, None if feasibility_only else ws.extra_ints[0])
    if found is not None:
        witness = tuple(sample.elements[i] for i in found)
        cost = ws.exact_cost(found)
        if cost is qe.INFINITE or (
            not feasibility_only and not cost <= Laurent(rat(threshold))
        ):
            raise InternalCheckFailed("threshold witness failed exact re-check")
        if rationalize:
            witness = rationalize_witness(instance, language, witness)
        return ThresholdResult("yes", witness)
    if ws.feasibility_mask().any():
        return ThresholdResult("no")
    return ThresholdResult("infeasible")


def _used_language(instance, language) -> sx.Language:
    names = dict.fromkeys(name for name, _ in instance.summands)
    return sx.Language({name: language[name] for name in names})


def _advisory_submodularity_check(instance, language):
    from . import analysis

    for name in dict.fromkeys(name for name, _ in instance.summands):
        f = language[name]
        report = analysis.check_submodular(f)
        if not report.passed:
            raise SubmodularityViolation(name, report.pair)


class _SummandState:
    """Per-summand marginal tables: for every prefix of the variable order,
    whether a finite completion exists and the least embedded cost of one."""

    __slots__ = ("scope", "distinct", "finite_any", "min_cost", "full")

    def __init__(self, table: bulk.CostTable, scope, d, n):
        arr, distinct = _reduce_table(table, scope, n)
        finite, cost = arr
        self.scope = scope
        self.distinct = distinct
        self.full = (finite, cost)
        big = _padding_value(cost)
        masked = np.where(finite, cost, big)
        self.finite_any = {}
        self.min_cost = {}
        for k in range(d + 1):
            axes = tuple(i for i, v in enumerate(distinct) if v >= k)
            if axes:
                self.finite_any[k] = np.asarray(finite.any(axis=axes))
                self.min_cost[k] = np.asarray(np.minimum.reduce(masked, axis=axes))
            else:
                self.finite_any[k] = finite
                self.min_cost[k] = masked

    def assigned_coords(self, k, assignment):
        return tuple(assignment[v] for v in self.distinct if v < k)


def _reduce_table(table: bulk.CostTable, scope, n):
    distinct = list(dict.fromkeys(scope))
    if len(distinct) == len(scope):
        return (table.finite, table.cost), distinct
    mesh = bulk.open_mesh(n, len(distinct))
    pos = {v: k for k, v in enumerate(distinct)}
    idx = tuple(mesh[pos[v]] for v in scope)
    return (table.finite[idx], table.cost[idx]), distinct


def _padding_value(cost_array):
    if cost_array.dtype == object:
        peak = 1
        for x in cost_array.flat:
            peak = max(peak, abs(int(x)))
        return peak * 4 + 1
    return np.int64(2**62)


def _dfs_search(ws: _Workspace, bound_int):
    """First assignment (in zero-proximal value order) that is feasible and,
    when bound_int is given, has embedded cost <= bound_int."""
    states = [
        _SummandState(ws.tables[name], scope, ws.d, ws.n)
        for name, scope in ws.instance.summands
    ]
    order = ws.zero_proximal_order()
    assignment = [0] * ws.d

    def admissible(k):
        total = 0
        for st in states:
            coords = st.assigned_coords(k, assignment)
            if not st.finite_any[k][coords]:
                return None
            total = total + st.min_cost[k][coords]
        return total

    def rec(k):
        if k == ws.d:
            return tuple(assignment)
        for value in order:
            assignment[k] = value
            total = admissible(k + 1)
            if total is None:
                continue
            if bound_int is not None and total > bound_int:
                continue
            hit = rec(k + 1)
            if hit is not None:
                return hit
        return None

    return rec(0)


# --------------------------------------------------------------------------
# infimum computation and classification


def classify_infimum(
    instance: sx.VcspInstance,
    language: sx.Language,
    cross_check: str = "auto",
    rationalize: bool = False,
) -> SolveResult:
    """Infimum of the instance over the rationals, with attainment.

    The minimum m over all sampled assignments is computed exhaustively and
    read off as follows: a negative coefficient at eps**-1 means assignments
    of arbitrarily negative rational cost exist; a purely rational m is an
    attained infimum; otherwise m is a rational plus a positive
    infinitesimal tail and its rational part is the unattained infimum.

    cross_check: 'auto' verifies against the piece-enumeration oracle when
    its caps allow, 'always' fails if they do not, 'never' skips.
    """
    fm.check_language(_used_language(instance, language))
    sample = sample_for_instance(instance, language)
    ws = _Workspace(instance, language, sample)
    mask, total = ws.total_cost()
    if not mask.any():
        result = SolveResult(INFEASIBLE)
        _maybe_cross_check(instance, language, result, cross_check)
        return result
    flat_mask = mask.ravel()
    flat_total = total.ravel()
    candidates = np.flatnonzero(flat_mask)
    best_int = flat_total[candidates].min()
    minimizers = candidates[np.flatnonzero(flat_total[candidates] == best_int)]
    shape = (ws.n,) * ws.d
    ranks = _pick_witness(
        (np.unravel_index(int(i), shape) for i in minimizers), ws
    )
    m = ws.exact_cost(ranks)
    if m is qe.INFINITE:
        raise InternalCheckFailed("feasible minimizer evaluated to infinity")

    inv_coeff = m.coeff(-1)
    if inv_coeff < 0:
        result = SolveResult(MINUS_INFINITY)
    elif inv_coeff > 0:
        # Unreachable for languages whose guards use rational constants: a
        # feasible guard region transfers to the rationals, where the cost
        # is rational.  Surfacing it beats misclassifying.
        raise InternalCheckFailed(
            "sampled minimum %s has an eps^-1 component; the instance mixes "
            "infinitesimal-scale constants in a way the classifier does not "
            "support" % (m,)
        )
    elif m.is_rational():
        witness = tuple(sample.elements[i] for i in ranks)
        rw = rationalize_witness(instance, language, witness) if rationalize else None
        result = SolveResult(FINITE, m, True, witness, rw)
    else:
        result = SolveResult(FINITE, Laurent(m.standard_part()), False)
    _maybe_cross_check(instance, language, result, cross_check)
    return result


def _maybe_cross_check(instance, language, result: SolveResult, mode: str):
    if mode == "never":
        return
    try:
        oracle = fm.vcsp_oracle(instance, language)
    except ResourceLimitExceeded:
        if mode == "always":
            raise
        return
    ok = (
        (result.status == INFEASIBLE and oracle.status == fm.INFEASIBLE)
        or (result.status == MINUS_INFINITY and oracle.status == fm.MINUS_INFINITY)
        or (
            result.status == FINITE
            and oracle.status == fm.FINITE
            and oracle.value == result.infimum
            and oracle.attained == result.attained
        )
    )
    if not ok:
        raise OracleMismatch(
            "classification %r disagrees with the piece-enumeration oracle %r"
            % (result, oracle)
        )


def rationalize_witness(instance, language, witness) -> tuple:
    """Map a Laurent witness to rationals preserving its piece selection and
    cost.  The substitution point must preserve the order of every guard
    comparison made while evaluating the instance, so those term values join
    the witness and the zero/one anchors in the concretization set."""
    anchor = {Laurent(), Laurent(1)}
    anchor.update(witness)
    for name, scope in instance.summands:
        f = language[name]
        point = tuple(witness[v] for v in scope)
        for piece in f.pieces:
            for atom in piece.guard:
                if isinstance(atom, sx.BoolAtom):
                    continue
                anchor.add(qe.evaluate_term(atom.lhs, point))
                anchor.add(qe.evaluate_term(atom.rhs, point))
    eps0 = concretize_epsilon(anchor)
    rational = tuple(Laurent(v.evaluate(eps0)) for v in witness)
    before = qe.evaluate_objective(instance, language, witness)
    after = qe.evaluate_objective(instance, language, rational)
    if before is qe.INFINITE or after is qe.INFINITE:
        raise InternalCheckFailed("rationalized witness left the feasible region")
    if after != Laurent(before.evaluate(eps0)):
        raise InternalCheckFailed("rationalized witness changed the cost")
    return tuple(v.standard_part() for v in rational)


# --------------------------------------------------------------------------
# componentwise-minimal feasible assignments and the lattice-set encoding


def minimal_feasible_assignment(
    instance: sx.VcspInstance,
    language: sx.Language,
    lower_bounds: dict | None = None,
    sample: sampler.SampleDomain | None = None,
    _mask=None,
):
    """Componentwise-minimal feasible sampled assignment with every
    coordinate v at least lower_bounds[v] (given as sample ranks).  Returns
    a tuple of ranks, or None when no feasible assignment respects the
    bounds.  Each coordinate is the least rank any feasible assignment gives
    that variable, so no single coordinate can be decreased; feasibility of
    their combination (the min-closure property) is asserted."""
    if sample is None:
        sample = sample_for_instance(instance, language)
    if _mask is None:
        ws = _Workspace(instance, language, sample)
        _mask = ws.feasibility_mask()
    mask = _mask
    if lower_bounds:
        n = len(sample)
        for v, bound in lower_bounds.items():
            if isinstance(bound, Laurent):
                bound = sample.rank(bound)
            shape = [1] * instance.num_vars
            shape[v] = n
            mask = mask & (np.arange(n) >= bound).reshape(shape)
    if not mask.any():
        return None
    picks = []
    for v in range(instance.num_vars):
        axes = tuple(a for a in range(instance.num_vars) if a != v)
        along = mask.any(axis=axes) if axes else mask
        picks.append(int(np.flatnonzero(along)[0]))
    picks = tuple(picks)
    if not mask[picks]:
        raise InternalCheckFailed(
            "feasible assignments are not closed under componentwise min; "
            "componentwise-minimal assignment does not exist"
        )
    return picks


@dataclass
class RingFamily:
    """Feasible assignments encoded as downward-closed sets.

    An assignment x maps to {(q, i) : rank q <= x_i}; union and intersection
    of encodings are the encodings of componentwise max and min.  The family
    is represented by its least member and an oracle giving, for any (q, i),
    the least member containing it."""

    instance: sx.VcspInstance
    language: sx.Language
    sample: sampler.SampleDomain
    minimal_set: frozenset

    def __post_init__(self):
        ws = _Workspace(self.instance, self.language, self.sample)
        self._mask = ws.feasibility_mask()
        self._member_cache = {}

    @property
    def num_vars(self):
        return self.instance.num_vars

    def universe(self):
        return [
            (q, i)
            for i in range(self.num_vars)
            for q in range(len(self.sample))
        ]

    def set_for(self, ranks) -> frozenset:
        return frozenset(
            (q, i) for i, r in enumerate(ranks) for q in range(r + 1)
        )

    def assignment_for(self, member: frozenset):
        ranks = [0] * self.num_vars
        for q, i in member:
            ranks[i] = max(ranks[i], q)
        return tuple(ranks)

    def member_containing(self, q: int, i: int):
        """Least family member containing (q, i), or None."""
        key = (q, i)
        if key not in self._member_cache:
            picks = minimal_feasible_assignment(
                self.instance,
                self.language,
                {i: q},
                sample=self.sample,
                _mask=self._mask,
            )
            self._member_cache[key] = None if picks is None else self.set_for(picks)
        return self._member_cache[key]

    def generators(self):
        """Deterministic list: the least member plus every defined least
        member containing a universe point."""
        out = {self.minimal_set}
        for q, i in self.universe():
            m = self.member_containing(q, i)
            if m is not None:
                out.add(m)
        return sorted(out, key=lambda s: (len(s), sorted(s)))


def build_ring_family(
    instance: sx.VcspInstance,
    language: sx.Language,
    sample: sampler.SampleDomain,
) -> RingFamily:
    picks = minimal_feasible_assignment(instance, language, sample=sample)
    if picks is None:
        raise PlhError("instance has no feasible sampled assignment")
    minimal = frozenset((q, i) for i, r in enumerate(picks) for q in range(r + 1))
    return RingFamily(instance, language, sample, minimal)


def sfm_bruteforce(
    family: RingFamily,
    psi,
    max_generators: int = limits.MAX_SFM_GENERATORS,
    max_family: int = limits.MAX_FAMILY_SIZE,
):
    """Exact minimizer of a set function over the closure of the family's
    generators under union and intersection.

    Only additions and comparisons of psi-values are ever performed, so any
    totally ordered value type works.  Ties break toward the member whose
    assignment is lexicographically least in sample ranks.
    """
    generators = family.generators()
    if len(generators) > max_generators:
        raise ResourceLimitExceeded(
            "%d generators exceed the cap %d" % (len(generators), max_generators)
        )
    members = set(generators)
    queue = list(generators)
    while queue:
        new = []
        for a, b in itertools.product(queue, members):
            for c in (a | b, a & b):
                if c not in members:
                    members.add(c)
                    new.append(c)
                    if len(members) > max_family:
                        raise ResourceLimitExceeded(
                            "family closure exceeds %d members" % max_family
                        )
        queue = new
    best_set = None
    best_value = None
    best_key = None
    for member in members:
        value = psi(member)
        key = family.assignment_for(member)
        if (
            best_value is None
            or value < best_value
            or (value == best_value and key < best_key)
        ):
            best_set, best_value, best_key = member, value, key
    return best_set, best_value


def instance_psi(family: RingFamily):
    """The instance cost as a set function through the encoding."""

    def psi(member):
        ranks = family.assignment_for(member)
        point = [family.sample.elements[i] for i in ranks]
        value = qe.evaluate_objective(family.instance, family.language, point)
        if value is qe.INFINITE:
            raise PlhError("set function queried outside the feasible family")
        return value

    return psi
