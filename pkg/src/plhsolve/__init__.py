"""Exact CSP/VCSP solvers for piecewise-linear-homogeneous cost functions.

The toolkit decides satisfiability of order-and-scaling constraints over the
rationals and optimizes sums of piecewise cost functions, by reduction to
finite sampled domains over an infinitesimal extension field.  Everything is
exact rational/Laurent arithmetic; an independent Fourier-Motzkin oracle
cross-checks the sampled pipeline.
"""

from .errors import (
    InternalCheckFailed,
    MultipleGuards,
    NotMaxClosed,
    OracleMismatch,
    ParseError,
    PlhError,
    ResourceLimitExceeded,
    SubmodularityViolation,
    UnboundedValue,
)
from .laurent import EPS, ONE, ZERO, Laurent, concretize_epsilon, rat
from .parser import format_instance, format_language, format_laurent, format_relations, parse, parse_auto
from .qe import INFINITE, eliminate_quantifiers, evaluate_cost, evaluate_objective, evaluate_qf
from .sampler import SampleDomain, csp_sample, vcsp_sample
from .syntax import INF, Language, PlhCostFunction, Relation, VcspInstance

__all__ = [
    "EPS",
    "INF",
    "INFINITE",
    "InternalCheckFailed",
    "Language",
    "Laurent",
    "MultipleGuards",
    "NotMaxClosed",
    "ONE",
    "OracleMismatch",
    "ParseError",
    "PlhCostFunction",
    "PlhError",
    "Relation",
    "ResourceLimitExceeded",
    "SampleDomain",
    "SubmodularityViolation",
    "UnboundedValue",
    "VcspInstance",
    "ZERO",
    "concretize_epsilon",
    "csp_sample",
    "eliminate_quantifiers",
    "evaluate_cost",
    "evaluate_objective",
    "evaluate_qf",
    "format_instance",
    "format_language",
    "format_laurent",
    "format_relations",
    "parse",
    "parse_auto",
    "rat",
    "vcsp_sample",
]

__version__ = "0.1.0"
