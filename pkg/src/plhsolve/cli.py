"""Batch command-line front end.

Exit codes: 0 answer produced (sat / yes / finite or unbounded infimum),
1 negative answer (unsat / no / infeasible / violation found), 2 usage or
input error, 3 resource cap, 4 internal assertion failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import analysis, csp, fm, parser, qe, sampler, syntax as sx, vcsp
from .errors import (
    InternalCheckFailed,
    MultipleGuards,
    OracleMismatch,
    ParseError,
    PlhError,
    ResourceLimitExceeded,
)
from .laurent import Laurent

EXIT_OK = 0
EXIT_NO = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


def _read_file(path):
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load(path, kind):
    return parser.parse(_read_file(path), kind)


def _fmt_witness(witness, label="witness"):
    parts = ["%s%d=%s" % ("x", i, parser.format_laurent(v)) for i, v in enumerate(witness)]
    return "%s %s" % (label, " ".join(parts))


def _fmt_rational_witness(witness):
    parts = ["x%d=%s" % (i, v) for i, v in enumerate(witness)]
    return "rational-witness %s" % " ".join(parts)


def _cmd_qe(args, out):
    relations = _load(args.input, "relation-set")
    eliminated = {
        name: sx.Relation(name, r.arity, csp.positive_definition(r))
        for name, r in relations.items()
    }
    out.write(parser.format_relations(eliminated))
    return EXIT_OK


def _atoms_from_file(path):
    obj = parser.parse_auto(_read_file(path))
    atoms = []
    if isinstance(obj, sx.Language):
        for f in obj:
            atoms.extend(f.guard_atoms())
    elif isinstance(obj, dict):
        for r in obj.values():
            atoms.extend(sx.formula_atoms(csp.positive_definition(r)))
    else:
        raise PlhError("sample input must be a language or a relation set")
    return atoms


def _cmd_sample(args, out):
    atoms = _atoms_from_file(args.input)
    build = sampler.csp_sample if args.regime == "csp" else sampler.vcsp_sample
    domain = build(atoms, args.d)
    for v in domain:
        out.write(parser.format_laurent(v) + "\n")
    return EXIT_OK


def _cmd_solve_csp(args, out):
    relations = _load(args.relations, "relation-set")
    instance = _load(args.instance, "instance")
    result = csp.solve_csp(instance, relations)
    if args.cross_check:
        expected = csp.qe_decision(instance, relations)
        if expected != result.sat:
            raise OracleMismatch(
                "solver said %s, quantifier-elimination oracle says %s"
                % (result.sat, expected)
            )
    if not result.sat:
        out.write("unsat\n")
        return EXIT_NO
    line = "sat"
    if args.witness:
        line += " " + _fmt_witness(result.witness)
    out.write(line + "\n")
    return EXIT_OK


def _threshold_of(args, instance):
    if args.threshold is not None:
        return Fraction(args.threshold)
    return instance.threshold


def _cmd_solve_vcsp(args, out):
    language = _load(args.language, "language")
    instance = _load(args.instance, "instance")
    threshold = _threshold_of(args, instance)
    result = vcsp.classify_infimum(
        instance,
        language,
        cross_check="always" if args.cross_check else "auto",
        rationalize=args.rationalize,
    )
    if result.status == vcsp.INFEASIBLE:
        out.write("infeasible\n")
        return EXIT_NO
    if result.status == vcsp.MINUS_INFINITY:
        out.write("infimum -inf\n")
        answered_yes = True
    else:
        line = "infimum %s %s" % (
            parser.format_laurent(result.infimum),
            "attained" if result.attained else "not-attained",
        )
        if args.witness and result.witness is not None:
            line += " " + _fmt_witness(result.witness)
        if args.rationalize and result.rational_witness is not None:
            line += " " + _fmt_rational_witness(result.rational_witness)
        out.write(line + "\n")
        if threshold is None or threshold is sx.INF:
            answered_yes = True
        else:
            u = Laurent(Fraction(threshold))
            answered_yes = result.infimum < u or (
                result.infimum == u and result.attained
            )
    return EXIT_OK if answered_yes else EXIT_NO


def _cmd_oracle(args, out):
    language = _load(args.language, "language")
    instance = _load(args.instance, "instance")
    result = fm.vcsp_oracle(instance, language)
    if result.status == fm.INFEASIBLE:
        out.write("infeasible\n")
        return EXIT_NO
    if result.status == fm.MINUS_INFINITY:
        out.write("infimum -inf\n")
        return EXIT_OK
    out.write(
        "infimum %s %s\n"
        % (
            parser.format_laurent(result.value),
            "attained" if result.attained else "not-attained",
        )
    )
    threshold = _threshold_of(args, instance)
    if threshold is None or threshold is sx.INF:
        return EXIT_OK
    return EXIT_OK if fm.oracle_threshold(result, threshold) else EXIT_NO


def _cmd_check_submodular(args, out):
    language = _load(args.language, "language")
    if args.function not in language.functions:
        raise PlhError("no function named %r" % args.function)
    f = language[args.function]
    grid = None
    if args.d is not None:
        grid = sampler.vcsp_sample(f.guard_atoms(), args.d)
    report = analysis.check_submodular(f, grid)
    if report.passed:
        out.write("pass-on-grid grid-size %d\n" % report.grid_size)
        return EXIT_OK
    a, b = report.pair
    out.write(
        "violation a=(%s) b=(%s)\n"
        % (
            " ".join(parser.format_laurent(v) for v in a),
            " ".join(parser.format_laurent(v) for v in b),
        )
    )
    return EXIT_NO


def _cmd_gadget(args, out):
    language = _load(args.language, "language")
    base_instance = _load(args.base, "instance")
    if args.function not in language.functions:
        raise PlhError("no function named %r" % args.function)
    f = language[args.function]
    pair = analysis.find_violation_witness(f)
    if pair is None:
        out.write("no-violation\n")
        return EXIT_NO
    witness = analysis.rationalize_violation(f, pair)
    domain = sorted(set(witness[0]) | set(witness[1]))
    tables = {}
    for name in dict.fromkeys(n for n, _ in base_instance.summands):
        if name == args.function:
            continue
        g = language[name]
        tables[name] = _table_over(g, domain)
    instance, gadget_language = analysis.build_hardness_gadget(
        f, witness, base_instance, tables, args.function
    )
    out.write(parser.format_language(gadget_language))
    out.write(parser.format_instance(instance))
    return EXIT_OK


def _table_over(f: sx.PlhCostFunction, domain):
    import itertools

    table = {}
    for point in itertools.product(domain, repeat=f.arity):
        value = qe.evaluate_cost(f, tuple(Laurent(x) for x in point))
        table[point] = qe.INFINITE if value is qe.INFINITE else value.standard_part()
    return table


def build_arg_parser():
    top = argparse.ArgumentParser(
        prog="plhsolve",
        description="Exact solvers for piecewise-linear-homogeneous constraint problems",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qe", help="eliminate quantifiers from relation definitions")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_qe)

    p = sub.add_parser("sample", help="dump the sampled finite domain")
    p.add_argument("--input", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--regime", choices=["csp", "vcsp"], required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("solve-csp", help="decide a conjunction of relations")
    p.add_argument("--relations", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--cross-check", action="store_true")
    p.set_defaults(func=_cmd_solve_csp)

    p = sub.add_parser("solve-vcsp", help="optimize a sum of cost functions")
    p.add_argument("--language", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--threshold")
    p.add_argument("--witness", action="store_true")
    p.add_argument("--rationalize", action="store_true")
    p.add_argument("--cross-check", action="store_true")
    p.set_defaults(func=_cmd_solve_vcsp)

    p = sub.add_parser("oracle", help="piece-enumeration reference answer")
    p.add_argument("--language", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--threshold")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("check-submodular", help="grid submodularity certificate")
    p.add_argument("--language", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--d", type=int)
    p.set_defaults(func=_cmd_check_submodular)

    p = sub.add_parser("gadget", help="lift a finite-table instance through a violation")
    p.add_argument("--language", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--base", required=True)
    p.set_defaults(func=_cmd_gadget)
    return top


def main(argv=None, out=None):
    out = out or sys.stdout
    top = build_arg_parser()
    try:
        args = top.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (OracleMismatch, InternalCheckFailed, MultipleGuards) as exc:
        print("internal check failed: %s" % exc, file=sys.stderr)
        return EXIT_INTERNAL
    except ResourceLimitExceeded as exc:
        print("resource limit: %s" % exc, file=sys.stderr)
        return EXIT_RESOURCE
    except (PlhError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
