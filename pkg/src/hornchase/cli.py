"""Command-line driver: ``hornchase <subcommand> ...``.

Exit codes: 0 success or true, 1 false (check, equiv, pip), 2 failure
(chase failure, malformed input), 3 chase budget exhausted, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .chase import ChaseConfig, active_triggers, chase, default_max_steps, load_theory, pushout
from .encodings import DlSyntaxError, dl_to_fol, parse_dl, Subsumption
from .evaluator import hom_equivalent, satisfies
from .gml import GmlError, gml_normalize, gml_to_facts
from .instance import ChaseFailure
from .lattice import (
    TAU_BY_NAME, TAU_DISJOINT, MergeError, TaxonomyError, merge_taxonomies,
    parse_taxonomy, partition_from_instance,
)
from .logic import ClassifyError, Const, classify
from .rewrite import RewriteError, parse_rules, partition_from_rings, point_in_polygon, polygon_program
from .tptp import (
    FactSyntaxError, TptpSyntaxError, TptpUnit, format_formula, parse_facts, parse_tptp, print_facts,
    print_tptp,
)

EXIT_OK, EXIT_FALSE, EXIT_FAILURE, EXIT_LIMIT, EXIT_USAGE = 0, 1, 2, 3, 64
_OUTCOME_EXIT = {"fixpoint": EXIT_OK, "failure": EXIT_FAILURE, "limit": EXIT_LIMIT}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Log:
    """JSON-lines event log; inactive unless ``--log`` is given."""

    def __init__(self, target):
        self.stream = None
        if target == "-":
            self.stream = sys.stderr
        elif target:
            self.stream = open(target, "a", encoding="utf-8")
        self.start = time.perf_counter()

    def __call__(self, event, **fields):
        if self.stream is None:
            return
        record = {"event": event, "elapsed": round(time.perf_counter() - self.start, 6), **fields}
        self.stream.write(json.dumps(record, default=str) + "\n")
        self.stream.flush()

    def close(self):
        if self.stream not in (None, sys.stderr):
            self.stream.close()


# ---------------------------------------------------------------------------
# Input helpers


def _read(path) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def _facts(path):
    text = _read(path)
    if Path(path).suffix in (".gml", ".xml"):
        return gml_to_facts(text)
    return parse_facts(text)


def _theory(path):
    units = parse_tptp(_read(path))
    return [u for u in units if u.role == "axiom"]


def _dependencies(path):
    return load_theory(_theory(path))


def _config(args) -> ChaseConfig:
    return ChaseConfig(max_steps=args.max_steps or default_max_steps(), seed=args.seed)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _ints(text: str, count: int, what: str) -> tuple:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be {count} comma-separated integers") from None
    if len(values) != count:
        raise UsageError(f"{what} must be {count} comma-separated integers")
    return values


def _report_chase(result, args, log) -> int:
    log("chase", outcome=result.outcome, steps=result.steps, nulls=result.nulls_created)
    if result.outcome == "failure":
        dep = result.failed_dependency.name if result.failed_dependency else "?"
        left, right = result.failed_values
        print(f"chase failed: {dep} forces {left} = {right}", file=sys.stderr)
    elif result.outcome == "limit":
        print(f"chase stopped after {result.steps} steps (budget exhausted)", file=sys.stderr)
    _emit(print_facts(result.instance), args.out)
    return _OUTCOME_EXIT[result.outcome]


# ---------------------------------------------------------------------------
# Subcommands


def cmd_parse(args, log) -> int:
    text = _read(args.file)
    if Path(args.file).suffix == ".facts":
        _emit(print_facts(parse_facts(text)), args.out)
    else:
        units = parse_tptp(text, lax=args.lax)
        log("parse", units=len(units))
        _emit(print_tptp(units), args.out)
    return EXIT_OK


def cmd_check(args, log) -> int:
    inst = _facts(args.facts)
    violated = []
    for unit in _theory(args.theory):
        try:
            dep = classify(unit.payload, unit.name)
        except ClassifyError:
            ok = satisfies(inst, unit.payload)
        else:
            ok = next(active_triggers(inst, [dep]), None) is None
        if not ok:
            violated.append(unit.name)
    log("check", violated=violated)
    for name in violated:
        print(f"violated: {name}")
    return EXIT_FALSE if violated else EXIT_OK


def cmd_chase(args, log) -> int:
    deps = _dependencies(args.theory)
    inst = _facts(args.facts)
    return _report_chase(chase(inst, deps, _config(args)), args, log)


def cmd_equiv(args, log) -> int:
    a, b = _facts(args.left), _facts(args.right)
    if args.gml or args.theory:
        deps = _dependencies(args.theory) if args.theory else None
        results = []
        for inst in (a, b):
            r = gml_normalize(inst, _config(args)) if deps is None else chase(inst, deps, _config(args))
            log("chase", outcome=r.outcome, steps=r.steps)
            if not r.ok:
                print(f"chase ended in {r.outcome}", file=sys.stderr)
                return _OUTCOME_EXIT[r.outcome]
            results.append(r.instance)
        a, b = results
    same = hom_equivalent(a, b)
    log("equiv", equivalent=same)
    print("equivalent" if same else "not equivalent")
    return EXIT_OK if same else EXIT_FALSE


def _map_pairs(path):
    inst = parse_facts(_read(path))
    if set(inst.relations()) - {"h"}:
        raise UsageError(f"{path}: expected only h(k, v) facts")
    return inst.sorted_tuples("h")


def cmd_pushout(args, log) -> int:
    d, r = _facts(args.d), _facts(args.r)
    kd = _map_pairs(args.kd) if args.kd else []
    kr = _map_pairs(args.kr) if args.kr else []
    return _report_chase(pushout(d, r, kd, kr, _config(args)), args, log)


def cmd_translate_dl(args, log) -> int:
    text = _read(args.file) if args.file else " ".join(args.statement)
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()] if args.file else [text]
    out = []
    k = 0
    for line in lines:
        if not line:
            continue
        k += 1
        statement = parse_dl(line)
        formula = dl_to_fol(statement)
        if not isinstance(statement, Subsumption):
            out.append(f"% concept at X: {format_formula(formula)}\n")
            continue
        out.append(print_tptp([TptpUnit(f"dl_{k}", "axiom", formula)]))
        try:
            classify(formula, f"dl_{k}")
        except ClassifyError as exc:
            out.append(f"% not an existential Horn clause: {exc}\n")
            log("classify", unit=f"dl_{k}", rejected=str(exc))
    _emit("".join(out), args.out)
    return EXIT_OK


def _side(values, flag):
    if len(values) not in (1, 2):
        raise UsageError(f"{flag} takes a taxonomy file and optionally a partition fact file")
    taxonomy = parse_taxonomy(_read(values[0]))
    partition = partition_from_instance(parse_facts(_read(values[1]))) if len(values) == 2 else None
    return taxonomy, partition


def cmd_merge_lattice(args, log) -> int:
    t1, p1 = _side(args.left, "--left")
    t2, p2 = _side(args.right, "--right")
    if (p1 is None) != (p2 is None):
        raise UsageError("give partition files for both sides or neither")
    try:
        m = merge_taxonomies(t1, t2, p1, p2, tau=args.tau, config=_config(args))
    except MergeError as exc:
        log("merge", outcome=exc.result.outcome, steps=exc.result.steps)
        print(f"merge failed: {exc}", file=sys.stderr)
        return _OUTCOME_EXIT[exc.result.outcome]
    log("merge", outcome="fixpoint", elements=len(m.elements), steps=m.steps)
    _emit(print_facts(m.instance), args.out)
    return EXIT_OK


def _program(args):
    return parse_rules(_read(args.program)) if args.program else polygon_program()


def cmd_pip(args, log) -> int:
    x, y = _ints(args.point, 2, "--point")
    inside = point_in_polygon((x, y), args.ring, _program(args))
    log("pip", point=[x, y], inside=inside)
    print("True" if inside else "False")
    return EXIT_OK if inside else EXIT_FALSE


def _rings_from_facts(path):
    inst = parse_facts(_read(path))
    rings = []
    for lr, pl in inst.sorted_tuples("linearRing"):
        lists = sorted(t[1].value for t in inst.lookup("posList", 0, pl))
        if not lists:
            raise UsageError(f"{path}: ring {lr} has no posList (run gml-normalize first)")
        rings.append((str(lr.value if isinstance(lr, Const) else lr), lists[0]))
    return rings


def cmd_partition(args, log) -> int:
    if bool(args.ring) == bool(args.facts):
        raise UsageError("give exactly one of --ring or --facts")
    rings = [(args.name, args.ring)] if args.ring else _rings_from_facts(args.facts)
    grid = _ints(args.grid, 5, "--grid")
    inst = partition_from_rings(rings, grid, _program(args))
    log("partition", rings=len(rings), facts=len(inst))
    _emit(print_facts(inst), args.out)
    return EXIT_OK


def cmd_gml_normalize(args, log) -> int:
    inst = _facts(args.file)
    return _report_chase(gml_normalize(inst, _config(args)), args, log)


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log", metavar="PATH", help="append JSON-lines events to PATH ('-' for stderr)")
    chase_opts = argparse.ArgumentParser(add_help=False)
    chase_opts.add_argument("--max-steps", type=int, default=None,
                            help="chase step budget (default: $HORNCHASE_MAX_STEPS or 100000)")
    chase_opts.add_argument("--seed", type=int, default=None, help="shuffle trigger order with this seed")
    out_opt = argparse.ArgumentParser(add_help=False)
    out_opt.add_argument("--out", "-o", metavar="PATH", help="write output here instead of stdout")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("theory_pos", nargs="?", metavar="THEORY", help=".p file")
    inputs.add_argument("facts_pos", nargs="?", metavar="FACTS", help=".facts (or .gml) file")
    inputs.add_argument("--theory", dest="theory_opt", help="same as THEORY")
    inputs.add_argument("--facts", dest="facts_opt", help="same as FACTS")

    parser = _Parser(prog="hornchase", description="Existential Horn clause chase engine and case studies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", parents=[common, out_opt], help="parse and pretty-print a .p or .facts file")
    p.add_argument("file")
    p.add_argument("--lax", action="store_true", help="allow anonymous units")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("check", parents=[common, inputs], help="does an instance satisfy a theory?")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("chase", parents=[common, chase_opts, out_opt, inputs],
                       help="chase an instance with a theory")
    p.set_defaults(run=cmd_chase)

    p = sub.add_parser("equiv", parents=[common, chase_opts], help="homomorphic equivalence of two instances")
    p.add_argument("left")
    p.add_argument("right")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--theory", help="chase both instances with this theory first")
    group.add_argument("--gml", action="store_true", help="compare GML normal forms")
    p.set_defaults(run=cmd_equiv)

    p = sub.add_parser("pushout", parents=[common, chase_opts, out_opt], help="amalgamate two instances")
    p.add_argument("d")
    p.add_argument("r")
    p.add_argument("--kd", help="h(k, d) facts mapping the overlap into D")
    p.add_argument("--kr", help="h(k, r) facts mapping the overlap into R")
    p.set_defaults(run=cmd_pushout)

    p = sub.add_parser("translate-dl", parents=[common, out_opt], help="translate DL statements to TPTP")
    p.add_argument("statement", nargs="*", help="one statement, e.g. 'sub (and A B) C'")
    p.add_argument("--file", help="one statement per line; '#' starts a comment")
    p.set_defaults(run=cmd_translate_dl)

    p = sub.add_parser("merge-lattice", parents=[common, chase_opts, out_opt],
                       help="merge two labelled partitions and complete the label lattice")
    p.add_argument("--left", nargs="+", required=True, metavar="FILE", help="TAXONOMY [FACTS]")
    p.add_argument("--right", nargs="+", required=True, metavar="FILE", help="TAXONOMY [FACTS]")
    p.add_argument("--tau", choices=(TAU_BY_NAME, TAU_DISJOINT), default=TAU_BY_NAME)
    p.set_defaults(run=cmd_merge_lattice)

    program = argparse.ArgumentParser(add_help=False)
    program.add_argument("--program", help="equations file (default: the bundled polygon.eq)")

    p = sub.add_parser("pip", parents=[common, program], help="point in convex polygon by rewriting")
    p.add_argument("--ring", required=True, help='posList string, e.g. "0 0 10 0 10 10 0 10 0 0"')
    p.add_argument("--point", required=True, metavar="X,Y")
    p.set_defaults(run=cmd_pip)

    p = sub.add_parser("partition", parents=[common, program, out_opt],
                       help="inside/outside partition of grid points per ring")
    p.add_argument("--ring", help="posList string")
    p.add_argument("--name", default="lr1", help="ring name for --ring (default lr1)")
    p.add_argument("--facts", help="linearRing/posList fact file")
    p.add_argument("--grid", required=True, metavar="X0,Y0,X1,Y1,STEP")
    p.set_defaults(run=cmd_partition)

    p = sub.add_parser("gml-normalize", parents=[common, chase_opts, out_opt],
                       help="chase a LinearRing encoding to its normal form")
    p.add_argument("file", help=".facts or .gml/.xml file")
    p.set_defaults(run=cmd_gml_normalize)
    return parser


def _parse_args(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "max_steps", None) is not None and args.max_steps <= 0:
        parser.error("--max-steps must be positive")
    if hasattr(args, "theory_pos"):
        for name in ("theory", "facts"):
            pos, opt = getattr(args, f"{name}_pos"), getattr(args, f"{name}_opt")
            if (pos is None) == (opt is None):
                parser.error(f"give the {name} file once, positionally or with --{name}")
            setattr(args, name, pos or opt)
    return args


def main(argv=None) -> int:
    try:
        args = _parse_args(build_parser(), argv)
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    log = _Log(args.log)
    log("start", command=args.command)
    try:
        code = args.run(args, log)
    except UsageError as exc:
        print(f"hornchase: error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except (TptpSyntaxError, FactSyntaxError, TaxonomyError, DlSyntaxError, GmlError,
            ClassifyError, RewriteError, ChaseFailure, ValueError) as exc:
        print(f"hornchase: {exc}", file=sys.stderr)
        code = EXIT_FAILURE
    log("exit", code=code)
    log.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
