"""Command-line entry point: ``nushap explain|score|compare|flawscan|selftest``.

Exit status: 0 on success, 2 on invalid input (including I/O failures),
3 on a degenerate problem.  Errors are reported as one JSON object on
stderr.  Feature indices in all emitted JSON are 1-based.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from nushap import analysis, charfun, explain, shapley
from nushap.core import Instance
from nushap.errors import DegenerateProblemError, NuShapError, ValidationError
from nushap.formats import dump_json, load_dataset, load_declaration, load_truth_table, parse_prediction

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_DEGENERATE = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _one_based(sets) -> list[list[int]]:
    return [sorted(i + 1 for i in s) for s in sorted(sets, key=lambda s: (len(s), sorted(s)))]


def _emit(obj, out: str | None) -> None:
    text = dump_json(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _build_problem(args):
    """Problem object from exactly one backend: --data (with --space) or --table."""
    if bool(args.data) == bool(args.table):
        raise ValidationError("give exactly one backend: --data (with --space) or --table")
    if args.table:
        space, cfg, model = load_truth_table(args.table)
        v = space.parse_point(args.instance)
        q = parse_prediction(args.prediction, cfg) if args.prediction is not None else model.predict(v)
        return explain.ModelProblem(model, Instance(v, q), cfg)
    if not args.space:
        raise ValidationError("--data needs --space")
    space, cfg = load_declaration(args.space)
    sample = load_dataset(args.data, space, cfg)
    v = space.parse_point(args.instance)
    if args.prediction is not None:
        q = parse_prediction(args.prediction, cfg)
    else:
        codes = np.array(space.encode(v))
        hits = np.flatnonzero((sample.codes == codes).all(axis=1))
        labels = set(sample.predictions[hits].tolist())
        if not labels:
            raise ValidationError("instance does not occur in the dataset; pass --prediction")
        if len(labels) > 1:
            raise ValidationError(f"instance has conflicting predictions {sorted(map(str, labels))}")
        q = labels.pop()
    return explain.SampleProblem(sample, Instance(v, q), cfg)


def _cmd_explain(args) -> int:
    problem = _build_problem(args)
    wanted = [w.strip() for w in args.emit.split(",") if w.strip()]
    out = {}
    for what in wanted:
        if what in ("axp", "axps"):
            out["axps"] = _one_based(problem.axps())
        elif what in ("cxp", "cxps"):
            out["cxps"] = _one_based(problem.cxps())
        elif what == "relevancy":
            out["relevancy"] = {str(i + 1): ("relevant" if r else "irrelevant")
                                for i, r in explain.relevancy(problem).items()}
        elif what == "extract":
            if not isinstance(problem, explain.SampleProblem):
                raise ValidationError("--emit extract needs a dataset backend")
            out["extract"] = sorted(i + 1 for i in problem.extract_axp())
        else:
            raise ValidationError(f"unknown --emit item {what!r}")
    _emit(out, args.out)
    return EXIT_OK


def _cmd_score(args) -> int:
    estimator_flags = [args.epsilon, args.alpha, args.seed, args.runs, args.value_range]
    if args.mode == "exact" and (any(x is not None for x in estimator_flags) or args.union_bound):
        raise ValidationError("estimator parameters are only valid with --mode estimate")
    problem = _build_problem(args)
    game = charfun.axp_game(problem) if args.cf == "axp" else charfun.expectation_game(problem)
    if args.mode == "exact":
        report = shapley.shapley_exact_subsets(game)
    else:
        seed = args.seed
        if seed is None:
            seed = np.random.SeedSequence().entropy
            print(f"seed: {seed}", file=sys.stderr)
        params = shapley.EstimatorParams(
            epsilon=args.epsilon if args.epsilon is not None else 0.05,
            alpha=args.alpha if args.alpha is not None else 0.05,
            seed=seed, runs=args.runs, value_range=args.value_range,
            union_bound=args.union_bound, threads=args.threads)
        report = shapley.shapley_estimate_cgt(game, params)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def _load_report(path) -> shapley.ScoreReport:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return shapley.ScoreReport.from_dict(data)


def _cmd_compare(args) -> int:
    params = analysis.RboParams(args.rbo_p, args.rbo_depth)
    result = analysis.compare_reports(_load_report(args.a), _load_report(args.b), params)
    _emit(result, args.out)
    return EXIT_OK


def _cmd_flawscan(args) -> int:
    if not args.out:
        analysis.flaw_census(args.vars, sys.stdout, engine=args.engine)
        return EXIT_OK
    with open(args.out, "w", newline="") as fh:
        summary = analysis.flaw_census(args.vars, fh, engine=args.engine)
    _emit(summary.to_dict(), None)
    return EXIT_OK


def run_selftest(fixtures_dir=None, stream=None) -> bool:
    """Run the fixture checks, print one line per check, return True if all pass."""
    from nushap import fixtures

    stream = stream or sys.stdout
    results = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # a broken fixture must surface as a named failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(ok)
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name:<28} {detail}\n")

    def d1_problem():
        sample, inst, cfg = fixtures.load_d1(fixtures_dir)
        return explain.SampleProblem(sample, inst, cfg)

    def d1_explain():
        p = d1_problem()
        got = (_one_based(p.axps()), _one_based(p.cxps()))
        return got == ([[1, 3]], [[1], [3]]), f"axps={got[0]} cxps={got[1]}"

    def d1_scores():
        sc = shapley.shapley_exact_subsets(charfun.axp_game(d1_problem())).scores
        return sc == (0.5, 0.0, 0.5), f"Sc_a={list(sc)}"

    def d1_estimate():
        game = charfun.axp_game(d1_problem())
        rep = shapley.shapley_estimate_cgt(game, shapley.EstimatorParams(0.1, 0.1, seed=7))
        return rep.scores[1] == 0.0 and abs(rep.scores[0] - 0.5) <= 0.2, f"Sh_E={[round(s, 3) for s in rep.scores]} r={rep.runs}"

    def or_example():
        model, cfg = fixtures.load_or(fixtures_dir)
        p = explain.ModelProblem(model, Instance((1, 0), 1), cfg)
        sc_e = shapley.shapley_exact_subsets(charfun.expectation_game(p)).scores
        sc_a = shapley.shapley_exact_subsets(charfun.axp_game(p)).scores
        ok = abs(sc_e[1] + 0.125) <= 1e-12 and sc_a == (1.0, 0.0) and not explain.relevancy(p)[1]
        return ok, f"Sc_e={list(sc_e)} Sc_a={list(sc_a)}"

    def m3_example():
        model, cfg, inst = fixtures.m3_model()
        sc = shapley.shapley_exact_subsets(charfun.axp_game(explain.ModelProblem(model, inst, cfg))).scores
        return sc == (1.0, 0.0), f"Sc_a(1)={sc[0]} Sc_a(2)={sc[1]}"

    def runs_small():
        r = shapley.required_runs(0.5, 2 / math.e**2)
        return r == 4, f"r={r}"

    def rbo_case():
        val = analysis.rbo([1, 2, 3, 4, 5], [2, 1, 3, 4, 5])
        return abs(val - 0.48387) <= 1e-5, f"rbo={val:.6f}"

    check("D1 explanations", d1_explain)
    check("D1 exact axp scores", d1_scores)
    check("D1 estimator", d1_estimate)
    check("OR misleading scores", or_example)
    check("grid regression axp scores", m3_example)
    check("required runs", runs_small)
    check("RBO hand case", rbo_case)
    return all(results)


def _cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest(args.fixtures_dir) else EXIT_FAIL


def _add_backend(p):
    p.add_argument("--space", help="feature-space declaration JSON (with --data)")
    p.add_argument("--data", help="dataset / recorded-predictions CSV")
    p.add_argument("--table", help="truth-table JSON")
    p.add_argument("--instance", required=True, help='comma-separated point, e.g. "1,1,0"')
    p.add_argument("--prediction", help="instance prediction (default: looked up)")
    p.add_argument("--out", help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nushap", description="Rigorous Shapley-based feature attribution.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("explain", help="abductive / contrastive explanations")
    _add_backend(p)
    p.add_argument("--emit", default="axp,cxps", help="comma list of axp, cxps, relevancy, extract")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("score", help="Shapley scores, exact or estimated")
    _add_backend(p)
    p.add_argument("--cf", choices=["axp", "expv"], default="axp")
    p.add_argument("--mode", choices=["exact", "estimate"], default="exact")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, help="explicit number of sampled permutations")
    p.add_argument("--value-range", type=float, help="width of the marginal-contribution range")
    p.add_argument("--union-bound", action="store_true", help="split alpha across features")
    p.add_argument("--threads", type=int, help="worker cap (default: env NUSHAP_THREADS, else 1)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("compare", help="RBO between two score reports")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--rbo-p", type=float, default=0.5)
    p.add_argument("--rbo-depth", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("flawscan", help="census of misleading scores over boolean functions")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--out", help="census CSV path (summary JSON then goes to stdout)")
    p.add_argument("--engine", choices=["vectorized", "reference"], default="vectorized")
    p.set_defaults(func=_cmd_flawscan)

    p = sub.add_parser("selftest", help="run the built-in fixture checks")
    p.add_argument("--fixtures-dir", help="directory holding d1.csv, d1.json, or2.json")
    p.set_defaults(func=_cmd_selftest)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", str(exc), EXIT_INVALID)
    try:
        return args.func(args)
    except OSError as exc:
        return _fail("io", f"{exc.strerror or exc}: {exc.filename}" if exc.filename else str(exc), EXIT_INVALID)
    except DegenerateProblemError as exc:
        return _fail("degenerate", str(exc), EXIT_DEGENERATE)
    except (ValidationError, NuShapError) as exc:
        return _fail("validation", str(exc), EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
