"""Command-line driver.

Subcommands mirror the methodology: validate a model, simulate or analyze
it, mine a stored log, diff a log against the model, or run everything at
once with ``pipeline``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import QFMineError
from .eventlog import LogWriter, preprocess, read_log
from .graphdiff import DiffGraph, diff, mined_graph, spec_graph, to_dot, to_json
from .miner import HeuristicNet, discover, net_to_dot
from .model import Model, validate_static
from .parser import parse_model
from .smc import sequential_estimate, stop_rule
from .simulator import MaxSteps, Simulator

__all__ = ["DEFAULT_SEED", "main", "build_parser", "load_model", "run_pipeline", "mine_log"]

DEFAULT_SEED = 42


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def load_model(path: str | Path) -> Model:
    """Parse and validate ``path``.

    Raises:
        _Fail: code 1 for I/O or parse errors, 2 for static diagnostics.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(1, f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        model = parse_model(text, str(path))
    except QFMineError as exc:
        raise _Fail(1, f"parse error: {exc}") from None
    diags = validate_static(model)
    if diags:
        raise _Fail(2, "\n".join(str(d) for d in diags))
    return model


def _query(model: Model, k: int):
    if not 1 <= k <= len(model.analyses):
        raise _Fail(2, f"--analysis {k} is out of range: model has {len(model.analyses)} analysis block(s)")
    return model.analyses[k - 1]


def mine_log(log_path: str | Path) -> HeuristicNet:
    cases = read_log(log_path)
    if not cases:
        raise _Fail(1, f"{log_path}: no cases")
    return discover(preprocess(cases))


def diff_log(model: Model, log_path: str | Path) -> tuple[HeuristicNet, DiffGraph]:
    net = mine_log(log_path)
    return net, diff(spec_graph(model), mined_graph(net))


def _summary(d: DiffGraph) -> str:
    return f"{len(d.spec_only)} specOnly edges, {len(d.mined_only)} minedOnly edges"


def run_pipeline(model_path: str | Path, analysis: int, seed: int, out: str | Path,
                 parallelism: int | None = None, quiet: bool = False) -> dict:
    """Analyze, preprocess, mine, reconstruct and diff; returns the manifest."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "model": str(model_path),
        "analysis": analysis,
        "baseSeed": seed,
        "outDir": str(out),
        "artifacts": {},
        "timings": {},
        "status": "ok",
    }
    stage = "load"

    def clock(name, fn):
        t0 = time.perf_counter()
        res = fn()
        manifest["timings"][name] = round(time.perf_counter() - t0, 6)
        return res

    try:
        model = load_model(model_path)
        query = _query(model, analysis)
        stage = "analyze"
        events, report_csv = out / "events.csv", out / "report.csv"
        report = clock("analyze", lambda: sequential_estimate(
            model, query, seed, parallelism=parallelism, log_path=events))
        report_csv.write_text(report.to_csv(), encoding="utf-8")
        manifest["artifacts"].update(events=events.name, report=report_csv.name)
        manifest["simulations"] = report.simulations
        manifest["missing"] = report.missing
        manifest["converged"] = report.converged
        if not quiet:
            print(report.summary())
        stage = "preprocess"
        log = clock("preprocess", lambda: preprocess(read_log(events)))
        stage = "mine"
        net = clock("mine", lambda: discover(log))
        (out / "hn.dot").write_text(net_to_dot(net), encoding="utf-8")
        manifest["artifacts"]["hn"] = "hn.dot"
        stage = "reconstruct"
        spec = spec_graph(model)
        mined = clock("reconstruct", lambda: mined_graph(net))
        (out / "spec.dot").write_text(to_dot(spec), encoding="utf-8")
        (out / "mined.dot").write_text(to_dot(mined), encoding="utf-8")
        manifest["artifacts"].update(spec="spec.dot", mined="mined.dot")
        stage = "diff"
        d = clock("diff", lambda: diff(spec, mined))
        (out / "diff.dot").write_text(to_dot(d), encoding="utf-8")
        (out / "diff.json").write_text(to_json(d), encoding="utf-8")
        manifest["artifacts"].update(diff="diff.dot", diffJson="diff.json")
        manifest["specOnly"] = len(d.spec_only)
        manifest["minedOnly"] = len(d.mined_only)
        t = manifest["timings"]
        post = sum(v for k, v in t.items() if k != "analyze")
        manifest["postSmcRatio"] = round(post / t["analyze"], 6) if t["analyze"] > 0 else None
        if not quiet:
            print(_summary(d))
    except (_Fail, QFMineError, OSError) as exc:
        manifest["status"] = "failed"
        manifest["failedStage"] = stage
        manifest["error"] = str(exc)
        raise
    finally:
        # written last, listing only files that exist
        manifest["artifacts"] = {k: v for k, v in manifest["artifacts"].items() if (out / v).exists()}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


# -- subcommands --------------------------------------------------------------


def cmd_validate(args) -> int:
    load_model(args.model)
    print(f"{args.model}: ok")
    return 0


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    sim = Simulator(model)
    if args.analysis is not None:
        rule = stop_rule(_query(model, args.analysis))
    else:
        rule = MaxSteps(args.steps)
    out = Path(args.out)
    with LogWriter(out) as w:
        for i in range(args.runs):
            outcome = sim.run(rule, args.seed + i)
            w.write_case(outcome.records)
            print(f"case {outcome.case_id}: {len(outcome.records)} steps, {outcome.terminal}")
    return 0


def cmd_analyze(args) -> int:
    model = load_model(args.model)
    query = _query(model, args.analysis)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = sequential_estimate(model, query, args.seed, parallelism=args.parallelism,
                                 log_path=out / "events.csv")
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    print(report.summary())
    return 0


def cmd_mine(args) -> int:
    net = mine_log(args.log)
    Path(args.out).write_text(to_dot(mined_graph(net)), encoding="utf-8")
    if args.hn:
        Path(args.hn).write_text(net_to_dot(net), encoding="utf-8")
    print(f"{len(net.activities)} activities, {len(net.edges)} edges")
    return 0


def cmd_diff(args) -> int:
    model = load_model(args.model)
    _, d = diff_log(model, args.log)
    Path(args.out).write_text(to_dot(d), encoding="utf-8")
    if args.json:
        Path(args.json).write_text(to_json(d), encoding="utf-8")
    print(_summary(d))
    return 0


def cmd_pipeline(args) -> int:
    run_pipeline(args.model, args.analysis, args.seed, args.out, args.parallelism)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfmine", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def seed(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"base seed (default {DEFAULT_SEED})")

    def analysis(sp, required=True):
        sp.add_argument("--analysis", type=int, required=required, metavar="K",
                        help="1-based index of the analysis block")

    sp = sub.add_parser("validate", help="parse and check a model")
    sp.add_argument("model")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="run simulations and write their log")
    sp.add_argument("model")
    analysis(sp, required=False)
    sp.add_argument("--steps", type=int, default=100, help="steps per run when no --analysis is given")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--out", default="events.csv")
    seed(sp)
    sp.set_defaults(func=cmd_simulate)

    for name, func, text in (("analyze", cmd_analyze, "statistical model checking of one analysis"),
                             ("pipeline", cmd_pipeline, "analyze, mine and diff in one go")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("model")
        analysis(sp)
        seed(sp)
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--parallelism", type=int, default=None,
                        help="worker processes (default: the analysis setting)")
        sp.set_defaults(func=func)

    sp = sub.add_parser("mine", help="mine a stored log into a procedural graph")
    sp.add_argument("log")
    sp.add_argument("--out", required=True, help="DOT file for the mined graph")
    sp.add_argument("--hn", help="also write the heuristic net as DOT")
    sp.set_defaults(func=cmd_mine)

    sp = sub.add_parser("diff", help="diff a stored log against a model")
    sp.add_argument("model")
    sp.add_argument("log")
    sp.add_argument("--out", required=True, help="DOT file for the diff")
    sp.add_argument("--json", help="also write the classification as JSON")
    sp.set_defaults(func=cmd_diff)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        _err(str(exc))
        return exc.code
    except (QFMineError, OSError) as exc:
        _err(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
