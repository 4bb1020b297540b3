"""``mlab`` command line: run verification suites and replay failing instances.

Exit status is 0 when every hard check passes, 1 when a check fails and 2 on
usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .estimates import ExponentTriple
from .probspace import ProbabilityError
from .suites import SUITES, ExperimentConfig, jsonable, replay_failure, run_suite

REPORT_SCHEMA = "mlab-report/1"


class UsageError(Exception):
    pass


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected AxB, got {text!r}") from None


def _exponents(text: str) -> ExponentTriple:
    try:
        return ExponentTriple.parse(text)
    except (ValueError, ProbabilityError) as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _dt(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad --dt {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one suite or all of them")
    r.add_argument("--suite", required=True, choices=SUITES + ("all",))
    r.add_argument("--seed", type=int, default=None, help="master seed (default: $MLAB_SEED or 0)")
    r.add_argument("--exact", action="store_true", help="rational arithmetic")
    r.add_argument("--dims", type=_pair, default=None, help="factor sizes, e.g. 3x4")
    r.add_argument("--n", type=int, default=None, help="filtration horizon")
    r.add_argument("--depth", type=int, default=None, help="dyadic grid depth")
    r.add_argument("--exponents", type=_exponents, default=None, help="p,q[,r]")
    r.add_argument("--trials", type=int, default=None)
    r.add_argument("--out", type=Path, default=Path("mlab-out"))
    r.add_argument("--paths", type=_pair, default=(256, 256), help="path counts m1xm2")
    r.add_argument("--dt", type=_dt, default=1.0 / 1024, help="time step, e.g. 1/1024")

    rp = sub.add_parser("replay", help="re-run the checks of a failure artifact")
    rp.add_argument("file", type=Path)
    return p


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("MLAB_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"MLAB_SEED must be an integer, got {env!r}") from None


def _config_json(cfg: ExperimentConfig) -> dict:
    e = cfg.exponents
    return {"suite": cfg.suite, "seed": cfg.seed, "exact": cfg.exact,
            "dims": list(cfg.dims) if cfg.dims else None, "n": cfg.n, "depth": cfg.depth,
            "exponents": [e.p, e.q, e.r], "trials": cfg.trials, "paths": list(cfg.paths),
            "dt": cfg.dt}


def _write_table(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def run(cfg: ExperimentConfig, out: Path) -> int:
    """Execute the configured suites, write ``report.json``, tables and failures; return the exit code."""
    cfg.validate()
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tables").mkdir(exist_ok=True)
    suites, runtimes = {}, {}
    failure_files = []
    for name in names:
        sub = ExperimentConfig(**{**cfg.__dict__, "suite": name})
        res = run_suite(sub)
        runtimes[name] = round(res.seconds, 3)
        suites[name] = {"pass": res.passed, "summary": jsonable(res.summary),
                        "failure_count": len(res.failures)}
        for tname, (header, rows) in res.tables.items():
            _write_table(out / "tables" / f"{tname}.csv", header, rows)
        if res.failures:
            fdir = out / "failures"
            fdir.mkdir(exist_ok=True)
            for j, f in enumerate(res.failures):
                path = fdir / f"{name}-{j:04d}.json"
                path.write_text(json.dumps(jsonable(f), indent=2, sort_keys=True))
                failure_files.append(str(path))
    ok = all(s["pass"] for s in suites.values())
    report = {
        "schema": REPORT_SCHEMA,
        "config": _config_json(cfg),
        "suites": suites,
        "pass": ok,
        "meta": {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                 "runtime_seconds": runtimes, "version": __version__},
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for name, s in suites.items():
        print(f"{name:12s} {'PASS' if s['pass'] else 'FAIL'}  ({runtimes[name]:.1f}s)")
    if not ok:
        print(f"seed {cfg.seed}: failing instances written to:", file=sys.stderr)
        for f in failure_files:
            print(f"  {f}", file=sys.stderr)
    return 0 if ok else 1


def replay(path: Path) -> int:
    try:
        artifact = json.loads(path.read_text())
        if not isinstance(artifact, dict):
            raise ValueError("artifact must be a JSON object")
        result = replay_failure(artifact)
    except (OSError, ValueError, KeyError, TypeError, ProbabilityError) as e:
        print(f"mlab replay: cannot load {path}: {e}", file=sys.stderr)
        return 2
    print(json.dumps(jsonable(result), indent=2, sort_keys=True))
    return 0 if result["pass"] else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return replay(args.file)
    try:
        cfg = ExperimentConfig(
            suite=args.suite, seed=_seed(args.seed), exact=args.exact, dims=args.dims, n=args.n,
            depth=args.depth,
            exponents=args.exponents or ExperimentConfig.__dataclass_fields__["exponents"].default,
            trials=args.trials, out=args.out, paths=args.paths, dt=args.dt)
        cfg.validate()
    except (UsageError, ProbabilityError) as e:
        parser.print_usage(sys.stderr)
        print(f"mlab: error: {e}", file=sys.stderr)
        return 2
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
