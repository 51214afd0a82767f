"""Experiment command line: solve, cs-recover, h-sweep, bench, replay.

Every run writes its outputs into a fresh directory named
``<command>-<seed>-<timestamp>`` together with a ``manifest.txt`` holding
the fully resolved configuration; ``replay`` re-executes a manifest and
reproduces the data columns exactly (elapsed/timestamps excluded).
Exit codes: 0 converged, 1 solver non-convergence, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .cs import AmplitudeMode, ENCODERS, X0_MODES, run_h_sweep, run_recovery
from .model import (
    BBVariant,
    CompositeProblem,
    PRESET_NAMES,
    RegKind,
    RegularizerSpec,
    SolverConfig,
    TerminationReason,
)
from .objectives import CUTER_NAMES, cuter_problem
from .solver import run

BENCH_DIMS = {"VARDIM": 1000, "COSINE": 10000, "GENROSE": 200, "WOODS": 1000, "CHAINWOO": 1000}
BENCH_MUS = (0.0, 0.25, 0.5, 2.0)
CONVERGED = (TerminationReason.DIRECTION_SMALL, TerminationReason.RELATIVE_CHANGE_SMALL)

_CONFIG_FLAGS = (
    "h", "rho", "delta", "m_tilde", "lambda_min", "lambda_max",
    "tol_d", "tol_x", "max_iter", "max_backtracks", "bb_variant", "lambda0",
)


def _fmt(value) -> str:
    """Scientific notation with 16 significant digits for CSV cells."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return f"{float(value):.15e}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) if not isinstance(cell, str) else cell for cell in row])


def _config_dict(cfg: SolverConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["bb_variant"] = cfg.bb_variant.value
    return d


def _config_from_dict(d: dict) -> SolverConfig:
    d = dict(d)
    d["bb_variant"] = BBVariant(d["bb_variant"])
    return SolverConfig(**d)


def resolve_config(preset: str, overrides: dict) -> SolverConfig:
    """Built-in defaults < preset < individual flags."""
    cfg = SolverConfig.preset(preset)
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "bb_variant" in changes:
        changes["bb_variant"] = BBVariant(changes["bb_variant"])
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _make_run_dir(parent: Path, command: str, seed: int) -> Path:
    stamp = datetime.now().strftime("%Y%m%dT%H%M%S.%f")
    base = parent / f"{command}-{seed}-{stamp}"
    path = base
    counter = 1
    while path.exists():
        path = Path(f"{base}-{counter}")
        counter += 1
    path.mkdir(parents=True)
    return path


def _write_manifest(run_dir: Path, command: str, seed: int, params: dict,
                    cfg: SolverConfig, preset: str, plot: bool) -> None:
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "seed": seed,
        "started": datetime.now().isoformat(),
        "preset": preset,
        "plot": plot,
        "params": params,
        "config": _config_dict(cfg),
    }
    (run_dir / "manifest.txt").write_text(json.dumps(manifest, indent=2) + "\n")


def _trace_rows(records, with_rel_err: bool):
    for r in records:
        row = [r.k, r.F, r.norm_d, r.alpha, r.lam, r.backtracks, r.nf, r.elapsed]
        if with_rel_err:
            row.append(r.rel_err)
        yield row


TRACE_HEADER = ["k", "F", "norm_d", "alpha", "lambda", "backtracks", "nf", "elapsed"]
SUMMARY_HEADER = ["Problem", "Dim", "mu", "Iter", "Nf", "Time", "Fun", "Normg", "Normd"]


def _summary_row(name: str, n: int, mu: float, result) -> list:
    records = result.records
    return [
        name, n, mu,
        len(records),
        records[-1].nf if records else 1,
        records[-1].elapsed if records else 0.0,
        result.F,
        float(np.linalg.norm(result.grad)),
        records[-1].norm_d if records else 0.0,
    ]


def cmd_solve(params: dict, cfg: SolverConfig, seed: int, run_dir: Path, plot: bool) -> int:
    problem = cuter_problem(params["problem"], params["n"])
    composite = CompositeProblem(problem.smooth, RegularizerSpec(RegKind.L1, params["mu"]))
    result = run(composite, problem.x0, cfg)
    _write_csv(run_dir / "trace.csv", TRACE_HEADER, _trace_rows(result.records, False))
    _write_csv(run_dir / "summary.csv", SUMMARY_HEADER,
               [_summary_row(problem.name, problem.n, params["mu"], result)])
    if plot and result.records:
        from . import plots
        plots.render_trace(result.records, run_dir / "trace.png")
    print(f"{problem.name} n={problem.n} mu={params['mu']}: F={result.F:.6e} "
          f"iters={len(result.records)} reason={result.reason.value}")
    return 0 if result.reason in CONVERGED else 1


def cmd_cs_recover(params: dict, cfg: SolverConfig, seed: int, run_dir: Path, plot: bool) -> int:
    report = run_recovery(
        params["n"], params["m"], params["p"], params["sigma"], params["mu"], cfg,
        encoder=params["encoder"], seed=seed, x0_mode=params["x0"],
        amplitude_mode=AmplitudeMode(params["amplitudes"]),
    )
    _write_csv(run_dir / "trace.csv", TRACE_HEADER + ["rel_err"],
               _trace_rows(report.trace, True))
    inst = report.instance
    _write_csv(run_dir / "signals.csv", ["index", "x_bar", "x_star"],
               ([i, inst.x_bar[i], report.x_star[i]] for i in range(inst.n)))
    result = report.result
    _write_csv(run_dir / "summary.csv", SUMMARY_HEADER + ["RelErr"],
               [_summary_row(f"cs-{params['encoder']}", inst.n, params["mu"], result)
                + [report.rel_err]])
    if plot:
        from . import plots
        plots.render_recovery(inst.x_bar, inst.b, report.x_star, run_dir / "recovery.png")
        if report.trace:
            plots.render_trace(report.trace, run_dir / "trace.png")
    print(f"cs-recover n={inst.n} m={inst.m} p={inst.p} encoder={params['encoder']}: "
          f"rel_err={report.rel_err:.4e} iters={report.iterations} "
          f"reason={result.reason.value}")
    return 0 if result.reason in CONVERGED else 1


def cmd_h_sweep(params: dict, cfg: SolverConfig, seed: int, run_dir: Path, plot: bool) -> int:
    rows = run_h_sweep(
        params["h_values"], n=params["n"], m=params["m"], p=params["p"],
        sigma=params["sigma"], mu=params["mu"], cfg=cfg,
        encoder=params["encoder"], seed=seed, x0_mode=params["x0"],
    )
    _write_csv(run_dir / "sweep.csv", ["h", "iterations", "nf", "elapsed", "rel_err"],
               ([r.h, r.iterations, r.nf, r.elapsed, r.rel_err] for r in rows))
    if plot:
        from . import plots
        plots.render_sweep(rows, run_dir / "sweep.png")
    best = min(rows, key=lambda r: r.rel_err)
    print(f"h-sweep over {len(rows)} points: best rel_err={best.rel_err:.4e} at h={best.h:g}")
    return 0


def cmd_bench(params: dict, cfg: SolverConfig, seed: int, run_dir: Path, plot: bool) -> int:
    rows = []
    for mu in params["mus"]:
        for name in params["problems"]:
            n = params["dims"][name]
            problem = cuter_problem(name, n)
            composite = CompositeProblem(problem.smooth, RegularizerSpec(RegKind.L1, mu))
            try:
                result = run(composite, problem.x0, cfg)
                rows.append(_summary_row(name, n, mu, result) + [result.reason.value])
            except Exception as exc:  # noqa: BLE001 - per-row failures become status
                rows.append([name, n, mu, 0, 0, 0.0, float("nan"), float("nan"),
                             float("nan"), f"error: {exc}"])
            print(f"bench {name} n={n} mu={mu}: {rows[-1][-1]}")
    _write_csv(run_dir / "summary.csv", SUMMARY_HEADER + ["Status"], rows)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "cs-recover": cmd_cs_recover,
    "h-sweep": cmd_h_sweep,
    "bench": cmd_bench,
}


def _preset_help() -> str:
    lines = ["preset values:"]
    for name in PRESET_NAMES:
        cfg = SolverConfig.preset(name)
        lines.append(
            f"  {name:7s} h={cfg.h:g} rho={cfg.rho:g} delta={cfg.delta:g} "
            f"m_tilde={cfg.m_tilde} lambda=[{cfg.lambda_min:g},{cfg.lambda_max:g}] "
            f"tol_d={cfg.tol_d:g} tol_x={cfg.tol_x:g} max_iter={cfg.max_iter}"
        )
    return "\n".join(lines)


def _add_config_flags(sub: argparse.ArgumentParser, default_preset: str) -> None:
    grp = sub.add_argument_group("solver configuration")
    grp.add_argument("--preset", choices=PRESET_NAMES, default=default_preset,
                     help=f"parameter bundle (default: {default_preset})")
    grp.add_argument("--h", type=float, help="regularizer linearization scale in (0,1]")
    grp.add_argument("--rho", type=float, help="backtracking factor in (0,1)")
    grp.add_argument("--delta", type=float, help="sufficient-decrease constant in (0,1)")
    grp.add_argument("--m-tilde", dest="m_tilde", type=int, help="nonmonotone window size")
    grp.add_argument("--lambda-min", dest="lambda_min", type=float)
    grp.add_argument("--lambda-max", dest="lambda_max", type=float)
    grp.add_argument("--tol-d", dest="tol_d", type=float, help="direction-norm tolerance")
    grp.add_argument("--tol-x", dest="tol_x", type=float, help="relative-change tolerance")
    grp.add_argument("--max-iter", dest="max_iter", type=int)
    grp.add_argument("--max-backtracks", dest="max_backtracks", type=int)
    grp.add_argument("--bb-variant", dest="bb_variant", choices=["bb1", "bb2"])
    grp.add_argument("--lambda0", type=float, help="spectral coefficient for iteration 0")
    sub.add_argument("--seed", type=int,
                     default=int(os.environ.get("NBBL1_SEED", "0")),
                     help="RNG seed (default: $NBBL1_SEED or 0)")
    sub.add_argument("--outdir", type=Path, default=Path("."),
                     help="parent directory for the run directory")
    sub.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def _add_cs_flags(sub: argparse.ArgumentParser, n_default: int) -> None:
    sub.add_argument("--n", type=int, default=n_default, help="signal length")
    sub.add_argument("--m", type=int, default=512, help="number of measurements")
    sub.add_argument("--p", type=int, default=64, help="number of nonzero entries")
    sub.add_argument("--sigma", type=float, default=1e-3, help="noise standard deviation")
    sub.add_argument("--mu", type=float, default=2.0 ** -8,
                     help="trade-off weight (default 2^-8)")
    sub.add_argument("--encoder", choices=ENCODERS, default="gaussian")
    sub.add_argument("--x0", choices=X0_MODES, default="zero", help="starting point")
    sub.add_argument("--amplitudes", choices=[m.value for m in AmplitudeMode],
                     default="unit", help="spike amplitude distribution")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nbbl1",
        description="Nonmonotone Barzilai-Borwein solver experiments",
        epilog=_preset_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"nbbl1 {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="run one test problem",
                            epilog=_preset_help(),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
    solve.add_argument("--problem", required=True, help=f"one of {', '.join(CUTER_NAMES)}")
    solve.add_argument("--n", type=int, required=True, help="problem dimension")
    solve.add_argument("--mu", type=float, default=0.0, help="l1 trade-off weight")
    _add_config_flags(solve, "cuter")

    rec = subs.add_parser("cs-recover", help="sparse-recovery experiment",
                          epilog=_preset_help(),
                          formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_cs_flags(rec, 2048)
    _add_config_flags(rec, "cs")

    sweep = subs.add_parser("h-sweep", help="recovery quality across h values",
                            epilog=_preset_help(),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_cs_flags(sweep, 1024)
    sweep.add_argument("--h-min", dest="h_min", type=float, default=0.01)
    sweep.add_argument("--h-max", dest="h_max", type=float, default=1.0)
    sweep.add_argument("--h-points", dest="h_points", type=int, default=20,
                       help="log-spaced grid size")
    sweep.add_argument("--h-list", dest="h_list",
                       help="comma-separated h values (overrides the grid)")
    _add_config_flags(sweep, "cs")

    bench = subs.add_parser("bench", help="summary table over the test-problem suite",
                            epilog=_preset_help(),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
    bench.add_argument("--problems", default=",".join(BENCH_DIMS),
                       help="comma-separated problem names")
    bench.add_argument("--mus", default=",".join(str(m) for m in BENCH_MUS),
                       help="comma-separated mu values")
    bench.add_argument("--dims", default="",
                       help="per-problem dimension overrides, e.g. COSINE=1000,WOODS=200")
    _add_config_flags(bench, "cuter")

    replay = subs.add_parser("replay", help="re-run a recorded manifest")
    replay.add_argument("manifest", type=Path)
    replay.add_argument("--outdir", type=Path, default=Path("."))
    replay.add_argument("--no-plot", action="store_true")
    return parser


def _collect_params(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    if args.command == "solve":
        name = args.problem.upper()
        if name not in CUTER_NAMES:
            parser.error(f"unknown problem {args.problem!r}; choose from {', '.join(CUTER_NAMES)}")
        try:
            cuter_problem(name, args.n)
        except ValueError as exc:
            parser.error(str(exc))
        return {"problem": name, "n": args.n, "mu": args.mu}
    if args.command == "cs-recover":
        if args.m > args.n:
            parser.error(f"need m <= n, got m={args.m}, n={args.n}")
        if not 0 < args.p <= args.n:
            parser.error(f"need 0 < p <= n, got p={args.p}, n={args.n}")
        return {"n": args.n, "m": args.m, "p": args.p, "sigma": args.sigma,
                "mu": args.mu, "encoder": args.encoder, "x0": args.x0,
                "amplitudes": args.amplitudes}
    if args.command == "h-sweep":
        if args.h_list:
            h_values = [float(tok) for tok in args.h_list.split(",") if tok.strip()]
        else:
            if args.h_points < 1:
                parser.error("--h-points must be >= 1")
            h_values = np.logspace(
                np.log10(args.h_min), np.log10(args.h_max), args.h_points
            ).tolist()
        if not h_values:
            parser.error("empty h grid")
        for h in h_values:
            if not 0.0 < h <= 1.0:
                parser.error(f"h values must lie in (0, 1], got {h}")
        h_values = sorted(h_values)
        return {"h_values": h_values, "n": args.n, "m": args.m, "p": args.p,
                "sigma": args.sigma, "mu": args.mu, "encoder": args.encoder,
                "x0": args.x0}
    if args.command == "bench":
        problems = [tok.strip().upper() for tok in args.problems.split(",") if tok.strip()]
        for name in problems:
            if name not in CUTER_NAMES:
                parser.error(f"unknown problem {name!r}")
        mus = [float(tok) for tok in args.mus.split(",") if tok.strip()]
        dims = dict(BENCH_DIMS)
        if args.dims:
            for tok in args.dims.split(","):
                name, _, value = tok.partition("=")
                name = name.strip().upper()
                if name not in CUTER_NAMES or not value:
                    parser.error(f"bad --dims entry {tok!r}")
                dims[name] = int(value)
        return {"problems": problems, "mus": mus,
                "dims": {k: dims[k] for k in problems}}
    raise AssertionError(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "replay":
        manifest = json.loads(args.manifest.read_text())
        command = manifest["command"]
        cfg = _config_from_dict(manifest["config"])
        seed = manifest["seed"]
        params = manifest["params"]
        preset = manifest.get("preset", "cuter")
        plot = manifest.get("plot", True) and not args.no_plot
        run_dir = _make_run_dir(args.outdir, command, seed)
        _write_manifest(run_dir, command, seed, params, cfg, preset, plot)
        code = COMMANDS[command](params, cfg, seed, run_dir, plot)
        print(f"run dir: {run_dir}")
        return code

    params = _collect_params(args, parser)
    overrides = {name: getattr(args, name) for name in _CONFIG_FLAGS}
    cfg = resolve_config(args.preset, overrides)
    plot = not args.no_plot
    run_dir = _make_run_dir(args.outdir, args.command, args.seed)
    _write_manifest(run_dir, args.command, args.seed, params, cfg, args.preset, plot)
    code = COMMANDS[args.command](params, cfg, args.seed, run_dir, plot)
    print(f"run dir: {run_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
