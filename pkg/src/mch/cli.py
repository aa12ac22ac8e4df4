"""
Command-line entry point ``mch``.

Subcommands::

    mch simulate --config run.ini [--out DIR] [--seed N] [--stride K]
    mch verify SUITE
    mch besov SNAPSHOT [--s S] [--p P] [--r R] [--component I]
    mch blowup-scan --config scan.ini [--out DIR] [--seed N]

Exit codes: 0 success, 1 configuration or I/O error, 2 steepening alert
(artifacts are still written), 3 solver failure (non-finite state or CFL
violation; artifacts up to the failure are written).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import besov as bv
from . import snapshot
from .config import ConfigError, RunConfig, load
from .diagnostics import SnapshotWriter, blowup_scan, run_monitored, write_scan_csv, write_trajectory_csv
from .verify import SUITES, run_suite

EXIT_OK, EXIT_ERROR, EXIT_ALERT, EXIT_SOLVER = 0, 1, 2, 3


def _fail(msg: str) -> int:
    print(f"mch: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _workers() -> int:
    raw = os.environ.get("MCH_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _load(args) -> RunConfig:
    cfg = load(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "stride", None) is not None:
        if args.stride < 1:
            raise ConfigError(f"--stride must be >= 1, got {args.stride}")
        cfg = replace(cfg, output=replace(cfg.output, stride=args.stride))
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=args.out))
    return cfg


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"[output] directory: {out} is not writable")
    return out


def cmd_simulate(args) -> int:
    try:
        cfg = _load(args)
        out = _outdir(cfg)
        s0 = cfg.initial_state()
    except (ConfigError, OSError) as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(f"initial data: {exc}")
    writer = SnapshotWriter(out, cfg.output.stride)
    try:
        res = run_monitored(s0, cfg.solver, cfg.output.steepening_threshold, on_state=writer)
        if res.final_state is not None:
            writer.write(len(res.trace) - 1, res.final_state)
        writer.write_index()
        write_trajectory_csv(out / "trajectory.csv", res.trace)
    except OSError as exc:
        return _fail(str(exc))
    last = res.trace[-1]
    print(f"t={last.time:.6g} H={last.energy:.12g} I13={last.i13:.6g} I14={last.i14:.6g} I15={last.i15:.6g}")
    print("note: B^0_inf,inf monitors are discrete block-sup norms on a finite band")
    if res.status != "ok":
        print(f"solver stopped: {res.status}: {res.error}", file=sys.stderr)
        return EXIT_SOLVER
    if res.alert.triggered:
        print(f"steepening alert at t={res.alert.time:.6g}: slope ratio {res.alert.slope_ratio:.4g}, "
              f"amplitude ratio {res.alert.amplitude_ratio:.4g}")
        return EXIT_ALERT
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        return _fail(f"unknown suite {args.suite!r}; expected one of {', '.join(SUITES)}")
    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{args.suite}: {'all passed' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_ERROR


def cmd_besov(args) -> int:
    try:
        grid, comps = snapshot.read(args.snapshot)
    except (OSError, snapshot.SnapshotError) as exc:
        return _fail(f"cannot read snapshot {args.snapshot}: {exc}")
    if args.component is not None:
        if not 0 <= args.component < comps.shape[0]:
            return _fail(f"component {args.component} outside [0, {comps.shape[0] - 1}]")
        field = comps[args.component]
    else:
        field = comps[0] if comps.shape[0] == 1 else comps
    try:
        params = bv.BesovParams(args.s, args.p, args.r)
    except ValueError as exc:
        return _fail(str(exc))
    norms = bv.block_norms(grid, field, params.p)
    q = bv.block_indices(grid)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("q", "weight", "block_Lp", "cumulative_norm"))
    for i, (qi, nq) in enumerate(zip(q, norms)):
        cum = bv.sequence_norm(norms[: i + 1], params.s, params.r, q[: i + 1])
        w.writerow((int(qi), repr(float(2.0 ** (qi * params.s))), repr(float(nq)), repr(cum)))
    w.writerow(("total", "", "", repr(bv.sequence_norm(norms, params.s, params.r, q))))
    return EXIT_OK


def cmd_blowup_scan(args) -> int:
    try:
        cfg = _load(args)
        if not cfg.amplitudes:
            raise ConfigError("[scan] amplitudes: empty amplitude list")
        out = _outdir(cfg)
    except (ConfigError, OSError) as exc:
        return _fail(str(exc))
    rows = blowup_scan(cfg, cfg.amplitudes, cfg.solver, cfg.output.steepening_threshold, workers=_workers())
    path = out / "blowup_scan.csv"
    try:
        write_scan_csv(path, rows)
    except OSError as exc:
        return _fail(str(exc))
    write_scan_csv(sys.stdout, rows)
    return EXIT_OK


def _float(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


class _Parser(argparse.ArgumentParser):
    # usage errors share exit status 1 with config errors; 2 is reserved for alerts
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mch", description="Periodic pseudospectral toolkit for the modified "
                                "multi-component Camassa-Holm system.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one trajectory and write CSV + snapshots")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default=None, help="output directory (overrides [output] directory)")
    sim.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    sim.add_argument("--stride", type=int, default=None, help="snapshot stride in steps")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", help=", ".join(SUITES))
    ver.set_defaults(func=cmd_verify)

    bes = sub.add_parser("besov", help="block norms of a snapshot as CSV")
    bes.add_argument("snapshot")
    bes.add_argument("--s", type=float, default=0.0)
    bes.add_argument("--p", type=_float, default=2.0)
    bes.add_argument("--r", type=_float, default=2.0)
    bes.add_argument("--component", type=int, default=None,
                     help="component index; default measures all components jointly")
    bes.set_defaults(func=cmd_besov)

    scan = sub.add_parser("blowup-scan", help="amplitude scan of the blow-up monitors")
    scan.add_argument("--config", required=True)
    scan.add_argument("--out", default=None)
    scan.add_argument("--seed", type=int, default=None)
    scan.set_defaults(func=cmd_blowup_scan)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
