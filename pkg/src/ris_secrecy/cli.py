"""Command-line entry point.

    ris-secrecy optimize     --config cfg.json --out DIR [--scheme proposed] [--seed S]
    ris-secrecy sweep-power  --config cfg.json --out DIR [--scheme NAME] [--trials N]
    ris-secrecy heatmap      --config cfg.json --out DIR [--scheme NAME] [--gain]
    ris-secrecy selftest

Exit codes: 0 success, 2 configuration/usage error, 3 numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import evaluation as ev
from .channel import dbm_to_watt
from .config import ConfigError, ScenarioConfig, load_config
from .evaluation import SchemeKind
from .optimizer import (NumericalError, alternating_optimize, objective_rate,
                        random_config)

log = logging.getLogger("ris_secrecy")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunReport:
    command: str
    config: dict
    seed: int
    n_trials: int
    wall_clock_s: float = 0.0
    outputs: list[str] = field(default_factory=list)
    convergence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "n_trials": self.n_trials,
                "wall_clock_s": round(self.wall_clock_s, 3), "outputs": self.outputs,
                "convergence": self.convergence, "config": self.config}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ris-secrecy", description="RIS-assisted spatial secrecy optimisation")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("optimize", "single AO run; writes v, phi and the trace"),
                        ("sweep-power", "maximum area rates versus transmit power"),
                        ("heatmap", "per-cell rate maps (or gain maps vs Random)")]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", required=True, type=Path)
        sp.add_argument("--seed", type=int, help="overrides monte_carlo.base_seed")
        sp.add_argument("--scheme", choices=[s.value for s in SchemeKind])
        sp.add_argument("--trials", type=int, help="overrides monte_carlo.n_trials")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "heatmap":
            sp.add_argument("--gain", action="store_true",
                            help="write percentage gain of --scheme over Random")
    st = sub.add_parser("selftest", help="run brute-force oracles on 2x2 instances")
    st.add_argument("-v", "--verbose", action="store_true")
    return p


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    mc = cfg.monte_carlo
    if args.seed is not None:
        mc = replace(mc, base_seed=args.seed)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials: must be >= 1")
        mc = replace(mc, n_trials=args.trials)
    resolved = cfg.to_dict()
    resolved["monte_carlo"] = {"n_trials": mc.n_trials, "base_seed": mc.base_seed}
    if args.scheme is not None:
        resolved["schemes"] = [args.scheme]
    schemes = [SchemeKind(s) for s in resolved["schemes"]]
    return replace(cfg, monte_carlo=mc, schemes=schemes, resolved=resolved)


def _write_csv(path: Path, header, rows, report: RunReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    report.outputs.append(str(path))


def cmd_optimize(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    scheme = cfg.schemes[0]
    sc = cfg.scenario
    rng = cfg.monte_carlo.trial_stream(0)
    H = sc.draw_bs_ris(rng.substream(ev._H_STREAM))
    sys_ = sc.system(H, dbm_to_watt(cfg.transmit_power_dbm))
    trace = None
    if scheme is SchemeKind.RANDOM:
        v, phi = random_config(sys_, rng.substream(ev._CONFIG_STREAM, scheme.code))
    else:
        target = sys_.without_eavesdropper() if scheme is SchemeKind.RX_ONLY else sys_
        v, phi, trace = alternating_optimize(target, cfg.ao)
    f = ev.fmt
    _write_csv(out / f"precoder_{scheme.value}.csv", ["index", "re", "im"],
               [[i, f(z.real), f(z.imag)] for i, z in enumerate(v)], report)
    _write_csv(out / f"phases_{scheme.value}.csv", ["index", "re", "im", "phase_rad"],
               [[i, f(z.real), f(z.imag), f(np.angle(z))] for i, z in enumerate(phi)], report)
    summary = {"scheme": scheme.value, "objective_bpshz": objective_rate(v, phi, sys_)}
    if trace is not None:
        rows = [[k + 1, f(o), f(p), n] for k, (o, p, n) in enumerate(
            zip(trace.objective_per_iteration, trace.precoder_power, trace.mm_inner_iters))]
        _write_csv(out / f"trace_{scheme.value}.csv",
                   ["outer_iter", "objective_bpshz", "precoder_power", "mm_inner_iters"],
                   rows, report)
        summary.update(iterations=trace.iterations_used, converged=trace.converged,
                       monotone=trace.is_monotone())
    report.convergence = summary
    print(f"{scheme.value}: objective {summary['objective_bpshz']:.6f} bps/Hz")


def cmd_sweep(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    res = ev.power_sweep(cfg.scenario, cfg.schemes, cfg.power_grid_dbm, cfg.monte_carlo,
                         cfg.ao, cfg.heatmap_grid, cfg.fading_draws, cfg.max_mode,
                         cfg.warm_start)
    path = out / "power_sweep.csv"
    ev.write_power_sweep_csv(path, res)
    report.outputs.append(str(path))
    for s in res.schemes:
        print(f"{s.value:>9}: gap RX-Eve " + " ".join(f"{g:.3f}" for g in res.gap(s)))


def cmd_heatmap(cfg: ScenarioConfig, out: Path, report: RunReport, gain: bool) -> None:
    scheme = cfg.schemes[0]
    schemes = [scheme]
    if gain:
        if scheme is SchemeKind.RANDOM:
            raise ConfigError("--gain: choose an optimised --scheme to compare against random")
        schemes.append(SchemeKind.RANDOM)
    maps = ev.rate_heatmaps(schemes, cfg.scenario, cfg.monte_carlo, cfg.heatmap_grid,
                            cfg.transmit_power_dbm, cfg.ao, cfg.fading_draws)
    rx, eve = maps[scheme]
    if gain:
        for tag, m, base in (("rx", rx, maps[SchemeKind.RANDOM][0]),
                             ("eve", eve, maps[SchemeKind.RANDOM][1])):
            g = ev.gain_map(m, base)
            path = out / f"gain_{scheme.value}_vs_random_{tag}.csv"
            ev.write_gain_csv(path, m.area, g)
            report.outputs.append(str(path))
            print(f"{tag}: gain {np.nanmin(g):.1f}% .. {np.nanmax(g):.1f}%")
    else:
        for tag, m in (("rx", rx), ("eve", eve)):
            path = out / f"heatmap_{scheme.value}_{tag}.csv"
            ev.write_rate_map_csv(path, m)
            report.outputs.append(str(path))


def write_report(out: Path, report: RunReport) -> Path:
    path = out / "run_report.json"
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ris-secrecy: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "selftest":
        from .selftest import run_selftest
        return EXIT_OK if run_selftest() else EXIT_NUMERIC

    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out: Path = args.out
    report = RunReport(args.command, cfg.to_dict(), cfg.monte_carlo.base_seed,
                       cfg.monte_carlo.n_trials)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "optimize":
            cmd_optimize(cfg, out, report)
        elif args.command == "sweep-power":
            cmd_sweep(cfg, out, report)
        else:
            cmd_heatmap(cfg, out, report, args.gain)
        report.wall_clock_s = time.perf_counter() - t0
        path = write_report(out, report)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        print("files written before the failure:", file=sys.stderr)
        for p in report.outputs:
            print(f"  {p}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(report.outputs)} file(s) and {path}")
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())
