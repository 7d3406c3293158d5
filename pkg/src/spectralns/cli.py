"""Command-line interface.

Subcommands:

    run <config>                 integrate and write the run directory
    converge {spatial|temporal|combined} <config> ...
    analyze <run-dir>            re-derive the breakdown report from a ledger
    check-resolution <snapshot>  strip-fit a snapshot and check cutoff/dt budgets

Exit codes: 0 clean; 1 breakdown condition observed (a result, not a
failure); 2 configuration or file errors; 3 diverged; 4 dt underflow;
5 step budget exhausted.
"""

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config, render_config
from .convergence import combined_study, spatial_study, temporal_study
from .diagnostics import EnergyLedger, kinetic_energy
from .dynamics import make_initial_condition
from .kernels import BACKEND
from .monitor import (
    STOP_NONE,
    breakdown_monitor,
    fit_strip,
    resolution_check,
    resolution_loss_time,
    shell_spectrum,
)
from .stepping import (
    DIVERGED,
    DT_UNDERFLOW,
    MAX_STEPS,
    REACHED_T_END,
    SimulationState,
    advance,
)
from . import storage

EXIT_CLEAN = 0
EXIT_BREAKDOWN = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_DT_UNDERFLOW = 4
EXIT_MAX_STEPS = 5

_REASON_EXIT = {
    DIVERGED: EXIT_DIVERGED,
    DT_UNDERFLOW: EXIT_DT_UNDERFLOW,
    MAX_STEPS: EXIT_MAX_STEPS,
}


def _materialize_thresholds(cfg, e0: float):
    mon = cfg.monitor
    if mon.relative_to_initial_energy:
        return mon.epsilon * e0, mon.energy_cap * e0
    return mon.epsilon, mon.energy_cap


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out) if args.out else Path(cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective_config.cfg").write_text(render_config(cfg))

    u0 = make_initial_condition(cfg.initial_condition, cfg.grid)
    e0 = kinetic_energy(u0)
    epsilon, energy_cap = _materialize_thresholds(cfg, e0)

    records = []
    profiles = []
    snap_dir = out_dir / "snapshots"

    def collect(state, rec):
        records.append(rec)
        if cfg.output.snapshot_every and rec.step % cfg.output.snapshot_every == 0:
            storage.write_snapshot(
                snap_dir / f"snap_{rec.step:08d}.snsf", state.field, rec.t
            )
        if cfg.output.spectra_every and rec.step % cfg.output.spectra_every == 0:
            profile = shell_spectrum(state.field, cfg.monitor.statistic, t=rec.t)
            try:
                profile = fit_strip(profile, cfg.monitor.fit_window)
            except ValueError:
                pass  # under-resolved spectrum: keep the raw shells
            profiles.append(profile)

    state, reason = advance(
        SimulationState(field=u0), cfg.control, cfg.physics, observers=[collect]
    )

    full = EnergyLedger(records)
    thinned = EnergyLedger()
    for i, rec in enumerate(records):
        if rec.step % cfg.output.ledger_every == 0 or i == len(records) - 1:
            thinned.append(rec)
    storage.write_ledger(out_dir / "ledger.csv", thinned)
    storage.write_snapshot(snap_dir / "final.snsf", state.field, state.t)
    if profiles:
        storage.write_spectra(out_dir / "spectra.csv", profiles)
        storage.write_strip_fits(out_dir / "strip_fits.csv", profiles)

    report = breakdown_monitor(full, epsilon, energy_cap, horizon=cfg.control.t_end)
    loss_t = resolution_loss_time(profiles, cfg.grid.k_max, cfg.monitor.d_digits)
    entries = {
        "stop_reason": reason,
        "steps": state.step,
        "t_final": state.t,
        "energy_initial": e0,
        "energy_final": full.last.energy,
        "bkm_integral": full.last.bkm_integral,
        "t_num": report.t_num,
        "stop_condition": report.stop_condition,
        "stop_step": "none" if report.stop_step is None else report.stop_step,
        "epsilon": epsilon,
        "energy_cap": energy_cap,
        "energy_at_stop": report.energy_at_stop,
        "residual_accum_at_stop": report.residual_accum_at_stop,
        "resolution_loss_t": "none" if loss_t is None else loss_t,
        "kernel_backend": BACKEND,
    }
    storage.write_report(out_dir / "report.txt", entries)
    summary = dict(entries)
    summary["horizon"] = cfg.control.t_end
    summary["n_points"] = cfg.grid.n_points
    (out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2))

    for key, value in entries.items():
        print(f"{key}: {value}")
    if reason in _REASON_EXIT:
        return _REASON_EXIT[reason]
    if reason == REACHED_T_END and report.stop_condition != STOP_NONE:
        return EXIT_BREAKDOWN
    return EXIT_CLEAN


def _floats(text: str):
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str):
    return [int(p) for p in text.split(",") if p.strip()]


def _pairs(text: str):
    out = []
    for part in text.split(","):
        if not part.strip():
            continue
        n, _, dt = part.partition(":")
        out.append((int(n), float(dt)))
    return out


def _cmd_converge(args) -> int:
    cfg = load_config(args.config)
    ic = cfg.initial_condition
    physics = cfg.physics
    if args.mode == "temporal":
        if not args.dts:
            raise ConfigError("temporal mode needs --dts")
        report = temporal_study(
            ic, physics, cfg.grid, args.t_final, _floats(args.dts), args.ref_refine
        )
    elif args.mode == "spatial":
        if not (args.grids and args.reference and args.dt):
            raise ConfigError("spatial mode needs --grids, --reference and --dt")
        report = spatial_study(
            ic,
            physics,
            _ints(args.grids),
            args.reference,
            args.t_final,
            args.dt,
            dealias_rule=cfg.grid.dealias_rule,
        )
    else:
        if not (args.pairs and args.reference_pair):
            raise ConfigError("combined mode needs --pairs and --reference-pair")
        report = combined_study(
            ic,
            physics,
            _pairs(args.pairs),
            _pairs(args.reference_pair)[0],
            args.t_final,
            dealias_rule=cfg.grid.dealias_rule,
        )
    out_dir = Path(args.out) if args.out else Path(cfg.output.directory)
    path = out_dir / f"convergence_{args.mode}.txt"
    storage.write_convergence_report(path, report)
    print(f"kind: {report.kind}")
    if report.fitted_rate is not None:
        print(f"fitted_rate: {report.fitted_rate:.17g}")
    if report.fit_r2 is not None:
        print(f"fit_r2: {report.fit_r2:.17g}")
    for p, e in zip(report.parameters, report.errors):
        print(f"sample: {p} -> {e:.17g}")
    for flag in report.flags:
        print(f"flag: {flag}")
    print(f"report: {path}")
    return EXIT_CLEAN


def _cmd_analyze(args) -> int:
    run_dir = Path(args.run_dir)
    ledger_path = run_dir / "ledger.csv"
    if not ledger_path.exists():
        raise ConfigError(f"no ledger found at {ledger_path}")
    ledger = storage.read_ledger(ledger_path)
    summary = {}
    summary_path = run_dir / "summary.json"
    if summary_path.exists():
        summary = json.loads(summary_path.read_text())
    epsilon = args.epsilon if args.epsilon is not None else summary.get("epsilon")
    energy_cap = (
        args.energy_cap if args.energy_cap is not None else summary.get("energy_cap")
    )
    horizon = args.horizon if args.horizon is not None else summary.get("horizon")
    if epsilon is None or energy_cap is None:
        raise ConfigError(
            "no summary.json with thresholds; pass --epsilon and --energy-cap"
        )
    if horizon is None:
        horizon = ledger.last.t
    report = breakdown_monitor(ledger, float(epsilon), float(energy_cap), float(horizon))
    entries = {
        "rows": len(ledger),
        "t_last": ledger.last.t,
        "t_num": report.t_num,
        "stop_condition": report.stop_condition,
        "stop_step": "none" if report.stop_step is None else report.stop_step,
        "epsilon": float(epsilon),
        "energy_cap": float(energy_cap),
        "energy_at_stop": report.energy_at_stop,
        "residual_accum_at_stop": report.residual_accum_at_stop,
    }
    fits_path = run_dir / "strip_fits.csv"
    if fits_path.exists():
        profiles = storage.read_strip_fits(fits_path)
        n = summary.get("n_points")
        k_max = (
            int(n) // 3 if n else None
        )  # two_thirds assumed when the summary lacks it
        if profiles and k_max:
            loss_t = resolution_loss_time(profiles, k_max)
            entries["resolution_loss_t"] = "none" if loss_t is None else loss_t
    storage.write_report(run_dir / "analysis.txt", entries)
    for key, value in entries.items():
        print(f"{key}: {value}")
    return EXIT_CLEAN if report.stop_condition == STOP_NONE else EXIT_BREAKDOWN


def _cmd_check_resolution(args) -> int:
    field, t = storage.read_snapshot(args.snapshot)
    window = None
    if args.window:
        lo, _, hi = args.window.partition(",")
        window = (int(lo), int(hi))
    profile = fit_strip(shell_spectrum(field, args.statistic, t=t), window)
    check = resolution_check(
        profile, args.epsilon, dt=args.dt, order=args.order, c2=args.c2
    )
    k_have = field.grid.k_max
    resolved = k_have >= check.k_required and check.dt_ok is not False
    entries = {
        "t": t,
        "c_star": check.c_star,
        "delta": check.delta,
        "fit_r2": profile.fit_r2,
        "k_required": check.k_required,
        "k_available": k_have,
        "dt_ok": "not checked" if check.dt_ok is None else str(check.dt_ok).lower(),
        "resolved": str(resolved).lower(),
    }
    for key, value in entries.items():
        if isinstance(value, float):
            value = f"{value:.17g}"
        print(f"{key}: {value}")
    return EXIT_CLEAN if resolved else EXIT_BREAKDOWN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectralns",
        description="Pseudospectral incompressible Navier-Stokes solver "
        "with blowup diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured run")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="override the output directory")
    p_run.set_defaults(func=_cmd_run)

    p_conv = sub.add_parser("converge", help="convergence studies")
    p_conv.add_argument("mode", choices=("spatial", "temporal", "combined"))
    p_conv.add_argument("config")
    p_conv.add_argument("--t-final", type=float, required=True)
    p_conv.add_argument("--dts", help="temporal: comma-separated dt list")
    p_conv.add_argument("--ref-refine", type=int, default=8)
    p_conv.add_argument("--grids", help="spatial: comma-separated n list")
    p_conv.add_argument("--reference", type=int, help="spatial: reference n")
    p_conv.add_argument("--dt", type=float, help="spatial: fixed dt")
    p_conv.add_argument("--pairs", help="combined: n:dt,n:dt,...")
    p_conv.add_argument("--reference-pair", help="combined: n:dt")
    p_conv.add_argument("--out", help="override the output directory")
    p_conv.set_defaults(func=_cmd_converge)

    p_an = sub.add_parser("analyze", help="breakdown report from a stored ledger")
    p_an.add_argument("run_dir")
    p_an.add_argument("--epsilon", type=float)
    p_an.add_argument("--energy-cap", type=float)
    p_an.add_argument("--horizon", type=float)
    p_an.set_defaults(func=_cmd_analyze)

    p_ck = sub.add_parser(
        "check-resolution", help="cutoff and dt budgets from a snapshot"
    )
    p_ck.add_argument("snapshot")
    p_ck.add_argument("--epsilon", type=float, required=True)
    p_ck.add_argument("--dt", type=float)
    p_ck.add_argument("--order", type=int, default=4)
    p_ck.add_argument("--c2", type=float)
    p_ck.add_argument("--window", help="fit window 'lo,hi' (default auto)")
    p_ck.add_argument("--statistic", choices=("max", "rms"), default="max")
    p_ck.set_defaults(func=_cmd_check_resolution)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
