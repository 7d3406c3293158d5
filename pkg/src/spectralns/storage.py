"""On-disk formats: field snapshots, the CSV ledger, and text reports.

Snapshot layout (little-endian throughout):

    bytes 0-4   magic "SNSF1"
    bytes 5-8   n_points, uint32
    bytes 9-16  time, float64
    then 3 * n^3 complex coefficients as interleaved (re, im) float64,
    component-major, k_x slowest within a component, wavenumbers in
    FFT-standard order (0, 1, ..., n/2-1, -n/2, ..., -1)

The ledger is one CSV row per record with floats at 17 significant digits,
which round-trips float64 exactly.
"""

import csv
import struct
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord, EnergyLedger
from .grid import GridSpec, SpectralField
from .monitor import SpectrumProfile

SNAPSHOT_MAGIC = b"SNSF1"

LEDGER_COLUMNS = (
    "step",
    "t",
    "dt",
    "energy",
    "dissipation",
    "power_in",
    "max_velocity",
    "max_vorticity",
    "bkm_integral",
    "residual",
    "residual_accum",
)


def _g17(x: float) -> str:
    return f"{x:.17g}"


def write_snapshot(path, field: SpectralField, t: float) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = field.grid.n_points
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(struct.pack("<d", float(t)))
        fh.write(np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes())


def read_snapshot(path, dealias_rule: str = "two_thirds"):
    """Load (field, time) from a snapshot file.

    The format does not record the dealias rule, so the caller chooses the
    rule of the reconstructed grid (default two_thirds).
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:5] != SNAPSHOT_MAGIC:
        raise ValueError(
            f"{path}: bad snapshot magic {raw[:5]!r}, expected {SNAPSHOT_MAGIC!r}"
        )
    if len(raw) < 17:
        raise ValueError(f"{path}: truncated snapshot header")
    (n,) = struct.unpack("<I", raw[5:9])
    (t,) = struct.unpack("<d", raw[9:17])
    expected = 17 + 3 * n**3 * 16
    if len(raw) != expected:
        raise ValueError(
            f"{path}: snapshot payload is {len(raw)} bytes, expected {expected} "
            f"for n_points={n}"
        )
    coeffs = (
        np.frombuffer(raw, dtype="<c16", offset=17)
        .reshape(3, n, n, n)
        .astype(np.complex128)
    )
    return SpectralField(coeffs, GridSpec(n, dealias_rule)), t


def write_ledger(path, ledger: EnergyLedger) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEDGER_COLUMNS)
        for r in ledger:
            writer.writerow(
                [
                    r.step,
                    _g17(r.t),
                    _g17(r.dt),
                    _g17(r.energy),
                    _g17(r.dissipation),
                    _g17(r.power_in),
                    _g17(r.max_velocity),
                    _g17(r.max_vorticity),
                    _g17(r.bkm_integral),
                    _g17(r.residual),
                    _g17(r.residual_accum),
                ]
            )


def read_ledger(path) -> EnergyLedger:
    path = Path(path)
    ledger = EnergyLedger()
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != LEDGER_COLUMNS:
            raise ValueError(f"{path}: unexpected ledger header {header}")
        for row in reader:
            if len(row) != len(LEDGER_COLUMNS):
                raise ValueError(f"{path}: malformed ledger row {row}")
            ledger.append(
                DiagnosticsRecord(
                    step=int(row[0]),
                    t=float(row[1]),
                    dt=float(row[2]),
                    energy=float(row[3]),
                    dissipation=float(row[4]),
                    power_in=float(row[5]),
                    max_velocity=float(row[6]),
                    max_vorticity=float(row[7]),
                    bkm_integral=float(row[8]),
                    residual=float(row[9]),
                    residual_accum=float(row[10]),
                )
            )
    return ledger


def write_report(path, entries) -> None:
    """Plain `key: value` lines; floats at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, value in entries.items():
        if isinstance(value, float):
            value = _g17(value)
        lines.append(f"{key}: {value}")
    path.write_text("\n".join(lines) + "\n")


def write_convergence_report(path, report) -> None:
    """Key-value header plus a comma-separated samples table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"kind: {report.kind}",
        f"error_norm: {report.error_norm}",
        f"fitted_rate: {'none' if report.fitted_rate is None else _g17(report.fitted_rate)}",
        f"fit_r2: {'none' if report.fit_r2 is None else _g17(report.fit_r2)}",
        f"flags: {'; '.join(report.flags) if report.flags else 'none'}",
    ]
    if report.model_coeffs is not None:
        c_sp, c_tm, delta = report.model_coeffs
        lines.append(
            f"model: {_g17(c_sp)} * (1+K)^2 exp(-{_g17(delta)} K) + {_g17(c_tm)} * dt^4"
        )
    lines.append("")
    if report.kind == "combined":
        lines.append("n,dt,error,dominant_term")
        for (n, dt), err, dom in zip(
            report.parameters, report.errors, report.dominance or [""] * len(report.errors)
        ):
            lines.append(f"{n},{_g17(dt)},{_g17(err)},{dom}")
    else:
        name = "dt" if report.kind == "temporal" else "k_max"
        lines.append(f"{name},error")
        for p, err in zip(report.parameters, report.errors):
            p_txt = _g17(p) if isinstance(p, float) else str(p)
            lines.append(f"{p_txt},{_g17(err)}")
    path.write_text("\n".join(lines) + "\n")


def write_spectra(path, profiles) -> None:
    """Shell-spectrum series: one row per (t, shell)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "shell", "amplitude"])
        for p in profiles:
            for m, amp in zip(p.shell_m, p.amplitude):
                writer.writerow([_g17(p.t if p.t is not None else float("nan")), int(m), _g17(amp)])


def write_strip_fits(path, profiles) -> None:
    """Strip-fit series: one row per fitted profile."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "c_star", "delta", "r2", "window_lo", "window_hi"])
        for p in profiles:
            if p.fit_delta is None:
                continue
            writer.writerow(
                [
                    _g17(p.t if p.t is not None else float("nan")),
                    _g17(p.fit_c_star),
                    _g17(p.fit_delta),
                    _g17(p.fit_r2),
                    p.fit_window[0],
                    p.fit_window[1],
                ]
            )


def read_strip_fits(path):
    """Fit series back as bare profiles (fit fields and t only)."""
    path = Path(path)
    profiles = []
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        for row in reader:
            profiles.append(
                SpectrumProfile(
                    shell_m=np.array([], dtype=int),
                    amplitude=np.array([]),
                    t=float(row[0]),
                    fit_c_star=float(row[1]),
                    fit_delta=float(row[2]),
                    fit_window=(int(row[4]), int(row[5])),
                    fit_r2=float(row[3]),
                )
            )
    return profiles
