"""Spectral regularity monitoring and breakdown detection.

The analyticity-strip picture: while the solution stays regular its
coefficients obey |u_hat_k| <= C exp(-delta |k|) with delta the strip
width.  A log-linear fit of the shell-max spectrum tracks (C, delta) over
time; delta shrinking toward the grid scale signals loss of resolution,
and the energy-ledger residual crossing its budget marks the first time
the computed solution stops being trustworthy.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .diagnostics import EnergyLedger
from .grid import SpectralField

STOP_NONE = "none"
STOP_RESIDUAL = "residual_budget_exceeded"
STOP_ENERGY = "energy_threshold_exceeded"
STOP_NON_FINITE = "non_finite_value"

AMPLITUDE_FLOOR = 1e-30
MIN_FIT_SHELLS = 4


@dataclass(frozen=True)
class SpectrumProfile:
    """Shell spectrum {(m, amplitude)} with optional strip-fit results.

    Shell m collects modes with m < |k| <= m+1; `amplitude` is the shell
    statistic (max by default, rms optionally).  Fit fields stay None until
    fit_strip fills them.
    """

    shell_m: np.ndarray
    amplitude: np.ndarray
    t: float | None = None
    statistic: str = "max"
    fit_c_star: float | None = None
    fit_delta: float | None = None
    fit_window: tuple | None = None
    fit_r2: float | None = None


def shell_spectrum(
    field: SpectralField, statistic: str = "max", t: float | None = None
) -> SpectrumProfile:
    """Shell statistic of the coefficient magnitudes |u_hat_k| over m < |k| <= m+1."""
    g = field.grid
    n_shells = g.k_max
    idx = g.shell_index
    if statistic == "max":
        amp = kernels.shell_max(field.coeffs, idx, n_shells)
    elif statistic == "rms":
        c = field.coeffs
        mag2 = (
            c[0].real ** 2 + c[0].imag ** 2
            + c[1].real ** 2 + c[1].imag ** 2
            + c[2].real ** 2 + c[2].imag ** 2
        )
        valid = idx >= 0
        sums = np.bincount(idx[valid], weights=mag2[valid], minlength=n_shells)
        counts = np.bincount(idx[valid], minlength=n_shells)
        amp = np.sqrt(sums / np.maximum(counts, 1))
    else:
        raise ValueError(f"unknown shell statistic {statistic!r}")
    return SpectrumProfile(
        shell_m=np.arange(n_shells), amplitude=amp, t=t, statistic=statistic
    )


def default_fit_window(k_max: int) -> tuple:
    """Central fit window [k_max/4, 3 k_max/4], clear of both spectrum ends."""
    return (max(1, k_max // 4), (3 * k_max) // 4)


def fit_strip(profile: SpectrumProfile, window: tuple | None = None) -> SpectrumProfile:
    """Least-squares line on (m + 1/2, log amplitude) over the fit window.

    fit_delta = max(0, -slope), fit_c_star = exp(intercept).  Shells at or
    below the amplitude floor are dropped; fewer than four usable shells is
    an under-resolved spectrum and raises.
    """
    k_max = len(profile.shell_m)
    if window is None:
        window = default_fit_window(k_max)
    lo, hi = int(window[0]), int(window[1])
    sel = (
        (profile.shell_m >= lo)
        & (profile.shell_m <= hi)
        & (profile.amplitude > AMPLITUDE_FLOOR)
        & np.isfinite(profile.amplitude)
    )
    if int(np.count_nonzero(sel)) < MIN_FIT_SHELLS:
        raise ValueError(
            f"spectrum under-resolved: {int(np.count_nonzero(sel))} usable shells "
            f"in window [{lo}, {hi}], need {MIN_FIT_SHELLS}"
        )
    x = profile.shell_m[sel] + 0.5
    y = np.log(profile.amplitude[sel])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return replace(
        profile,
        fit_c_star=float(np.exp(intercept)),
        fit_delta=max(0.0, float(-slope)),
        fit_window=(lo, hi),
        fit_r2=r2,
    )


def truncation_bound(
    c_star: float, delta: float, cutoff: int, norm: str = "l2"
) -> float:
    """Spectral-tail estimate beyond |k| = cutoff from the fitted envelope.

    l2:   C (1 + K) exp(-delta K)
    linf: C (1 + K)^2 exp(-delta K)

    These are fitted estimates, not certified bounds: they extrapolate the
    strip fit, they do not prove it.
    """
    if delta <= 0.0:
        raise ValueError("delta must be > 0: no decay, no tail estimate")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    if norm == "l2":
        return c_star * (1.0 + cutoff) * math.exp(-delta * cutoff)
    if norm == "linf":
        return c_star * (1.0 + cutoff) ** 2 * math.exp(-delta * cutoff)
    raise ValueError(f"unknown norm {norm!r}; expected 'l2' or 'linf'")


@dataclass(frozen=True)
class ResolutionCheck:
    """Smallest adequate cutoff for a target accuracy, plus the dt check."""

    k_required: int
    epsilon: float
    c_star: float
    delta: float
    dt_ok: bool | None = None
    dt: float | None = None
    order: int = 4
    c2: float | None = None


def resolution_check(
    profile: SpectrumProfile,
    epsilon: float,
    dt: float | None = None,
    order: int = 4,
    c2: float | None = None,
) -> ResolutionCheck:
    """K_required = smallest K with C (1+K)^2 exp(-delta K) <= epsilon/2.

    Found by direct scan.  If dt is given, also checks the time-step budget
    c2 * dt^order <= epsilon/2 (c2 defaults to 1 unless supplied, e.g. from
    a two-dt Richardson probe).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be > 0")
    if profile.fit_delta is None or profile.fit_c_star is None:
        profile = fit_strip(profile)
    delta = profile.fit_delta
    c_star = profile.fit_c_star
    if delta <= 0.0:
        raise ValueError("fitted delta is not positive: spectrum shows no decay")
    target = 0.5 * epsilon
    k = 1
    while truncation_bound(c_star, delta, k, norm="linf") > target:
        k += 1
        if k > 10_000_000:
            raise ValueError("cutoff scan did not converge; delta too small")
    dt_ok = None
    if dt is not None:
        dt_ok = (1.0 if c2 is None else c2) * dt**order <= target
    return ResolutionCheck(
        k_required=k,
        epsilon=epsilon,
        c_star=c_star,
        delta=delta,
        dt_ok=dt_ok,
        dt=dt,
        order=order,
        c2=c2,
    )


@dataclass(frozen=True)
class BreakdownReport:
    """First time the computed solution stops satisfying the trust checks.

    t_num is the last time before the first violation of: residual_accum
    <= epsilon, energy <= energy_cap, all quantities finite.  When no
    violation occurs, stop_condition is "none" and t_num equals the
    requested horizon.
    """

    t_num: float
    stop_condition: str
    epsilon: float
    energy_cap: float
    energy_at_stop: float
    residual_accum_at_stop: float
    stop_step: int | None = None


def _record_violation(rec, epsilon: float, energy_cap: float) -> str | None:
    """Check one ledger row; ordering fixes the tie-break at equal steps."""
    finite = (
        np.isfinite(rec.energy)
        and np.isfinite(rec.residual_accum)
        and np.isfinite(rec.max_velocity)
        and np.isfinite(rec.max_vorticity)
    )
    if not finite:
        return STOP_NON_FINITE
    if rec.residual_accum > epsilon:
        return STOP_RESIDUAL
    if rec.energy > energy_cap:
        return STOP_ENERGY
    return None


def breakdown_monitor(
    ledger: EnergyLedger, epsilon: float, energy_cap: float, horizon: float
) -> BreakdownReport:
    """Scan the ledger in step order for the first trust violation."""
    if len(ledger) == 0:
        raise ValueError("ledger is empty")
    if epsilon <= 0.0 or energy_cap <= 0.0:
        raise ValueError("epsilon and energy_cap must be > 0")
    for i, rec in enumerate(ledger):
        cond = _record_violation(rec, epsilon, energy_cap)
        if cond is not None:
            t_num = ledger[i - 1].t if i > 0 else rec.t
            return BreakdownReport(
                t_num=t_num,
                stop_condition=cond,
                epsilon=epsilon,
                energy_cap=energy_cap,
                energy_at_stop=rec.energy,
                residual_accum_at_stop=rec.residual_accum,
                stop_step=rec.step,
            )
    last = ledger.last
    return BreakdownReport(
        t_num=horizon,
        stop_condition=STOP_NONE,
        epsilon=epsilon,
        energy_cap=energy_cap,
        energy_at_stop=last.energy,
        residual_accum_at_stop=last.residual_accum,
        stop_step=None,
    )


@dataclass(frozen=True)
class BreakdownTrend:
    """Tabulated T_num against refinement, with a stabilization verdict.

    `entries` holds (k_max, dt, t_num) rows.  When the t_num values agree
    within 10% the verdict is "stabilized" and `limit_estimate` is the
    intercept of a least-squares fit t_num(K) = T - a/K; otherwise the
    verdict is "not stabilized" and no limit is reported.
    """

    entries: tuple
    stabilized: bool
    limit_estimate: float | None
    monotone_increasing: bool
    monotone_decreasing: bool

    @property
    def verdict(self) -> str:
        return "stabilized" if self.stabilized else "not stabilized"


def breakdown_trend(entries) -> BreakdownTrend:
    """entries: iterable of (k_max, dt, BreakdownReport), increasing k_max."""
    rows = []
    for k_max, dt, report in entries:
        rows.append((int(k_max), float(dt), float(report.t_num)))
    if len(rows) < 2:
        raise ValueError("need at least two reports to assess a trend")
    ks = np.array([r[0] for r in rows], dtype=float)
    if np.any(np.diff(ks) <= 0):
        raise ValueError("entries must be ordered by increasing k_max")
    t_nums = np.array([r[2] for r in rows])
    t_hi = float(t_nums.max())
    spread = 0.0 if t_hi == 0.0 else float((t_nums.max() - t_nums.min()) / t_hi)
    stabilized = spread <= 0.10
    limit = None
    if stabilized:
        design = np.column_stack([np.ones_like(ks), 1.0 / ks])
        sol, *_ = np.linalg.lstsq(design, t_nums, rcond=None)
        limit = float(sol[0])
    diffs = np.diff(t_nums)
    return BreakdownTrend(
        entries=tuple(rows),
        stabilized=stabilized,
        limit_estimate=limit,
        monotone_increasing=bool(np.all(diffs > 0)),
        monotone_decreasing=bool(np.all(diffs < 0)),
    )


def resolution_loss_time(
    profiles, k_max: int, d_digits: int = 4
) -> float | None:
    """First profile time with fit_delta * k_max < ln(10) * d_digits.

    This is the "well resolved" companion check to the breakdown monitor: it
    flags when the fitted strip width stops covering d_digits decimal digits
    of spectral decay across the retained band.  None if never violated.
    """
    threshold = math.log(10.0) * d_digits
    for p in profiles:
        if p.fit_delta is None:
            continue
        if p.fit_delta * k_max < threshold:
            return p.t
    return None
