"""Convergence studies: spectral in resolution, fourth order in time.

Expected behavior being verified: error ~ C1 (1+K)^2 exp(-delta K) from
spatial truncation plus C2 dt^4 from the integrator, so refining K drops
the error exponentially until the dt term floors it, and vice versa.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .dynamics import InitialConditionSpec, PhysicsParams, make_initial_condition
from .grid import GridSpec, SpectralField, l2_norm_sq, spectral_embed
from .monitor import fit_strip, shell_spectrum
from .stepping import REACHED_T_END, SimulationState, StepControl, advance

FLAG_NON_SPECTRAL = "non-spectral behavior"
FLAG_ORDER_RANGE = "temporal order outside [3.5, 4.5]"
FLAG_NON_MONOTONE = "non-monotone error along schedule"
FLAG_MODEL_SKIPPED = "model fit skipped: fewer than two distinct pairs"
FLAG_EXACT = "zero error against the reference; rate fit skipped"


@dataclass(frozen=True)
class ConvergenceReport:
    """Fitted error behavior of a refinement study.

    For temporal studies `fitted_rate` is the log-log slope against dt
    (ideal: 4); for spatial studies it is the fitted exponential decay rate
    against K (ideal: the field's strip width delta).  Combined studies
    store the two-term model coefficients (c_spatial, c_temporal, delta)
    and a per-pair dominance tag instead.
    """

    kind: str
    parameters: tuple
    errors: tuple
    fitted_rate: float | None
    fit_r2: float | None
    error_norm: str = "l2"
    flags: tuple = ()
    model_coeffs: tuple | None = None
    dominance: tuple = ()


def observed_order(errors, parameters, model: str = "algebraic"):
    """Least-squares rate from an error sequence.

    algebraic: slope of log(err) vs log(param) (order-p methods give p).
    exponential: slope of log(err) vs param (exp(-delta K) decay gives
    -delta).  Returns (rate, r_squared).
    """
    e = np.asarray(errors, dtype=float)
    p = np.asarray(parameters, dtype=float)
    if e.shape != p.shape or e.ndim != 1:
        raise ValueError("errors and parameters must be 1-d and equally long")
    if len(e) < 3:
        raise ValueError("need at least three samples to fit a rate")
    if np.any(e <= 0.0):
        raise ValueError("errors must be positive to fit a rate")
    if model == "algebraic":
        if np.any(p <= 0.0):
            raise ValueError("parameters must be positive for the algebraic model")
        x = np.log(p)
    elif model == "exponential":
        x = p
    else:
        raise ValueError(f"unknown model {model!r}")
    if len(np.unique(x)) < 2:
        raise ValueError("parameters must not all coincide")
    y = np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(r2)


def _run_fixed(u0: SpectralField, params: PhysicsParams, t_end: float, dt: float):
    """Integrate to t_end at constant dt; the run must complete cleanly."""
    control = StepControl(t_end=t_end, fixed_dt=dt, max_steps=10_000_000)
    state, reason = advance(SimulationState(field=u0), control, params)
    if reason != REACHED_T_END:
        raise RuntimeError(f"study run stopped early: {reason}")
    return state.field


def _l2_error(a: SpectralField, b: SpectralField) -> float:
    return float(np.sqrt(l2_norm_sq(SpectralField(a.coeffs - b.coeffs, a.grid))))


def temporal_study(
    ic: InitialConditionSpec,
    params: PhysicsParams,
    grid: GridSpec,
    t_final: float,
    dts,
    ref_refine: int = 8,
) -> ConvergenceReport:
    """Fixed-grid dt refinement against a dt_min/ref_refine reference run."""
    dts = sorted((float(d) for d in dts), reverse=True)
    if len(dts) < 3 or len(set(dts)) != len(dts):
        raise ValueError("need at least three distinct dt values")
    if t_final <= 0.0:
        raise ValueError("t_final must be > 0")
    if ref_refine < 2:
        raise ValueError("reference must be refined at least 2x")
    u0 = make_initial_condition(ic, grid)
    reference = _run_fixed(u0, params, t_final, min(dts) / ref_refine)
    errors = [
        _l2_error(_run_fixed(u0, params, t_final, dt), reference) for dt in dts
    ]
    if min(errors) == 0.0:
        return ConvergenceReport(
            kind="temporal",
            parameters=tuple(dts),
            errors=tuple(errors),
            fitted_rate=None,
            fit_r2=None,
            flags=(FLAG_EXACT,),
        )
    rate, r2 = observed_order(errors, dts, model="algebraic")
    flags = () if 3.5 <= rate <= 4.5 else (FLAG_ORDER_RANGE,)
    return ConvergenceReport(
        kind="temporal",
        parameters=tuple(dts),
        errors=tuple(errors),
        fitted_rate=rate,
        fit_r2=r2,
        flags=flags,
    )


def spatial_study(
    ic: InitialConditionSpec,
    params: PhysicsParams,
    grid_sizes,
    reference_n: int,
    t_final: float,
    dt: float,
    dealias_rule: str = "two_thirds",
) -> ConvergenceReport:
    """Resolution refinement at fixed small dt against the finest-grid run.

    Errors are measured in L2 after embedding each coarse solution into the
    reference spectral box.  `fitted_rate` is the decay rate delta of
    error ~ exp(-delta K) with K the retained cutoff of each grid.
    """
    sizes = sorted(int(n) for n in grid_sizes)
    if len(sizes) < 3 or len(set(sizes)) != len(sizes):
        raise ValueError("need at least three distinct grid sizes")
    if reference_n <= sizes[-1]:
        raise ValueError("reference grid must be finer than every tested grid")
    if reference_n < 4 * sizes[0]:
        raise ValueError("finest grid must be >= 4x the coarsest")
    ref_grid = GridSpec(reference_n, dealias_rule)
    reference = _run_fixed(
        make_initial_condition(ic, ref_grid), params, t_final, dt
    )
    cutoffs = []
    errors = []
    for n in sizes:
        g = GridSpec(n, dealias_rule)
        final = _run_fixed(make_initial_condition(ic, g), params, t_final, dt)
        cutoffs.append(g.k_max)
        errors.append(_l2_error(spectral_embed(final, ref_grid), reference))
    if min(errors) == 0.0:
        return ConvergenceReport(
            kind="spatial",
            parameters=tuple(cutoffs),
            errors=tuple(errors),
            fitted_rate=None,
            fit_r2=None,
            flags=(FLAG_EXACT,),
        )
    slope, r2 = observed_order(errors, cutoffs, model="exponential")
    flags = []
    if np.any(np.diff(errors) >= 0.0):
        flags.append(FLAG_NON_SPECTRAL)
    return ConvergenceReport(
        kind="spatial",
        parameters=tuple(cutoffs),
        errors=tuple(errors),
        fitted_rate=-slope,
        fit_r2=r2,
        flags=tuple(flags),
    )


def combined_study(
    ic: InitialConditionSpec,
    params: PhysicsParams,
    pairs,
    reference,
    t_final: float,
    dealias_rule: str = "two_thirds",
) -> ConvergenceReport:
    """Joint (n, dt) refinement with a two-term error model.

    Fits error ~ c_spatial (1+K)^2 exp(-delta K) + c_temporal dt^4 with
    nonnegative coefficients (delta taken from the reference field's strip
    fit) and reports which term dominates at each pair.
    """
    pairs = [(int(n), float(dt)) for n, dt in pairs]
    if not pairs:
        raise ValueError("need at least one (n, dt) pair")
    ref_n, ref_dt = int(reference[0]), float(reference[1])
    if ref_n <= max(n for n, _ in pairs):
        raise ValueError("reference grid must be finer than every tested pair")
    if ref_dt > min(dt for _, dt in pairs):
        raise ValueError("reference dt must not exceed any tested dt")
    ref_grid = GridSpec(ref_n, dealias_rule)
    reference_field = _run_fixed(
        make_initial_condition(ic, ref_grid), params, t_final, ref_dt
    )
    cutoffs = []
    errors = []
    for n, dt in pairs:
        g = GridSpec(n, dealias_rule)
        final = _run_fixed(make_initial_condition(ic, g), params, t_final, dt)
        cutoffs.append(g.k_max)
        errors.append(_l2_error(spectral_embed(final, ref_grid), reference_field))
    flags = []
    if np.any(np.diff(errors) >= 0.0):
        flags.append(FLAG_NON_MONOTONE)
    model_coeffs = None
    dominance = ()
    r2 = None
    if len(set(pairs)) < 2:
        flags.append(FLAG_MODEL_SKIPPED)
    else:
        delta = fit_strip(shell_spectrum(reference_field)).fit_delta
        basis = np.column_stack(
            [
                (1.0 + np.array(cutoffs)) ** 2 * np.exp(-delta * np.array(cutoffs)),
                np.array([dt for _, dt in pairs]) ** 4,
            ]
        )
        coeffs, _ = scipy.optimize.nnls(basis, np.array(errors))
        model = basis @ coeffs
        ss_res = float(np.sum((np.array(errors) - model) ** 2))
        ss_tot = float(np.sum((np.array(errors) - np.mean(errors)) ** 2))
        r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
        model_coeffs = (float(coeffs[0]), float(coeffs[1]), float(delta))
        dominance = tuple(
            "spatial" if coeffs[0] * b1 >= coeffs[1] * b2 else "temporal"
            for b1, b2 in basis
        )
    return ConvergenceReport(
        kind="combined",
        parameters=tuple(pairs),
        errors=tuple(errors),
        fitted_rate=None,
        fit_r2=r2,
        flags=tuple(flags),
        model_coeffs=model_coeffs,
        dominance=dominance,
    )


def estimate_temporal_constant(
    u0: SpectralField,
    params: PhysicsParams,
    dt: float,
    t_probe: float,
    order: int = 4,
) -> float:
    """Richardson probe for the dt^order error constant.

    Runs to t_probe at dt and dt/2; since err(dt) - err(dt/2) =
    c2 dt^order (1 - 2^-order) to leading order, the difference of the two
    solutions estimates c2.
    """
    coarse = _run_fixed(u0, params, t_probe, dt)
    fine = _run_fixed(u0, params, t_probe, dt / 2.0)
    diff = _l2_error(coarse, fine)
    return diff / ((1.0 - 2.0 ** (-order)) * dt**order)
