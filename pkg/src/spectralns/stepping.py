"""Classical RK4 time stepping with CFL-adaptive step control.

The run loop reuses the right-hand side evaluated at each accepted state
both as the first RK4 stage of the next step and as the endpoint
derivative for the energy-ledger quadrature, so the bookkeeping adds no
extra RHS evaluations.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics
from .dynamics import ForcingEvaluator, PhysicsParams, _cached_evaluator, rhs
from .grid import SpectralField

REACHED_T_END = "reached_t_end"
MAX_STEPS = "max_steps"
DT_UNDERFLOW = "dt_underflow"
DIVERGED = "diverged"

STOP_REASONS = (REACHED_T_END, MAX_STEPS, DT_UNDERFLOW, DIVERGED)

# RK4 stage offsets and combination weights
_STAGE_C = (0.5, 0.5, 1.0)
_WEIGHTS = (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)


@dataclass(frozen=True)
class StepControl:
    """Step-size policy and run horizon.

    With `fixed_dt` set the CFL logic is bypassed entirely; the convergence
    studies rely on this to hold dt constant across runs.
    """

    t_end: float
    cfl_number: float = 0.5
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    max_steps: int = 1_000_000
    fixed_dt: float | None = None

    def __post_init__(self):
        if not 0.0 < self.cfl_number <= 1.0:
            raise ValueError("cfl_number must be in (0, 1]")
        if self.dt_min <= 0.0 or self.dt_max < self.dt_min:
            raise ValueError("need 0 < dt_min <= dt_max")
        if self.t_end < 0.0:
            raise ValueError("t_end must be >= 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.fixed_dt is not None and self.fixed_dt <= 0.0:
            raise ValueError("fixed_dt must be > 0")


@dataclass(frozen=True)
class SimulationState:
    """Velocity spectrum plus the running scalars that define a run position."""

    field: SpectralField
    t: float = 0.0
    step: int = 0
    dt: float = 0.0
    bkm_accum: float = 0.0
    diverged: bool = False


def _rk4_field(
    u: SpectralField,
    t: float,
    dt: float,
    params: PhysicsParams,
    forcing: ForcingEvaluator,
    k1: SpectralField | None = None,
) -> SpectralField:
    """One classical RK4 step on the spectral coefficients."""
    from . import kernels

    g = u.grid
    c = u.coeffs
    if k1 is None:
        k1 = rhs(u, t, params, forcing)
    with np.errstate(over="ignore", invalid="ignore"):
        u2 = SpectralField(c + (_STAGE_C[0] * dt) * k1.coeffs, g)
        k2 = rhs(u2, t + _STAGE_C[0] * dt, params, forcing)
        u3 = SpectralField(c + (_STAGE_C[1] * dt) * k2.coeffs, g)
        k3 = rhs(u3, t + _STAGE_C[1] * dt, params, forcing)
        u4 = SpectralField(c + (_STAGE_C[2] * dt) * k3.coeffs, g)
        k4 = rhs(u4, t + _STAGE_C[2] * dt, params, forcing)
        new = c + dt * (
            _WEIGHTS[0] * k1.coeffs
            + _WEIGHTS[1] * k2.coeffs
            + _WEIGHTS[2] * k3.coeffs
            + _WEIGHTS[3] * k4.coeffs
        )
        # enforce the field invariants against drift
        new = kernels.project(kernels.apply_mask(new, g.dealias_mask), g.k1d)
    return SpectralField(new, g)


def rk4_step(
    state: SimulationState, dt: float, params: PhysicsParams
) -> SimulationState:
    """Advance one step of size dt; a non-finite result sets `diverged`."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    forcing = _cached_evaluator(params.forcing, state.field.grid)
    new_field = _rk4_field(state.field, state.t, dt, params, forcing)
    bad = not np.all(np.isfinite(new_field.coeffs))
    return replace(
        state,
        field=new_field,
        t=state.t + dt,
        step=state.step + 1,
        dt=dt,
        diverged=state.diverged or bad,
    )


def _cfl_candidate(
    umax: float, grid, control: StepControl, params: PhysicsParams
) -> float:
    """Unclamped dt: min of the advective CFL bound and the viscous limit."""
    advective = control.cfl_number * grid.dx / max(umax, 1e-12)
    viscous = control.cfl_number * 2.0 / (params.nu * grid.k_max**2)
    return min(advective, viscous)


def cfl_dt(
    state: SimulationState,
    control: StepControl,
    params: PhysicsParams,
    umax: float | None = None,
) -> float:
    """CFL step size clamped into [dt_min, dt_max]."""
    if umax is None:
        umax = diagnostics.max_velocity(state.field)
    raw = _cfl_candidate(umax, state.field.grid, control, params)
    return min(max(raw, control.dt_min), control.dt_max)


def advance(
    state: SimulationState,
    control: StepControl,
    params: PhysicsParams,
    observers=(),
):
    """Run until t_end, max_steps, dt underflow, or divergence.

    Observers are called as observer(state, record) for the initial state
    and after every step.  Returns (terminal_state, stop_reason); divergence
    is a result, not an exception.
    """
    g = state.field.grid
    forcing = _cached_evaluator(params.forcing, g)
    nu = params.nu
    guard = 1e-12 * max(1.0, control.t_end)

    def measure(field: SpectralField, t: float):
        dudt = rhs(field, t, params, forcing)
        f = forcing.value(t)
        vals = {
            "rhs": dudt,
            "energy": diagnostics.kinetic_energy(field),
            "dissipation": diagnostics.dissipation_rate(field, nu),
            "power": diagnostics.power_input(field, f),
            "umax": diagnostics.max_velocity(field),
            "wmax": diagnostics.max_vorticity(field),
            "d_rate": diagnostics.dissipation_time_derivative(field, dudt, nu),
            "p_rate": diagnostics.power_time_derivative(
                field, dudt, f, forcing.rate(t)
            ),
        }
        return vals

    cur = measure(state.field, state.t)
    residual_accum = 0.0
    record = diagnostics.DiagnosticsRecord(
        step=state.step,
        t=state.t,
        dt=state.dt,
        energy=cur["energy"],
        dissipation=cur["dissipation"],
        power_in=cur["power"],
        max_velocity=cur["umax"],
        max_vorticity=cur["wmax"],
        bkm_integral=state.bkm_accum,
        residual=0.0,
        residual_accum=residual_accum,
    )
    for obs in observers:
        obs(state, record)
    if not (
        np.isfinite(cur["energy"])
        and np.isfinite(cur["umax"])
        and np.isfinite(cur["wmax"])
    ):
        return replace(state, diverged=True), DIVERGED

    while True:
        remaining = control.t_end - state.t
        if remaining <= guard:
            return state, REACHED_T_END
        if state.step >= control.max_steps:
            return state, MAX_STEPS
        if control.fixed_dt is not None:
            dt = control.fixed_dt
        else:
            raw = _cfl_candidate(cur["umax"], g, control, params)
            if raw < control.dt_min:
                return state, DT_UNDERFLOW
            dt = min(max(raw, control.dt_min), control.dt_max)
        if dt > remaining:
            dt = remaining

        new_field = _rk4_field(state.field, state.t, dt, params, forcing, k1=cur["rhs"])
        t_new = state.t + dt
        nxt = measure(new_field, t_new)
        bkm = diagnostics.bkm_update(state.bkm_accum, cur["wmax"], dt)
        residual = diagnostics.energy_residual(
            cur["energy"],
            nxt["energy"],
            cur["dissipation"],
            nxt["dissipation"],
            cur["power"],
            nxt["power"],
            dt,
            d_rate_prev=cur["d_rate"],
            d_rate_next=nxt["d_rate"],
            p_rate_prev=cur["p_rate"],
            p_rate_next=nxt["p_rate"],
        )
        residual_accum += abs(residual)
        diverged = not (
            np.isfinite(nxt["energy"])
            and np.isfinite(nxt["umax"])
            and np.isfinite(nxt["wmax"])
        )
        state = SimulationState(
            field=new_field,
            t=t_new,
            step=state.step + 1,
            dt=dt,
            bkm_accum=bkm,
            diverged=diverged,
        )
        record = diagnostics.DiagnosticsRecord(
            step=state.step,
            t=t_new,
            dt=dt,
            energy=nxt["energy"],
            dissipation=nxt["dissipation"],
            power_in=nxt["power"],
            max_velocity=nxt["umax"],
            max_vorticity=nxt["wmax"],
            bkm_integral=bkm,
            residual=residual,
            residual_accum=residual_accum,
        )
        for obs in observers:
            obs(state, record)
        if diverged:
            return state, DIVERGED
        cur = nxt
