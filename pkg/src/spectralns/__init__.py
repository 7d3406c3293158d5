"""Periodic-box incompressible Navier-Stokes pseudospectral toolkit.

Solves the viscous incompressible equations on [0, 2*pi)^3 with
Fourier collocation, dealiased physical-space products and RK4 time
stepping, and layers blowup diagnostics on top: an energy-balance
ledger, BKM vorticity accumulation, analyticity-strip fits of the
shell spectrum, and resolution/breakdown monitors.
"""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    MonitorConfig,
    OutputConfig,
    RunConfig,
    load_config,
    parse_config,
    render_config,
)
from .convergence import (
    ConvergenceReport,
    combined_study,
    estimate_temporal_constant,
    observed_order,
    spatial_study,
    temporal_study,
)
from .diagnostics import (
    DiagnosticsRecord,
    EnergyLedger,
    bkm_update,
    dissipation_rate,
    energy_residual,
    kinetic_energy,
    max_velocity,
    max_vorticity,
    power_input,
)
from .dynamics import (
    ForcingSpec,
    InitialConditionSpec,
    PhysicsParams,
    eval_forcing,
    make_initial_condition,
    nonlinear_term,
    rhs,
)
from .grid import (
    BOX_VOLUME,
    GridSpec,
    RealField,
    SpectralField,
    curl,
    dealias,
    divergence_max,
    forward_transform,
    hermitian_defect,
    inverse_transform,
    l2_norm_sq,
    leray_project,
    sobolev_norm,
    spectral_embed,
    spectral_restrict,
)
from .kernels import BACKEND
from .monitor import (
    BreakdownReport,
    BreakdownTrend,
    ResolutionCheck,
    SpectrumProfile,
    breakdown_monitor,
    breakdown_trend,
    fit_strip,
    resolution_check,
    resolution_loss_time,
    shell_spectrum,
    truncation_bound,
)
from .stepping import (
    DIVERGED,
    DT_UNDERFLOW,
    MAX_STEPS,
    REACHED_T_END,
    SimulationState,
    StepControl,
    advance,
    cfl_dt,
    rk4_step,
)
from .storage import (
    read_ledger,
    read_snapshot,
    write_ledger,
    write_report,
    write_snapshot,
)

__all__ = [
    "BACKEND",
    "BOX_VOLUME",
    "BreakdownReport",
    "BreakdownTrend",
    "ConfigError",
    "ConvergenceReport",
    "DIVERGED",
    "DT_UNDERFLOW",
    "DiagnosticsRecord",
    "EnergyLedger",
    "ForcingSpec",
    "GridSpec",
    "InitialConditionSpec",
    "MAX_STEPS",
    "MonitorConfig",
    "OutputConfig",
    "PhysicsParams",
    "REACHED_T_END",
    "RealField",
    "ResolutionCheck",
    "RunConfig",
    "SimulationState",
    "SpectralField",
    "SpectrumProfile",
    "StepControl",
    "advance",
    "bkm_update",
    "breakdown_monitor",
    "breakdown_trend",
    "cfl_dt",
    "combined_study",
    "curl",
    "dealias",
    "dissipation_rate",
    "divergence_max",
    "energy_residual",
    "estimate_temporal_constant",
    "eval_forcing",
    "fit_strip",
    "forward_transform",
    "hermitian_defect",
    "inverse_transform",
    "kinetic_energy",
    "l2_norm_sq",
    "leray_project",
    "load_config",
    "make_initial_condition",
    "max_velocity",
    "max_vorticity",
    "nonlinear_term",
    "observed_order",
    "parse_config",
    "power_input",
    "read_ledger",
    "read_snapshot",
    "render_config",
    "resolution_check",
    "resolution_loss_time",
    "rhs",
    "rk4_step",
    "shell_spectrum",
    "sobolev_norm",
    "spatial_study",
    "spectral_embed",
    "spectral_restrict",
    "temporal_study",
    "truncation_bound",
    "write_ledger",
    "write_report",
    "write_snapshot",
]
