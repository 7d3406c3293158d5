"""Incompressible Navier-Stokes dynamics in spectral form.

The evolution equation for the Fourier coefficients is

    d/dt u_hat = N_hat(u) - nu |k|^2 u_hat + P(f_hat)

with N_hat(u) = -P(dealias(FFT[(u . grad) u])) and P the divergence-free
projection; the pressure is eliminated by P.  The advective products are
formed on the physical grid, everything else stays spectral.
"""

from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache

import numpy as np
import scipy.fft

from . import kernels
from .grid import (
    GridSpec,
    RealField,
    SpectralField,
    dealias,
    fft_workers,
    forward_transform,
    leray_project,
)

_IC_KINDS = ("taylor_green", "concentrated_vortex", "random_analytic")
_FORCING_KINDS = ("none", "steady_analytic", "concentrated_pulse")


@dataclass(frozen=True)
class ForcingSpec:
    """Body-force selection.

    kind "none" applies no forcing; "steady_analytic" is a time-independent
    single-scale analytic pattern (wavenumber ~ 1/length_scale, `center`
    unused); "concentrated_pulse" is a localized swirl around `center` with
    width `length_scale`, ramped in over `ramp_time`.
    """

    kind: str = "none"
    amplitude: float = 0.0
    length_scale: float = 1.0
    center: tuple = (np.pi, np.pi, np.pi)
    ramp_time: float = 0.0

    def __post_init__(self):
        if self.kind not in _FORCING_KINDS:
            raise ValueError(
                f"unknown forcing kind {self.kind!r}; expected one of {_FORCING_KINDS}"
            )
        if self.length_scale <= 0.0:
            raise ValueError("length_scale must be > 0")
        if self.ramp_time < 0.0:
            raise ValueError("ramp_time must be >= 0")
        c = tuple(float(v) for v in self.center)
        if len(c) != 3:
            raise ValueError("center must have three components")
        object.__setattr__(self, "center", c)


@dataclass(frozen=True)
class InitialConditionSpec:
    """Initial velocity selection.

    "taylor_green" is the classical single-shell vortex array;
    "concentrated_vortex" a Gaussian-envelope swirl centered mid-box with
    inverse-width `concentration`; "random_analytic" has coefficient
    magnitudes amplitude * exp(-|k| / concentration) with seeded random
    phases, so its spectral decay rate is 1/concentration.
    """

    kind: str = "taylor_green"
    amplitude: float = 1.0
    concentration: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _IC_KINDS:
            raise ValueError(
                f"unknown initial condition kind {self.kind!r}; "
                f"expected one of {_IC_KINDS}"
            )
        if self.concentration <= 0.0:
            raise ValueError("concentration must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")


@dataclass(frozen=True)
class PhysicsParams:
    """Viscosity, forcing, and the nonlinearity toggle.

    `nonlinearity=False` drops the advective term entirely, leaving the
    exactly solvable Stokes dynamics; the convergence harness uses this to
    compare against closed-form decay.
    """

    nu: float
    forcing: ForcingSpec = dataclass_field(default_factory=ForcingSpec)
    nonlinearity: bool = True

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ValueError("nu must be > 0")


def _periodic_radius_sq(coords, center):
    """Smooth periodic analogue of |x - c|^2: sum_i (2 sin((x_i - c_i)/2))^2."""
    r2 = np.zeros_like(coords[0])
    for x, c in zip(coords, center):
        s = 2.0 * np.sin(0.5 * (x - c))
        r2 += s * s
    return r2


def _swirl(coords, center):
    """Tangential swirl pattern around the z-axis through center."""
    x, y, _ = coords
    cx, cy, _ = center
    return (-np.sin(y - cy), np.sin(x - cx), np.zeros_like(x))


def make_initial_condition(spec: InitialConditionSpec, grid: GridSpec) -> SpectralField:
    """Build a divergence-free, dealiased initial spectrum."""
    n = grid.n_points
    a = spec.amplitude
    if spec.kind == "taylor_green":
        x, y, z = grid.coordinates
        vals = np.empty((3, n, n, n))
        vals[0] = a * np.sin(x) * np.cos(y) * np.cos(z)
        vals[1] = -a * np.cos(x) * np.sin(y) * np.cos(z)
        vals[2] = 0.0
        u_hat = forward_transform(RealField(vals, grid))
    elif spec.kind == "concentrated_vortex":
        center = (np.pi, np.pi, np.pi)
        coords = grid.coordinates
        env = a * np.exp(-spec.concentration * _periodic_radius_sq(coords, center))
        sw = _swirl(coords, center)
        vals = np.stack([env * sw[0], env * sw[1], env * sw[2]])
        u_hat = forward_transform(RealField(vals, grid))
    else:  # random_analytic
        envelope = a * np.exp(-np.sqrt(grid.ksq) / spec.concentration)
        coeffs = np.empty((3, n, n, n), dtype=np.complex128)
        for comp in range(3):
            theta = _hermitian_phases(grid, comp, spec.seed)
            coeffs[comp] = envelope * np.exp(1j * theta)
        coeffs[:, 0, 0, 0] = 0.0  # zero mean velocity
        u_hat = SpectralField(coeffs, grid)
    return leray_project(dealias(u_hat))


def _hash_phase(kx, ky, kz, comp: int, seed: int) -> np.ndarray:
    """Deterministic uniform phase in [0, 2pi) per integer wavenumber.

    A splitmix64-style integer mix keyed on (k, component, seed).  Being a
    pure function of the wavenumber, the same mode gets the same phase on
    every grid size, so coarse initial data is exactly the spectral
    restriction of fine initial data.
    """
    mask64 = (1 << 64) - 1
    h = np.uint64((seed * 0x9E3779B97F4A7C15) & mask64)
    h = h ^ (kx.astype(np.int64).view(np.uint64) * np.uint64(0xBF58476D1CE4E5B9))
    h = h ^ (ky.astype(np.int64).view(np.uint64) * np.uint64(0x94D049BB133111EB))
    h = h ^ (kz.astype(np.int64).view(np.uint64) * np.uint64(0xD6E8FEB86659FD93))
    h = h ^ np.uint64(((comp + 1) * 0xA24BAED4963EE407) & mask64)
    h = h ^ (h >> np.uint64(30))
    h = h * np.uint64(0xBF58476D1CE4E5B9)
    h = h ^ (h >> np.uint64(27))
    h = h * np.uint64(0x94D049BB133111EB)
    h = h ^ (h >> np.uint64(31))
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 * np.pi / 2.0**53)


def _hermitian_phases(grid: GridSpec, comp: int, seed: int) -> np.ndarray:
    """Phases theta with theta(-k) = -theta(k), so the field is real."""
    kx, ky, kz = grid.k_broadcast
    kxi = np.broadcast_to(kx, grid.ksq.shape)
    kyi = np.broadcast_to(ky, grid.ksq.shape)
    kzi = np.broadcast_to(kz, grid.ksq.shape)
    return _hash_phase(kxi, kyi, kzi, comp, seed) - _hash_phase(
        -kxi, -kyi, -kzi, comp, seed
    )


class ForcingEvaluator:
    """Precomputed spectral forcing pattern with its time dependence.

    value(t) returns the projected, dealiased forcing spectrum (None when
    kind is "none"); rate(t) its time derivative, used by the energy-ledger
    quadrature (None when the forcing is constant in time).
    """

    def __init__(self, spec: ForcingSpec, grid: GridSpec):
        self.spec = spec
        self.grid = grid
        self._pattern = None
        if spec.kind == "none":
            return
        n = grid.n_points
        coords = grid.coordinates
        if spec.kind == "steady_analytic":
            q = max(1, round(1.0 / spec.length_scale))
            x, y, z = coords
            vals = np.empty((3, n, n, n))
            vals[0] = spec.amplitude * np.sin(q * x) * np.cos(q * y) * np.cos(q * z)
            vals[1] = -spec.amplitude * np.cos(q * x) * np.sin(q * y) * np.cos(q * z)
            vals[2] = 0.0
        else:  # concentrated_pulse
            width_sq = spec.length_scale**2
            env = spec.amplitude * np.exp(
                -_periodic_radius_sq(coords, spec.center) / width_sq
            )
            sw = _swirl(coords, spec.center)
            vals = np.stack([env * sw[0], env * sw[1], env * sw[2]])
        self._pattern = leray_project(dealias(forward_transform(RealField(vals, grid))))

    def _ramp(self, t: float) -> float:
        if self.spec.kind != "concentrated_pulse" or self.spec.ramp_time <= 0.0:
            return 1.0
        return min(1.0, t / self.spec.ramp_time)

    def value(self, t: float):
        if self._pattern is None:
            return None
        r = self._ramp(t)
        if r == 1.0:
            return self._pattern
        return SpectralField(self._pattern.coeffs * r, self.grid)

    def rate(self, t: float):
        if self._pattern is None or self.spec.kind != "concentrated_pulse":
            return None
        rt = self.spec.ramp_time
        if rt <= 0.0 or t >= rt:
            return None
        return SpectralField(self._pattern.coeffs * (1.0 / rt), self.grid)


@lru_cache(maxsize=8)
def _cached_evaluator(spec: ForcingSpec, grid: GridSpec) -> ForcingEvaluator:
    return ForcingEvaluator(spec, grid)


def eval_forcing(spec: ForcingSpec, t: float, grid: GridSpec):
    """Projected, dealiased forcing spectrum at time t (None for kind "none")."""
    return _cached_evaluator(spec, grid).value(t)


def nonlinear_term(field: SpectralField) -> SpectralField:
    """N_hat(u) = -P(dealias(FFT[(u . grad) u])), products on the physical grid.

    The input must be dealiased; then the 2/3 rule guarantees the retained
    modes of the product are alias-free, which is what makes the discrete
    nonlinearity exactly energy-neutral.
    """
    g = field.grid
    n = g.n_points
    w = fft_workers()
    kx, ky, kz = g.k_broadcast
    with np.errstate(over="ignore", invalid="ignore"):
        u_phys = np.ascontiguousarray(
            scipy.fft.ifftn(field.coeffs, axes=(1, 2, 3), norm="forward", workers=w).real
        )
        d_hat = np.empty((3, 3, n, n, n), dtype=np.complex128)
        for j in range(3):
            cj = field.coeffs[j]
            d_hat[0, j] = (1j * kx) * cj
            d_hat[1, j] = (1j * ky) * cj
            d_hat[2, j] = (1j * kz) * cj
        du = np.ascontiguousarray(
            scipy.fft.ifftn(d_hat, axes=(2, 3, 4), norm="forward", workers=w).real
        )
        adv = kernels.advective_sum(u_phys, du)
        adv_hat = scipy.fft.fftn(adv, axes=(1, 2, 3), norm="forward", workers=w)
        masked = kernels.apply_mask(adv_hat, g.dealias_mask)
        return SpectralField(-kernels.project(masked, g.k1d), g)


def rhs(
    field: SpectralField,
    t: float,
    params: PhysicsParams,
    forcing: ForcingEvaluator | None = None,
) -> SpectralField:
    """Full spectral right-hand side at time t.

    A prebuilt ForcingEvaluator can be passed to avoid repeated pattern
    construction; otherwise one is built (and cached) from params.forcing.
    """
    g = field.grid
    if forcing is None:
        forcing = _cached_evaluator(params.forcing, g)
    f = forcing.value(t)
    with np.errstate(over="ignore", invalid="ignore"):
        nl = nonlinear_term(field).coeffs if params.nonlinearity else None
        out = kernels.combine_rhs(
            nl, field.coeffs, None if f is None else f.coeffs, g.k1d, params.nu
        )
    return SpectralField(out, g)
