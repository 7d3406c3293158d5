"""Periodic cubic grid and spectral field algebra.

Conventions, fixed once here and relied on everywhere else:

* domain [0, 2pi]^3, n uniform points per axis, dx = 2pi/n
* forward transform carries the 1/n^3 factor, so u_hat[0,0,0] is the
  spatial mean of the field
* integer wavenumbers in FFT-standard order (0, 1, ..., n/2-1, -n/2, ..., -1)
* Parseval with this normalization:  integral |u|^2 dx = (2pi)^3 sum_k |u_hat_k|^2

Fields are treated as immutable: every operation returns a new field.
"""

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from . import kernels

TWO_PI = 2.0 * np.pi
BOX_VOLUME = TWO_PI**3

_DEALIAS_RULES = ("two_thirds", "none")


def fft_workers() -> int:
    """Worker-thread cap for the transforms, from SPECTRALNS_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("SPECTRALNS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    """Cubic grid resolution and dealiasing rule."""

    n_points: int
    dealias_rule: str = "two_thirds"

    def __post_init__(self):
        if self.n_points < 4 or self.n_points % 2 != 0:
            raise ValueError(
                f"n_points must be even and >= 4, got {self.n_points}"
            )
        if self.dealias_rule not in _DEALIAS_RULES:
            raise ValueError(
                f"unknown dealias_rule {self.dealias_rule!r}; "
                f"expected one of {_DEALIAS_RULES}"
            )

    @property
    def dx(self) -> float:
        return TWO_PI / self.n_points

    @property
    def k_max(self) -> int:
        """Largest retained |k_i| after dealiasing."""
        if self.dealias_rule == "two_thirds":
            return self.n_points // 3
        return self.n_points // 2 - 1

    @cached_property
    def k1d(self) -> np.ndarray:
        """Integer wavenumbers along one axis, FFT order, as float64."""
        return np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)

    @cached_property
    def ksq(self) -> np.ndarray:
        kx, ky, kz = self.k_broadcast
        return kx * kx + ky * ky + kz * kz

    @property
    def k_broadcast(self):
        k = self.k1d
        return k[:, None, None], k[None, :, None], k[None, None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """1.0 on retained modes (all |k_i| <= k_max), 0.0 elsewhere."""
        keep = np.abs(self.k1d) <= self.k_max
        mask = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
        return mask.astype(np.float64)

    @cached_property
    def shell_index(self) -> np.ndarray:
        """Shell bin per mode: m such that m < |k| <= m+1, for m in [0, k_max).

        k = 0 and modes beyond the largest complete shell get -1.
        """
        kmag = np.sqrt(self.ksq)
        idx = np.ceil(kmag).astype(np.int32) - 1
        idx[kmag == 0.0] = -1
        idx[idx >= self.k_max] = -1
        return np.ascontiguousarray(idx)

    @cached_property
    def coordinates(self):
        """Meshgrid (X, Y, Z) of grid-point coordinates, 'ij' indexing."""
        x = np.arange(self.n_points) * self.dx
        return np.meshgrid(x, x, x, indexing="ij")


@dataclass(frozen=True)
class RealField:
    """Velocity samples on the grid: values[c, i, j, k], c the component."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        n = self.grid.n_points
        if vals.shape != (3, n, n, n):
            raise ValueError(f"expected shape (3, {n}, {n}, {n}), got {vals.shape}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a velocity field: coeffs[c, kx, ky, kz]."""

    coeffs: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        n = self.grid.n_points
        if c.shape != (3, n, n, n):
            raise ValueError(f"expected shape (3, {n}, {n}, {n}), got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        n = grid.n_points
        return cls(np.zeros((3, n, n, n), dtype=np.complex128), grid)


def forward_transform(field: RealField) -> SpectralField:
    """Real samples -> Fourier coefficients (1/n^3 normalization)."""
    if not np.all(np.isfinite(field.values)):
        raise ValueError("non-finite values in real field: state has diverged")
    coeffs = scipy.fft.fftn(
        field.values, axes=(1, 2, 3), norm="forward", workers=fft_workers()
    )
    return SpectralField(coeffs, field.grid)


def inverse_transform(field: SpectralField) -> RealField:
    """Fourier coefficients -> real samples.

    The input must be Hermitian-symmetric; the imaginary residue of the
    inverse transform is checked against a 1e-12 relative tolerance and
    discarded.
    """
    w = scipy.fft.ifftn(
        field.coeffs, axes=(1, 2, 3), norm="forward", workers=fft_workers()
    )
    re = np.ascontiguousarray(w.real)
    scale = max(float(np.max(np.abs(re))), 1e-30)
    residue = float(np.max(np.abs(w.imag)))
    if residue > 1e-12 * scale:
        raise ValueError(
            f"imaginary residue {residue:.3e} exceeds 1e-12 relative to field "
            f"scale {scale:.3e}: coefficients are not Hermitian-symmetric"
        )
    return RealField(re, field.grid)


def leray_project(field: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: c -= k (k . c)/|k|^2, k=0 unchanged."""
    return SpectralField(kernels.project(field.coeffs, field.grid.k1d), field.grid)


def dealias(field: SpectralField) -> SpectralField:
    """Zero all modes with any |k_i| > k_max."""
    return SpectralField(
        kernels.apply_mask(field.coeffs, field.grid.dealias_mask), field.grid
    )


def curl(field: SpectralField) -> SpectralField:
    """Vorticity spectrum: omega_hat = i k x u_hat."""
    c = field.coeffs
    kx, ky, kz = field.grid.k_broadcast
    out = np.empty_like(c)
    out[0] = 1j * (ky * c[2] - kz * c[1])
    out[1] = 1j * (kz * c[0] - kx * c[2])
    out[2] = 1j * (kx * c[1] - ky * c[0])
    return SpectralField(out, field.grid)


def l2_norm_sq(field: SpectralField) -> float:
    """integral |u|^2 dx = (2pi)^3 sum_k |u_hat_k|^2."""
    c = field.coeffs
    return BOX_VOLUME * float(np.sum(c.real * c.real + c.imag * c.imag))


def grad_norm_sq(field: SpectralField) -> float:
    """integral |grad u|^2 dx = (2pi)^3 sum_k |k|^2 |u_hat_k|^2."""
    c = field.coeffs
    mag2 = c.real * c.real + c.imag * c.imag
    return BOX_VOLUME * float(np.sum(field.grid.ksq * mag2))


def sobolev_norm(field: SpectralField, order: float) -> float:
    """((2pi)^3 sum_k (1+|k|^2)^order |u_hat_k|^2)^(1/2)."""
    c = field.coeffs
    mag2 = c.real * c.real + c.imag * c.imag
    weight = (1.0 + field.grid.ksq) ** order
    return float(np.sqrt(BOX_VOLUME * np.sum(weight * mag2)))


def divergence_max(field: SpectralField) -> float:
    """max_k |k . u_hat_k|, the spectral divergence residue."""
    return kernels.max_divergence(field.coeffs, field.grid.k1d)


def hermitian_defect(field: SpectralField) -> float:
    """max_k |u_hat_k - conj(u_hat_{-k})|; zero for transforms of real fields."""
    c = field.coeffs
    n = field.grid.n_points
    rev = (-np.arange(n)) % n
    mirrored = c[:, rev][:, :, rev][:, :, :, rev]
    return float(np.max(np.abs(c - np.conj(mirrored))))


def spectral_restrict(field: SpectralField, coarse: GridSpec) -> SpectralField:
    """Keep the modes representable on `coarse`, dropping the rest."""
    return _remap(field, coarse)


def spectral_embed(field: SpectralField, fine: GridSpec) -> SpectralField:
    """Zero-pad the retained modes into the spectral box of `fine`."""
    if fine.n_points < field.grid.n_points:
        raise ValueError("embedding target must not be coarser than the source")
    return _remap(field, fine)


def _remap(field: SpectralField, target: GridSpec) -> SpectralField:
    n_src = field.grid.n_points
    n_dst = target.n_points
    half = min(n_src, n_dst) // 2
    modes = np.concatenate([np.arange(0, half), np.arange(-half + 1, 0)])
    src_idx = modes % n_src
    dst_idx = modes % n_dst
    out = np.zeros((3, n_dst, n_dst, n_dst), dtype=np.complex128)
    out[np.ix_(range(3), dst_idx, dst_idx, dst_idx)] = field.coeffs[
        np.ix_(range(3), src_idx, src_idx, src_idx)
    ]
    return SpectralField(out, target)
