"""NumPy reference implementations of the pointwise field kernels.

These are the fallback backend for :mod:`spectralns.kernels`.  The compiled
Cython backend mirrors each function operation-for-operation (same
evaluation order, no FMA contraction), so the two backends agree bitwise.
All reductions here are max-reductions, which are exact and
order-independent; summation-type reductions live with the callers so that
ledger values do not depend on the backend.
"""

import numpy as np


def _broadcast_k(k1d):
    kx = k1d[:, None, None]
    ky = k1d[None, :, None]
    kz = k1d[None, None, :]
    return kx, ky, kz


def advective_sum(u, du):
    """adv[j] = sum_i u[i] * du[i, j] with du[i, j] = d_i u_j on the grid."""
    out = np.empty_like(u)
    for j in range(3):
        out[j] = u[0] * du[0, j] + u[1] * du[1, j] + u[2] * du[2, j]
    return out


def project(coeffs, k1d):
    """Leray projection: c_j -= k_j (k . c) / |k|^2 for k != 0.

    The k = 0 mode is untouched (the numerator vanishes there).  The
    quotient is written as an explicit reciprocal multiply: that is the
    rounding a complex-by-real division performs anyway (the divisor has
    no imaginary part), and spelling it out keeps the compiled backend
    bitwise-identical.
    """
    kx, ky, kz = _broadcast_k(k1d)
    ksq = kx * kx + ky * ky + kz * kz
    ksq[0, 0, 0] = 1.0
    inv = 1.0 / ksq
    d = (kx * coeffs[0] + ky * coeffs[1] + kz * coeffs[2]) * inv
    out = np.empty_like(coeffs)
    out[0] = coeffs[0] - kx * d
    out[1] = coeffs[1] - ky * d
    out[2] = coeffs[2] - kz * d
    return out


def combine_rhs(nonlin, u_hat, f_hat, k1d, nu):
    """rhs = nonlin - nu |k|^2 u_hat + f_hat (nonlin and f_hat may be None)."""
    kx, ky, kz = _broadcast_k(k1d)
    visc = nu * (kx * kx + ky * ky + kz * kz)
    out = np.empty_like(u_hat)
    for j in range(3):
        if nonlin is None:
            out[j] = -(visc * u_hat[j])
        else:
            out[j] = nonlin[j] - visc * u_hat[j]
        if f_hat is not None:
            out[j] = out[j] + f_hat[j]
    return out


def apply_mask(coeffs, mask):
    """Zero masked modes: coeffs * mask with mask entries 1.0 or 0.0."""
    return coeffs * mask


def max_magnitude(values):
    """max over grid points of sqrt(v_x^2 + v_y^2 + v_z^2)."""
    mag2 = values[0] * values[0] + values[1] * values[1] + values[2] * values[2]
    return float(np.sqrt(mag2.max()))


def max_divergence(coeffs, k1d):
    """max over modes of |k . c_k|."""
    kx, ky, kz = _broadcast_k(k1d)
    div = kx * coeffs[0] + ky * coeffs[1] + kz * coeffs[2]
    mag2 = div.real * div.real + div.imag * div.imag
    return float(np.sqrt(mag2.max()))


def shell_max(coeffs, shell_index, n_shells):
    """Per-shell max of sqrt(sum_c |c|^2); shell_index -1 marks excluded modes."""
    mag2 = (
        (coeffs[0].real * coeffs[0].real + coeffs[0].imag * coeffs[0].imag)
        + (coeffs[1].real * coeffs[1].real + coeffs[1].imag * coeffs[1].imag)
        + (coeffs[2].real * coeffs[2].real + coeffs[2].imag * coeffs[2].imag)
    )
    out = np.zeros(n_shells)
    valid = shell_index >= 0
    np.maximum.at(out, shell_index[valid], mag2[valid])
    return np.sqrt(out)
