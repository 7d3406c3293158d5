# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pointwise field kernels.

Operation-for-operation mirror of _kernels_py: same evaluation order per
element, compiled with FMA contraction disabled, so results match the NumPy
backend bitwise.  Single-threaded by design; determinism beats the last
factor of two here, and the FFTs dominate the step cost anyway.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def advective_sum(cnp.float64_t[:, :, :, ::1] u, cnp.float64_t[:, :, :, :, ::1] du):
    """adv[j] = sum_i u[i] * du[i, j] with du[i, j] = d_i u_j on the grid."""
    cdef Py_ssize_t nx = u.shape[1], ny = u.shape[2], nz = u.shape[3]
    cdef Py_ssize_t j, x, y, z
    out_arr = np.empty((3, nx, ny, nz), dtype=np.float64)
    cdef cnp.float64_t[:, :, :, ::1] out = out_arr
    for j in range(3):
        for x in range(nx):
            for y in range(ny):
                for z in range(nz):
                    out[j, x, y, z] = (
                        u[0, x, y, z] * du[0, j, x, y, z]
                        + u[1, x, y, z] * du[1, j, x, y, z]
                        + u[2, x, y, z] * du[2, j, x, y, z]
                    )
    return out_arr


def project(cnp.complex128_t[:, :, :, ::1] coeffs, cnp.float64_t[::1] k1d):
    """Leray projection: c_j -= k_j (k . c) / |k|^2 for k != 0.

    The arithmetic below mirrors the NumPy backend operation for
    operation, including the 0.0 * x terms a float64 operand picks up
    when the ufunc promotes it to complex128.  Those terms only decide
    the signs of zero results, but the parity contract is bitwise, so
    they stay.  Results are written through a float64 view to avoid any
    complex construction of the compiler's own.
    """
    cdef Py_ssize_t n = k1d.shape[0]
    cdef Py_ssize_t x, y, z, z2
    cdef double kx, ky, kz, ksq, inv
    cdef double c0re, c0im, c1re, c1im, c2re, c2im
    cdef double nre, nim, dre, dim, pre, pim
    out_arr = np.empty((3, n, n, n), dtype=np.complex128)
    cdef cnp.float64_t[:, :, :, ::1] out = out_arr.view(np.float64)
    for x in range(n):
        kx = k1d[x]
        for y in range(n):
            ky = k1d[y]
            for z in range(n):
                kz = k1d[z]
                z2 = 2 * z
                c0re = coeffs[0, x, y, z].real
                c0im = coeffs[0, x, y, z].imag
                c1re = coeffs[1, x, y, z].real
                c1im = coeffs[1, x, y, z].imag
                c2re = coeffs[2, x, y, z].real
                c2im = coeffs[2, x, y, z].imag
                ksq = kx * kx + ky * ky + kz * kz
                if ksq == 0.0:
                    ksq = 1.0
                # complex / real divides as a reciprocal multiply
                inv = 1.0 / ksq
                nre = ((kx * c0re - 0.0 * c0im) + (ky * c1re - 0.0 * c1im)
                       + (kz * c2re - 0.0 * c2im))
                nim = ((kx * c0im + 0.0 * c0re) + (ky * c1im + 0.0 * c1re)
                       + (kz * c2im + 0.0 * c2re))
                dre = nre * inv - nim * 0.0
                dim = nre * 0.0 + nim * inv
                pre = kx * dre - 0.0 * dim
                pim = kx * dim + 0.0 * dre
                out[0, x, y, z2] = c0re - pre
                out[0, x, y, z2 + 1] = c0im - pim
                pre = ky * dre - 0.0 * dim
                pim = ky * dim + 0.0 * dre
                out[1, x, y, z2] = c1re - pre
                out[1, x, y, z2 + 1] = c1im - pim
                pre = kz * dre - 0.0 * dim
                pim = kz * dim + 0.0 * dre
                out[2, x, y, z2] = c2re - pre
                out[2, x, y, z2 + 1] = c2im - pim
    return out_arr


def combine_rhs(nonlin, cnp.complex128_t[:, :, :, ::1] u_hat, f_hat,
                cnp.float64_t[::1] k1d, double nu):
    """rhs = nonlin - nu |k|^2 u_hat + f_hat (nonlin and f_hat may be None).

    Same promoted-operand arithmetic as project: the 0.0 terms replicate
    the NumPy float-times-complex ufunc so zero signs agree bitwise.
    """
    cdef Py_ssize_t n = k1d.shape[0]
    cdef Py_ssize_t j, x, y, z, z2
    cdef double kx, ky, kz, visc
    cdef double ure, uim, tre, tim, accre, accim
    cdef cnp.complex128_t[:, :, :, ::1] nl_view
    cdef cnp.complex128_t[:, :, :, ::1] f_view
    cdef bint have_nl = nonlin is not None
    cdef bint have_f = f_hat is not None
    if have_nl:
        nl_view = nonlin
    if have_f:
        f_view = f_hat
    out_arr = np.empty((3, n, n, n), dtype=np.complex128)
    cdef cnp.float64_t[:, :, :, ::1] out = out_arr.view(np.float64)
    for j in range(3):
        for x in range(n):
            kx = k1d[x]
            for y in range(n):
                ky = k1d[y]
                for z in range(n):
                    kz = k1d[z]
                    z2 = 2 * z
                    visc = nu * (kx * kx + ky * ky + kz * kz)
                    ure = u_hat[j, x, y, z].real
                    uim = u_hat[j, x, y, z].imag
                    tre = visc * ure - 0.0 * uim
                    tim = visc * uim + 0.0 * ure
                    if have_nl:
                        accre = nl_view[j, x, y, z].real - tre
                        accim = nl_view[j, x, y, z].imag - tim
                    else:
                        accre = -tre
                        accim = -tim
                    if have_f:
                        accre = accre + f_view[j, x, y, z].real
                        accim = accim + f_view[j, x, y, z].imag
                    out[j, x, y, z2] = accre
                    out[j, x, y, z2 + 1] = accim
    return out_arr


def apply_mask(cnp.complex128_t[:, :, :, ::1] coeffs, cnp.float64_t[:, :, ::1] mask):
    """Zero masked modes: coeffs * mask with mask entries 1.0 or 0.0.

    Promoted-operand arithmetic again; without the 0.0 terms the zeroed
    modes come out with different zero signs than the NumPy backend.
    """
    cdef Py_ssize_t n = mask.shape[0]
    cdef Py_ssize_t j, x, y, z, z2
    cdef double m, cre, cim
    out_arr = np.empty((3, n, n, n), dtype=np.complex128)
    cdef cnp.float64_t[:, :, :, ::1] out = out_arr.view(np.float64)
    for j in range(3):
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    z2 = 2 * z
                    m = mask[x, y, z]
                    cre = coeffs[j, x, y, z].real
                    cim = coeffs[j, x, y, z].imag
                    out[j, x, y, z2] = cre * m - cim * 0.0
                    out[j, x, y, z2 + 1] = cre * 0.0 + cim * m
    return out_arr


def max_magnitude(cnp.float64_t[:, :, :, ::1] values):
    """max over grid points of sqrt(v_x^2 + v_y^2 + v_z^2)."""
    cdef Py_ssize_t nx = values.shape[1], ny = values.shape[2], nz = values.shape[3]
    cdef Py_ssize_t x, y, z
    cdef double mag2, best = 0.0
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                mag2 = (values[0, x, y, z] * values[0, x, y, z]
                        + values[1, x, y, z] * values[1, x, y, z]
                        + values[2, x, y, z] * values[2, x, y, z])
                if mag2 > best or mag2 != mag2:
                    best = mag2
                    if mag2 != mag2:
                        return float(sqrt(mag2))
    return float(sqrt(best))


def max_divergence(cnp.complex128_t[:, :, :, ::1] coeffs, cnp.float64_t[::1] k1d):
    """max over modes of |k . c_k|."""
    cdef Py_ssize_t n = k1d.shape[0]
    cdef Py_ssize_t x, y, z
    cdef double kx, ky, kz, mag2, best = 0.0
    cdef double complex div
    for x in range(n):
        kx = k1d[x]
        for y in range(n):
            ky = k1d[y]
            for z in range(n):
                kz = k1d[z]
                div = (kx * coeffs[0, x, y, z] + ky * coeffs[1, x, y, z]
                       + kz * coeffs[2, x, y, z])
                mag2 = div.real * div.real + div.imag * div.imag
                if mag2 > best or mag2 != mag2:
                    best = mag2
                    if mag2 != mag2:
                        return float(sqrt(mag2))
    return float(sqrt(best))


def shell_max(cnp.complex128_t[:, :, :, ::1] coeffs, cnp.int32_t[:, :, ::1] shell_index,
              Py_ssize_t n_shells):
    """Per-shell max of sqrt(sum_c |c|^2); shell_index -1 marks excluded modes."""
    cdef Py_ssize_t n = shell_index.shape[0]
    cdef Py_ssize_t x, y, z
    cdef int m
    cdef double mag2
    out_arr = np.zeros(n_shells, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    for x in range(n):
        for y in range(n):
            for z in range(n):
                m = shell_index[x, y, z]
                if m < 0:
                    continue
                mag2 = (
                    (coeffs[0, x, y, z].real * coeffs[0, x, y, z].real
                     + coeffs[0, x, y, z].imag * coeffs[0, x, y, z].imag)
                    + (coeffs[1, x, y, z].real * coeffs[1, x, y, z].real
                       + coeffs[1, x, y, z].imag * coeffs[1, x, y, z].imag)
                    + (coeffs[2, x, y, z].real * coeffs[2, x, y, z].real
                       + coeffs[2, x, y, z].imag * coeffs[2, x, y, z].imag)
                )
                if mag2 > out[m] or mag2 != mag2:
                    out[m] = mag2
    return np.sqrt(out_arr)
