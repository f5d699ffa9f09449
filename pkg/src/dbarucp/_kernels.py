"""Compiled direct sums.  Serial loops in fixed order, so results are bitwise reproducible."""

import numpy as np
from numba import njit


@njit(cache=True)
def _inv_pow(d2, beta):
    if beta == 1.0:
        return 1.0 / np.sqrt(d2)
    if beta == 1.5:
        d = np.sqrt(d2)
        return 1.0 / (d * np.sqrt(d))
    return np.exp(-0.5 * beta * np.log(d2))


@njit(cache=True)
def riesz_pairs(sx, sy, fw, cap, tx, ty, beta, eps2):
    """sum_j fw_j min(|t_i - s_j|^-beta, cap_j).

    cap_j is the cell average of the kernel around source j, so coincident and
    nearly coincident pairs contribute the self-cell value.
    """
    nt = tx.shape[0]
    ns = sx.shape[0]
    out = np.zeros(nt, dtype=np.complex128)
    for i in range(nt):
        acc_r = 0.0
        acc_i = 0.0
        xi = tx[i]
        yi = ty[i]
        for j in range(ns):
            dx = xi - sx[j]
            dy = yi - sy[j]
            d2 = dx * dx + dy * dy
            if d2 <= eps2:
                k = cap[j]
            else:
                k = min(_inv_pow(d2, beta), cap[j])
            acc_r += fw[j].real * k
            acc_i += fw[j].imag * k
        out[i] = complex(acc_r, acc_i)
    return out


@njit(cache=True)
def cauchy_pairs(sx, sy, fw, rho2, tx, ty, eps2):
    """sum_j fw_j / (t_i - s_j), each source smeared over a disk of radius^2 rho2_j.

    Inside that disk the kernel is conj(t - s) / rho2, the exact transform of a
    uniform disk, so coincident pairs contribute 0.
    """
    nt = tx.shape[0]
    ns = sx.shape[0]
    out = np.zeros(nt, dtype=np.complex128)
    for i in range(nt):
        acc = 0j
        xi = tx[i]
        yi = ty[i]
        for j in range(ns):
            dx = xi - sx[j]
            dy = yi - sy[j]
            d2 = dx * dx + dy * dy
            if d2 > eps2:
                acc += fw[j] * complex(dx, -dy) / max(d2, rho2[j])
        out[i] = acc
    return out


@njit(cache=True)
def lattice_convolve(f, table):
    """out[i] = sum_j f[j] * table[i - j + n - 1] on an (ny, nx) lattice."""
    ny, nx = f.shape
    out = np.zeros((ny, nx), dtype=np.complex128)
    for iy in range(ny):
        for ix in range(nx):
            acc = 0j
            for jy in range(ny):
                oy = iy - jy + ny - 1
                for jx in range(nx):
                    v = f[jy, jx]
                    if v != 0:
                        acc += v * table[oy, ix - jx + nx - 1]
            out[iy, ix] = acc
    return out


@njit(cache=True)
def disk_sums(sx, sy, vals, w, tx, ty, r2):
    """For each target: (sum of vals*w, sum of w) over sources with |t - s|^2 < r2."""
    nt = tx.shape[0]
    ns = sx.shape[0]
    mass = np.zeros(nt)
    area = np.zeros(nt)
    for i in range(nt):
        for j in range(ns):
            dx = tx[i] - sx[j]
            dy = ty[i] - sy[j]
            if dx * dx + dy * dy < r2:
                mass[i] += vals[j] * w[j]
                area[i] += w[j]
    return mass, area
