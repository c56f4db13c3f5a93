"""Compiled inner kernels of the split-step integrator.

The state is handled through the interleaved float64 view of a complex128
array ([re0, im0, re1, im1, ...]) so the serial Thomas recurrences and the
phase rotation run on plain floats.

For phase angles below _SMALL_ANGLE the cos/sin pair is evaluated with a
truncated Taylor series whose remainder is below one double-precision ulp on
that range, so the fast path agrees with libm to ~1 ulp while vectorising.
"""

import numpy as np
from numba import njit

_SMALL_ANGLE = 0.02


@njit(cache=True)
def rotate(w, gh, th):
    """In-place psi_i *= exp(-i * gh_i * |psi_i|^2); returns the rotated power.

    w: interleaved state (length 2n); gh: per-node angle coefficient
    (g * dt-fraction); th: length-n scratch for the angles.
    """
    n = gh.shape[0]
    small = True
    for i in range(n):
        re = w[2 * i]
        im = w[2 * i + 1]
        t = gh[i] * (re * re + im * im)
        th[i] = t
        if not -_SMALL_ANGLE < t < _SMALL_ANGLE:
            small = False
    p = 0.0
    if small:
        for i in range(n):
            t = th[i]
            t2 = t * t
            c = 1.0 - t2 * (0.5 - t2 * (1.0 / 24.0 - t2 * (1.0 / 720.0)))
            s = t * (1.0 - t2 * (1.0 / 6.0 - t2 * (1.0 / 120.0 - t2 * (1.0 / 5040.0))))
            re = w[2 * i]
            im = w[2 * i + 1]
            nre = re * c + im * s
            nim = im * c - re * s
            w[2 * i] = nre
            w[2 * i + 1] = nim
            p += nre * nre + nim * nim
    else:
        for i in range(n):
            t = th[i]
            c = np.cos(t)
            s = np.sin(t)
            re = w[2 * i]
            im = w[2 * i + 1]
            nre = re * c + im * s
            nim = im * c - re * s
            w[2 * i] = nre
            w[2 * i + 1] = nim
            p += nre * nre + nim * nim
    return p


@njit(cache=True)
def cn_dirichlet(w, f, r, ib_re, ib_im, e_re, e_im, g_re, g_im):
    """One Crank-Nicolson step on the interior nodes; end nodes pinned to 0.

    Solves (I + i r A') x = (I - i r A') psi with A' the [-1, 2, -1] stencil
    (r = dt / (2 dx^2)) using the precomputed Thomas factorisation: ib = 1/beta,
    e = i r / beta (forward multiplier), g = -i r / beta (back multiplier).
    """
    n2 = w.shape[0]
    m = n2 // 2 - 2
    r2 = 2.0 * r
    # right-hand side premultiplied by 1/beta (vectorisable pass)
    for k in range(m):
        j = 2 * (k + 1)
        fre = w[j] + r2 * w[j + 1] - r * (w[j - 1] + w[j + 3])
        fim = w[j + 1] - r2 * w[j] + r * (w[j - 2] + w[j + 2])
        f[2 * k] = fre * ib_re[k] - fim * ib_im[k]
        f[2 * k + 1] = fre * ib_im[k] + fim * ib_re[k]
    # forward elimination: y_k = d_k + e_k * y_{k-1}
    pre = f[0]
    pim = f[1]
    for k in range(1, m):
        nre = f[2 * k] + e_re[k] * pre - e_im[k] * pim
        nim = f[2 * k + 1] + e_re[k] * pim + e_im[k] * pre
        f[2 * k] = nre
        f[2 * k + 1] = nim
        pre = nre
        pim = nim
    # back substitution straight into the interior of w
    w[2 * m] = pre
    w[2 * m + 1] = pim
    for k in range(m - 2, -1, -1):
        nre = f[2 * k] - (g_re[k] * pre - g_im[k] * pim)
        nim = f[2 * k + 1] - (g_re[k] * pim + g_im[k] * pre)
        w[2 * k + 2] = nre
        w[2 * k + 3] = nim
        pre = nre
        pim = nim
    w[0] = 0.0
    w[1] = 0.0
    w[n2 - 2] = 0.0
    w[n2 - 1] = 0.0


@njit(cache=True)
def cn_periodic(w, f, r, ib_re, ib_im, e_re, e_im, g_re, g_im,
                z_re, z_im, vl_re, vl_im, q_re, q_im):
    """One Crank-Nicolson step on the periodic ring of all n nodes.

    The cyclic system is solved as a rank-one-corrected tridiagonal one
    (Sherman-Morrison): Thomas on the modified matrix, then subtract
    coef * z with coef = (x_0 + vlast * x_{n-1}) / (1 + v . z); the scalar
    1/(1 + v . z) is precomputed as q.
    """
    n2 = w.shape[0]
    n = n2 // 2
    r2 = 2.0 * r
    # wrap-around right-hand side, premultiplied by 1/beta
    fre = w[0] + r2 * w[1] - r * (w[n2 - 1] + w[3])
    fim = w[1] - r2 * w[0] + r * (w[n2 - 2] + w[2])
    f[0] = fre * ib_re[0] - fim * ib_im[0]
    f[1] = fre * ib_im[0] + fim * ib_re[0]
    for k in range(1, n - 1):
        j = 2 * k
        fre = w[j] + r2 * w[j + 1] - r * (w[j - 1] + w[j + 3])
        fim = w[j + 1] - r2 * w[j] + r * (w[j - 2] + w[j + 2])
        f[j] = fre * ib_re[k] - fim * ib_im[k]
        f[j + 1] = fre * ib_im[k] + fim * ib_re[k]
    j = n2 - 2
    fre = w[j] + r2 * w[j + 1] - r * (w[j - 1] + w[1])
    fim = w[j + 1] - r2 * w[j] + r * (w[j - 2] + w[0])
    f[j] = fre * ib_re[n - 1] - fim * ib_im[n - 1]
    f[j + 1] = fre * ib_im[n - 1] + fim * ib_re[n - 1]
    # forward elimination
    pre = f[0]
    pim = f[1]
    for k in range(1, n):
        nre = f[2 * k] + e_re[k] * pre - e_im[k] * pim
        nim = f[2 * k + 1] + e_re[k] * pim + e_im[k] * pre
        f[2 * k] = nre
        f[2 * k + 1] = nim
        pre = nre
        pim = nim
    # back substitution into w
    w[n2 - 2] = pre
    w[n2 - 1] = pim
    for k in range(n - 2, -1, -1):
        nre = f[2 * k] - (g_re[k] * pre - g_im[k] * pim)
        nim = f[2 * k + 1] - (g_re[k] * pim + g_im[k] * pre)
        w[2 * k] = nre
        w[2 * k + 1] = nim
        pre = nre
        pim = nim
    # rank-one correction
    vy_re = w[0] + vl_re * w[n2 - 2] - vl_im * w[n2 - 1]
    vy_im = w[1] + vl_re * w[n2 - 1] + vl_im * w[n2 - 2]
    co_re = vy_re * q_re - vy_im * q_im
    co_im = vy_re * q_im + vy_im * q_re
    for k in range(n):
        w[2 * k] -= co_re * z_re[k] - co_im * z_im[k]
        w[2 * k + 1] -= co_re * z_im[k] + co_im * z_re[k]
