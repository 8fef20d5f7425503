"""Vectorized numpy versions of the hot array kernels.

Used when the numba backend is unavailable or disabled. Scalar helpers and
the per-face trace elimination stay in _kernels_numba (plain Python there).
"""

import numpy as np
from numpy.polynomial.chebyshev import chebval

from ._fermi_tables import (
    F12_ASYM_C,
    F12_ASYM_LOGA,
    F12_BOUNDS,
    F12_C0,
    F12_C1,
    F12_C2,
    F12_C3,
    F12_D0,
    F12_D1,
    F12_D2,
    F12_D3,
)
from ._kernels_numba import (
    ETA_FLOOR,
    KIND_BOLTZMANN,
    KIND_FERMIM1,
    SER_M12,
    SER_M32,
)

_F12_C = (F12_C0, F12_C1, F12_C2, F12_C3)
_F12_D = (F12_D0, F12_D1, F12_D2, F12_D3)


def _f12_fill(eta, out_f, out_fp, out_g):
    ser = eta <= -3.0
    if np.any(ser):
        e = np.maximum(eta[ser], ETA_FLOOR)
        u = np.exp(e)
        r3 = np.zeros_like(u)
        r1 = np.zeros_like(u)
        for i in range(SER_M32.shape[0] - 1, -1, -1):
            r3 = (r3 + SER_M32[i]) * u
            r1 = (r1 + SER_M12[i]) * u
        out_f[ser] = u * (1.0 + r3)
        out_fp[ser] = u * (1.0 + r1)
        out_g[ser] = (eta[ser] - e) - np.log1p(r3)
    for p in range(4):
        a = F12_BOUNDS[p]
        b = F12_BOUNDS[p + 1]
        m = (eta > a) & (eta <= b)
        if not np.any(m):
            continue
        t = (2.0 * eta[m] - (a + b)) / (b - a)
        g = chebval(t, _F12_C[p])
        gp = chebval(t, _F12_D[p])
        f = np.exp(g)
        out_f[m] = f
        out_fp[m] = f * gp
        out_g[m] = eta[m] - g
    big = eta > 100.0
    if np.any(big):
        x = eta[big]
        w = 1.0 / (x * x)
        c1, c2, c3 = F12_ASYM_C
        p = w * (c1 + w * (c2 + w * c3))
        dp = -(w / x) * (2.0 * c1 + w * (4.0 * c2 + w * 6.0 * c3))
        g = F12_ASYM_LOGA + 1.5 * np.log(x) + np.log1p(p)
        f = np.exp(g)
        out_f[big] = f
        out_fp[big] = f * (1.5 / x + dp / (1.0 + p))
        out_g[big] = x - g


def stats_fill(kind, eta, out_f, out_fp, out_g):
    if kind == KIND_BOLTZMANN:
        e = np.minimum(eta, 700.0)
        f = np.exp(e)
        out_f[:] = f
        out_fp[:] = f
        out_g[:] = eta - e
    elif kind == KIND_FERMIM1:
        # positive arguments capped at 30: density saturates strictly below 1
        a = np.clip(eta, -745.0, 30.0)
        t = np.exp(-np.abs(a))
        d = 1.0 + t
        pos = eta >= 0.0
        out_f[:] = np.where(pos, 1.0 / d, t / d)
        out_fp[:] = t / (d * d)
        lt = np.log1p(t)
        out_g[:] = np.where(pos, eta + lt, lt)
    else:
        _f12_fill(eta, out_f, out_fp, out_g)


def bernoulli_pair_fill(q, out_b, out_bp):
    aq = np.abs(q)
    small = aq <= 0.1
    big = q > 700.0
    mid = ~(small | big)
    if np.any(small):
        x = q[small]
        x2 = x * x
        out_b[small] = 1.0 - 0.5 * x + (x2 / 12.0) * (1.0 - (x2 / 60.0) * (1.0 - x2 / 42.0))
        out_bp[small] = -0.5 + (x / 6.0) * (1.0 - (x2 / 30.0) * (1.0 - x2 / 28.0))
    if np.any(mid):
        x = q[mid]
        b = x / np.expm1(x)
        out_b[mid] = b
        out_bp[mid] = b * (1.0 - x - b) / x
    if np.any(big):
        x = q[big]
        b = x * np.exp(-x)
        out_b[big] = b
        out_bp[big] = b * (1.0 - x - b) / x


def interior_flux_fill(
    z,
    mhat,
    tau,
    dpsi,
    n_k,
    n_l,
    g_k,
    g_l,
    fp_k,
    fp_l,
    out_j,
    out_dphi_k,
    out_dpsi_k,
    out_dphi_l,
    out_dpsi_l,
):
    t = mhat * tau
    q = z * dpsi + g_l - g_k
    bq = np.empty_like(q)
    bpq = np.empty_like(q)
    bernoulli_pair_fill(q, bq, bpq)
    bmq = bq + q
    bpmq = -1.0 - bpq
    a = z * t * (bpmq * n_l + bpq * n_k)
    r_k = fp_k / n_k
    r_l = fp_l / n_l
    zt = z * z * t
    out_j[:] = -z * t * (bmq * n_l - bq * n_k)
    out_dphi_k[:] = -z * a * (1.0 - r_k) + zt * bq * fp_k
    out_dpsi_k[:] = -z * a * r_k - zt * bq * fp_k
    out_dphi_l[:] = z * a * (1.0 - r_l) - zt * bmq * fp_l
    out_dpsi_l[:] = z * a * r_l + zt * bmq * fp_l
