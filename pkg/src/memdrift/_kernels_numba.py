"""Scalar numerics and loop kernels.

Under the numba backend every function here is compiled with
njit(cache=True); under the numpy backend they run as plain Python and the
array fills are replaced by vectorized equivalents (see _kernels_numpy).
Keep this module free of Python features numba cannot compile.
"""

import math

import numpy as np

from ._accel import jit
from ._fermi_tables import (
    F12_ASYM_C,
    F12_ASYM_LOGA,
    F12_C0,
    F12_C1,
    F12_C2,
    F12_C3,
    F12_D0,
    F12_D1,
    F12_D2,
    F12_D3,
    F32_ASYM_C,
    F32_ASYM_LOGA,
    F32_C0,
    F32_C1,
    F32_C2,
    F32_C3,
    F32_ZERO,
)

KIND_BOLTZMANN = 0
KIND_FERMI12 = 1
KIND_FERMIM1 = 2

# Alternating-series coefficients (-1)^(j+1) j^(-k) for j = 2..24; the j = 1
# term is factored out so the tail can be accumulated relative to 1.
_J = np.arange(2, 25, dtype=np.float64)
_SGN = np.where(np.arange(2, 25) % 2 == 0, -1.0, 1.0)
SER_M32 = _SGN * _J**-1.5
SER_M12 = _SGN * _J**-0.5
SER_M52 = _SGN * _J**-2.5

# exp underflows to 0 below this; clamp keeps densities strictly positive
ETA_FLOOR = -745.0


@jit
def _clenshaw(c, t):
    b1 = 0.0
    b2 = 0.0
    for k in range(c.shape[0] - 1, 0, -1):
        b0 = 2.0 * t * b1 - b2 + c[k]
        b2 = b1
        b1 = b0
    return c[0] + t * b1 - b2


@jit
def _f12_cheb(eta):
    """(log F, dlogF/deta) on the Chebyshev pieces, -3 <= eta <= 100."""
    if eta <= 4.0:
        a = -3.0
        b = 4.0
        c = F12_C0
        d = F12_D0
    elif eta <= 16.0:
        a = 4.0
        b = 16.0
        c = F12_C1
        d = F12_D1
    elif eta <= 48.0:
        a = 16.0
        b = 48.0
        c = F12_C2
        d = F12_D2
    else:
        a = 48.0
        b = 100.0
        c = F12_C3
        d = F12_D3
    t = (2.0 * eta - (a + b)) / (b - a)
    return _clenshaw(c, t), _clenshaw(d, t)


@jit
def _f12_asym(eta):
    """(log F, dlogF/deta) for eta > 100 (Sommerfeld expansion)."""
    w = 1.0 / (eta * eta)
    c1 = F12_ASYM_C[0]
    c2 = F12_ASYM_C[1]
    c3 = F12_ASYM_C[2]
    p = w * (c1 + w * (c2 + w * c3))
    dp = -(w / eta) * (2.0 * c1 + w * (4.0 * c2 + w * 6.0 * c3))
    g = F12_ASYM_LOGA + 1.5 * math.log(eta) + math.log1p(p)
    gp = 1.5 / eta + dp / (1.0 + p)
    return g, gp


@jit
def f12_fpg(eta):
    """F_{1/2} state evaluation: (F, F', gamma) with gamma = eta - log F."""
    if eta <= -3.0:
        e = eta if eta > ETA_FLOOR else ETA_FLOOR
        u = math.exp(e)
        upow = u
        r3 = 0.0
        r1 = 0.0
        for i in range(SER_M32.shape[0]):
            r3 += SER_M32[i] * upow
            r1 += SER_M12[i] * upow
            upow *= u
        f = u * (1.0 + r3)
        fp = u * (1.0 + r1)
        # gamma = -log(F/e^eta); exact cancellation of the leading term
        return f, fp, (eta - e) - math.log1p(r3)
    if eta <= 100.0:
        g, gp = _f12_cheb(eta)
        f = math.exp(g)
        return f, f * gp, eta - g
    g, gp = _f12_asym(eta)
    f = math.exp(g)
    return f, f * gp, eta - g


@jit
def f12_logpair(eta):
    """(log F_{1/2}, dlogF/deta); series branch stays in log form."""
    if eta <= -3.0:
        e = eta if eta > ETA_FLOOR else ETA_FLOOR
        u = math.exp(e)
        upow = u
        r3 = 0.0
        r1 = 0.0
        for i in range(SER_M32.shape[0]):
            r3 += SER_M32[i] * upow
            r1 += SER_M12[i] * upow
            upow *= u
        return e + math.log1p(r3), (1.0 + r1) / (1.0 + r3)
    if eta <= 100.0:
        return _f12_cheb(eta)
    return _f12_asym(eta)


@jit
def f32_logf(eta):
    """log F_{3/2}(eta)."""
    if eta <= -3.0:
        e = eta if eta > ETA_FLOOR else ETA_FLOOR
        u = math.exp(e)
        upow = u
        r5 = 0.0
        for i in range(SER_M52.shape[0]):
            r5 += SER_M52[i] * upow
            upow *= u
        return e + math.log1p(r5)
    if eta <= 100.0:
        if eta <= 4.0:
            a = -3.0
            b = 4.0
            c = F32_C0
        elif eta <= 16.0:
            a = 4.0
            b = 16.0
            c = F32_C1
        elif eta <= 48.0:
            a = 16.0
            b = 48.0
            c = F32_C2
        else:
            a = 48.0
            b = 100.0
            c = F32_C3
        t = (2.0 * eta - (a + b)) / (b - a)
        return _clenshaw(c, t)
    w = 1.0 / (eta * eta)
    p = w * (F32_ASYM_C[0] + w * (F32_ASYM_C[1] + w * F32_ASYM_C[2]))
    return F32_ASYM_LOGA + 2.5 * math.log(eta) + math.log1p(p)


@jit
def f12_inverse(y):
    """Solve F_{1/2}(eta) = y for y > 0: safeguarded Newton on log F."""
    ell = math.log(y)
    lo = ETA_FLOOR
    hi = 800.0
    ghi, _ = f12_logpair(hi)
    while ghi < ell:
        hi *= 2.0
        ghi, _ = f12_logpair(hi)
    if ell < -3.0:
        eta = ell + 0.3535533905932738 * math.exp(ell)
    elif ell < 2.0:
        u = math.exp(ell)
        eta = ell + 0.3535533905932738 * u / (1.0 + 0.27 * u)
    else:
        eta = math.exp((ell - F12_ASYM_LOGA) / 1.5)
    if not (eta > lo and eta < hi):
        eta = 0.5 * (lo + hi)
    tol = 1e-15 * (1.0 + abs(ell))
    for _ in range(200):
        g, gp = f12_logpair(eta)
        f = g - ell
        if abs(f) <= tol:
            return eta
        if f > 0.0:
            hi = eta
        else:
            lo = eta
        nxt = eta - f / gp
        if not (nxt > lo and nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == eta:
            return eta
        eta = nxt
    return eta


@jit
def boltz_fpg(eta):
    e = eta if eta < 700.0 else 700.0
    f = math.exp(e)
    return f, f, eta - e


@jit
def fm1_fpg(eta):
    """F_{-1}(eta) = 1/(exp(-eta)+1): (F, F', gamma).

    The argument is capped at 30 so the returned density stays strictly
    below 1 (saturation plateau 1 - 9.4e-14) and the density derivative
    keeps a representable positive value; gamma stays consistent with the
    capped F, so eta - log F is exact for the implemented statistics.
    """
    if eta >= 0.0:
        a = eta if eta < 30.0 else 30.0
        t = math.exp(-a)
        d = 1.0 + t
        return 1.0 / d, t / (d * d), eta + math.log1p(t)
    a = eta if eta > ETA_FLOOR else ETA_FLOOR
    t = math.exp(a)
    d = 1.0 + t
    return t / d, t / (d * d), math.log1p(t)


@jit
def stats_fpg(kind, eta):
    """(F, F', gamma) for the carrier statistics `kind`."""
    if kind == KIND_BOLTZMANN:
        return boltz_fpg(eta)
    if kind == KIND_FERMI12:
        return f12_fpg(eta)
    return fm1_fpg(eta)


@jit
def stats_inverse_scalar(kind, y):
    if kind == KIND_BOLTZMANN:
        return math.log(y)
    if kind == KIND_FERMI12:
        return f12_inverse(y)
    return math.log(y) - math.log1p(-y)


@jit
def gamma_dens(kind, s):
    """(gamma(F^-1(s)), d/ds of it); the density-argument activity shift."""
    if kind == KIND_BOLTZMANN:
        return 0.0, 0.0
    if kind == KIND_FERMIM1:
        return -math.log1p(-s), 1.0 / (1.0 - s)
    eta = f12_inverse(s)
    f, fp, gam = f12_fpg(eta)
    return eta - math.log(s), 1.0 / fp - 1.0 / s


@jit
def bern(x):
    """Bernoulli function x/(exp(x)-1), overflow- and cancellation-safe."""
    ax = -x if x < 0.0 else x
    if ax <= 0.1:
        x2 = x * x
        return 1.0 - 0.5 * x + (x2 / 12.0) * (1.0 - (x2 / 60.0) * (1.0 - x2 / 42.0))
    if x > 700.0:
        return x * math.exp(-x)
    return x / math.expm1(x)


@jit
def bernp(x):
    """Derivative of the Bernoulli function."""
    ax = -x if x < 0.0 else x
    if ax <= 0.1:
        x2 = x * x
        return -0.5 + (x / 6.0) * (1.0 - (x2 / 30.0) * (1.0 - x2 / 28.0))
    if x > 700.0:
        b = x * math.exp(-x)
    else:
        b = x / math.expm1(x)
    return b * (1.0 - x - b) / x


@jit
def logmean(a, b):
    """Logarithmic mean of two positive numbers."""
    r = math.log(b / a)
    if abs(r) < 1e-8:
        return 0.5 * (a + b)
    return (b - a) / r


@jit
def phi_scalar(kind, x):
    """Carrier free-energy density, normalized to vanish at its minimum."""
    if kind == KIND_BOLTZMANN:
        if x <= 0.0:
            return 1.0
        return x * math.log(x) - x + 1.0
    if kind == KIND_FERMIM1:
        s = 0.0
        if x > 0.0:
            s += x * math.log(x)
        if x < 1.0:
            s += (1.0 - x) * math.log(1.0 - x)
        return s + 0.6931471805599453
    if x <= 0.0:
        return F32_ZERO
    eta = f12_inverse(x)
    return x * eta - math.exp(f32_logf(eta)) + F32_ZERO


@jit
def h_scalar(kind, x, y):
    """Bregman distance of phi: phi(x) - phi(y) - phi'(y)(x - y)."""
    if kind == KIND_BOLTZMANN:
        if x <= 0.0:
            return y
        return x * (math.log(x) - math.log(y)) - x + y
    if kind == KIND_FERMIM1:
        s = 0.0
        if x > 0.0:
            s += x * (math.log(x) - math.log(y))
        if x < 1.0:
            s += (1.0 - x) * (math.log1p(-x) - math.log1p(-y))
        return s
    eta_y = f12_inverse(y)
    if x <= 0.0:
        return math.exp(f32_logf(eta_y))
    eta_x = f12_inverse(x)
    return x * (eta_x - eta_y) - (math.exp(f32_logf(eta_x)) - math.exp(f32_logf(eta_y)))


@jit
def stats_fill(kind, eta, out_f, out_fp, out_g):
    for i in range(eta.shape[0]):
        f, fp, g = stats_fpg(kind, eta[i])
        out_f[i] = f
        out_fp[i] = fp
        out_g[i] = g


@jit
def stats_inverse_fill(kind, y, out):
    for i in range(y.shape[0]):
        out[i] = stats_inverse_scalar(kind, y[i])


@jit
def bernoulli_pair_fill(q, out_b, out_bp):
    for i in range(q.shape[0]):
        out_b[i] = bern(q[i])
        out_bp[i] = bernp(q[i])


@jit
def phi_fill(kind, x, out):
    for i in range(x.shape[0]):
        out[i] = phi_scalar(kind, x[i])


@jit
def h_fill(kind, x, y, out):
    for i in range(x.shape[0]):
        out[i] = h_scalar(kind, x[i], y[i])


@jit
def logmean_fill(a, b, out):
    for i in range(a.shape[0]):
        out[i] = logmean(a[i], b[i])


@jit
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
    """Face flux J and its four partials w.r.t. (phi, psi) on both cells.

    J = -z*mhat*tau*(B(-Q) n_L - B(Q) n_K), Q = z*dpsi + gamma_L - gamma_K.
    """
    for i in range(tau.shape[0]):
        t = mhat * tau[i]
        q = z * dpsi[i] + g_l[i] - g_k[i]
        bq = bern(q)
        bmq = bq + q
        bpq = bernp(q)
        bpmq = -1.0 - bpq
        a = z * t * (bpmq * n_l[i] + bpq * n_k[i])
        r_k = fp_k[i] / n_k[i]
        r_l = fp_l[i] / n_l[i]
        out_j[i] = -z * t * (bmq * n_l[i] - bq * n_k[i])
        out_dphi_k[i] = -z * a * (1.0 - r_k) + z * z * t * bq * fp_k[i]
        out_dpsi_k[i] = -z * a * r_k - z * z * t * bq * fp_k[i]
        out_dphi_l[i] = z * a * (1.0 - r_l) - z * z * t * bmq * fp_l[i]
        out_dpsi_l[i] = z * a * r_l + z * z * t * bmq * fp_l[i]


@jit
def _z_eval(kind, z, mhat, nscale, t, vm, dpsi, g_kc, n_kc, n_d, w):
    # Z at the trace density s = n_D + w, expanded so the emission term
    # vhat*m*(s - n_D) is exact in the shifted variable w
    s = n_d + w
    if s < 1e-300:
        s = 1e-300
    # n_D + (cap - n_D) can round back up to the excluded endpoint
    if kind == KIND_FERMIM1 and s > nscale * (1.0 - 1e-16):
        s = nscale * (1.0 - 1e-16)
    gs, _ = gamma_dens(kind, s / nscale)
    q = z * dpsi + gs - g_kc
    bq = bern(q)
    bmq = bq + q
    return -mhat * t * (bmq * n_d - bq * n_kc) - (mhat * t * bmq + vm) * w


@jit
def schottky_fill(
    kind,
    z,
    mhat,
    vhat,
    nscale,
    tau,
    msig,
    dpsi,
    n_k,
    g_k,
    fp_k,
    n_d,
    s_init,
    out_s,
    out_j,
    out_djphi,
    out_djpsi,
    out_status,
):
    """Eliminate the contact trace density and return the Robin-form flux.

    Per face solves Z(s) = 0 where
      Z(s) = -mhat*tau*(B(-Q)s - B(Q)n_K) - vhat*m*(s - n_D),
      Q(s) = z*dpsi + gamma(s/nscale) - gamma_K,
    then J = z*vhat*m*(s - n_D) with implicit-function derivatives.
    Densities carry the prefactor nscale; gamma acts on pure F values.
    Z is strictly decreasing in s, so a bracketed Newton is safe.

    The iteration runs in the shifted unknown w = s - n_D. Near contact
    equilibrium s agrees with n_D to many digits, and positioning s itself
    to 1 ulp would still quantize the emission flux vhat*m*(s - n_D) far
    too coarsely; in w the flux is vhat*m*w with full relative precision.
    status: 0 ok, 1 bracket failure, 2 not converged.
    """
    for i in range(tau.shape[0]):
        t = tau[i]
        vm = vhat * msig[i]
        dps = dpsi[i]
        n_kc = n_k[i]
        g_kc = g_k[i]
        fp_kc = fp_k[i]
        n_dc = n_d[i]
        lo = (n_kc if n_kc < n_dc else n_dc) * 1e-8
        if lo < 1e-300:
            lo = 1e-300
        hi = (n_kc if n_kc > n_dc else n_dc) * 1e8
        if hi > 1e290:
            hi = 1e290
        if kind == KIND_FERMIM1 and hi > nscale * (1.0 - 1e-16):
            hi = nscale * (1.0 - 1e-16)
        w_lo = lo - n_dc
        w_hi = hi - n_dc
        status = 0
        k = 0
        # Z(s -> 0+) > 0, so this scan terminates before s reaches 0
        while _z_eval(kind, z, mhat, nscale, t, vm, dps, g_kc, n_kc, n_dc, w_lo) < 0.0:
            w_lo = 0.5 * w_lo - 0.5 * n_dc
            k += 1
            if k > 200 or w_lo <= -n_dc:
                status = 1
                break
        k = 0
        while status == 0 and _z_eval(kind, z, mhat, nscale, t, vm, dps, g_kc, n_kc, n_dc, w_hi) > 0.0:
            w_hi = n_dc + 2.0 * w_hi
            k += 1
            if k > 200 or w_hi > 1e305:
                status = 1
                break
        w = s_init[i] - n_dc
        if not (w > w_lo and w < w_hi):
            w = 0.0 if (w_lo < 0.0 and w_hi > 0.0) else 0.5 * (w_lo + w_hi)
        if status == 0:
            status = 2
            for _ in range(200):
                s = n_dc + w
                if s < 1e-300:
                    s = 1e-300
                if kind == KIND_FERMIM1 and s > nscale * (1.0 - 1e-16):
                    s = nscale * (1.0 - 1e-16)
                gs, gsp_y = gamma_dens(kind, s / nscale)
                gsp = gsp_y / nscale
                q = z * dps + gs - g_kc
                bq = bern(q)
                bmq = bq + q
                zval = -mhat * t * (bmq * n_dc - bq * n_kc) - (mhat * t * bmq + vm) * w
                # once |Z| drops below the rounding noise of its own
                # evaluation the sign is meaningless; without this stop a
                # root at w ~ 0 (face in local equilibrium) sends Newton
                # on a one-sided denormal chase the bracket width test
                # cannot catch, because the far endpoint never moves
                znoise = mhat * t * (abs(bmq) * n_dc + abs(bq) * n_kc)
                znoise += abs((mhat * t * bmq + vm) * w)
                if abs(zval) <= 2e-15 * znoise:
                    status = 0
                    break
                if zval > 0.0:
                    w_lo = w
                else:
                    w_hi = w
                if w_hi - w_lo <= 4e-16 * (abs(w_lo) + abs(w_hi)):
                    status = 0
                    break
                bpq = bernp(q)
                bpmq = -1.0 - bpq
                ww = mhat * t * (bpmq * s + bpq * n_kc)
                zs = -mhat * t * bmq - vm + gsp * ww
                nxt = 0.5 * (w_lo + w_hi) if zs == 0.0 else w - zval / zs
                if not (nxt > w_lo and nxt < w_hi):
                    nxt = 0.5 * (w_lo + w_hi)
                if nxt == w:
                    status = 0
                    break
                w = nxt
        s = n_dc + w
        if s < 1e-300:
            s = 1e-300
        if kind == KIND_FERMIM1 and s > nscale * (1.0 - 1e-16):
            s = nscale * (1.0 - 1e-16)
        # polish in plain s where the shifted form quantizes the root: a
        # trace far from n_D is pinned to multiples of ulp(n_D) in w, so
        # rerun Newton on s itself, where s - n_D is well conditioned
        if status == 0 and (s <= 0.5 * n_dc or s >= 2.0 * n_dc):
            for _ in range(4):
                gs, gsp_y = gamma_dens(kind, s / nscale)
                gsp = gsp_y / nscale
                q = z * dps + gs - g_kc
                bq = bern(q)
                bmq = bq + q
                zval = -mhat * t * (bmq * n_dc - bq * n_kc)
                zval -= (mhat * t * bmq + vm) * (s - n_dc)
                bpq = bernp(q)
                bpmq = -1.0 - bpq
                ww = mhat * t * (bpmq * s + bpq * n_kc)
                zs = -mhat * t * bmq - vm + gsp * ww
                if zs == 0.0:
                    break
                nxt = s - zval / zs
                if not (nxt > 0.0):
                    nxt = 0.5 * s
                if kind == KIND_FERMIM1 and nxt > nscale * (1.0 - 1e-16):
                    nxt = nscale * (1.0 - 1e-16)
                if nxt == s:
                    break
                s = nxt
            w = s - n_dc
        # final partials at the accepted root
        gs, gsp_y = gamma_dens(kind, s / nscale)
        gsp = gsp_y / nscale
        q = z * dps + gs - g_kc
        bq = bern(q)
        bmq = bq + q
        bpq = bernp(q)
        bpmq = -1.0 - bpq
        ww = mhat * t * (bpmq * s + bpq * n_kc)
        zs = -mhat * t * bmq - vm + gsp * ww
        r_kc = fp_kc / n_kc
        zphi = -z * (1.0 - r_kc) * ww + z * mhat * t * bq * fp_kc
        zpsi = -z * r_kc * ww - z * mhat * t * bq * fp_kc
        if zs == 0.0:
            dsphi = 0.0
            dspsi = 0.0
        else:
            dsphi = -zphi / zs
            dspsi = -zpsi / zs
        out_s[i] = s
        out_j[i] = z * vm * w
        out_djphi[i] = z * vm * dsphi
        out_djpsi[i] = z * vm * dspsi
        out_status[i] = status
