"""Discrete state equation, excess-chemical-potential fluxes, boundary
elimination, and the nonlinear residual/Jacobian of one implicit Euler step.

Unknown layout: cell-major blocks u[4K + f] with f = 0: phi_n, 1: phi_p,
2: phi_a, 3: psi. Mass balances carry time prefactors (nu for n and p, 1 for
ions) and charge signs; the Poisson row is
  -lam^2 sum_sigma tau_sigma D_psi - m_K (delta_n (z_n n_n
      + delta_p (z_p n_p + z_C C)) + z_a n_a) = 0.
Contact faces: psi_sigma = psi_D + V; carriers couple either through
Dirichlet traces (ohmic) or through the eliminated Robin trace (Schottky).
Ion flux through every boundary face is zero. Insulating faces contribute
nothing. Interior face fluxes are evaluated once and added with opposite
signs to both adjacent cells, so local conservativity holds bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels as _k
from .device import BoundaryData, ContactModel, DeviceSpec, boundary_data
from .physics import DimlessCarrier

FIELD_OF = {"n": 0, "p": 1, "a": 2, "psi": 3}
CARRIER_ORDER = ("n", "p", "a")


class AssemblyError(RuntimeError):
    pass


@dataclass
class DeviceState:
    """Per-cell potentials, block-interleaved; views are writable."""

    u: np.ndarray

    @property
    def phi_n(self):
        return self.u[0::4]

    @property
    def phi_p(self):
        return self.u[1::4]

    @property
    def phi_a(self):
        return self.u[2::4]

    @property
    def psi(self):
        return self.u[3::4]

    @classmethod
    def from_fields(cls, phi_n, phi_p, phi_a, psi):
        n = len(psi)
        u = np.empty(4 * n)
        u[0::4] = phi_n
        u[1::4] = phi_p
        u[2::4] = phi_a
        u[3::4] = psi
        return cls(u)

    def copy(self):
        return DeviceState(self.u.copy())


def discrete_density(carrier: DimlessCarrier, phi, psi):
    """n = nhat * F(z (phi - psi + ehat)); strictly positive."""
    eta = carrier.z * (np.asarray(phi, float) - np.asarray(psi, float) + carrier.ehat)
    if eta.ndim == 0:
        return carrier.nhat * _k.stats_fpg(carrier.kind_id, float(eta))[0]
    flat = np.ascontiguousarray(eta.ravel())
    f = np.empty_like(flat)
    fp = np.empty_like(flat)
    g = np.empty_like(flat)
    _k.stats_fill(carrier.kind_id, flat, f, fp, g)
    return (carrier.nhat * f).reshape(eta.shape)


def excess_flux(carrier: DimlessCarrier, tau, dpsi, n_k, n_l):
    """J = -z mhat tau (B(-Q) n_L - B(Q) n_K), Q = z dpsi + gamma_L - gamma_K.

    Densities include the carrier prefactor; gamma is evaluated on the pure
    F values n/nhat. Scalar arguments only; assembly uses the array kernels.
    """
    if not (n_k > 0.0 and n_l > 0.0):
        raise AssemblyError("excess_flux requires positive densities")
    gk, _ = _k.gamma_dens(carrier.kind_id, n_k / carrier.nhat)
    gl, _ = _k.gamma_dens(carrier.kind_id, n_l / carrier.nhat)
    q = carrier.z * dpsi + gl - gk
    return -carrier.z * carrier.mhat * tau * (_k.bern(-q) * n_l - _k.bern(q) * n_k)


def face_flux_pair(carrier: DimlessCarrier, tau, dpsi, n_k, n_l):
    """(J_K, J_L) as assembled: one evaluation shared, J_L = -J_K bitwise."""
    j = excess_flux(carrier, tau, dpsi, n_k, n_l)
    return j, -j


def solve_schottky_boundary_density(
    carrier: DimlessCarrier,
    tau: float,
    msig: float,
    vhat: float,
    dpsi: float,
    n_k: float,
    n_d: float,
    s_init: float | None = None,
):
    """Unique positive root of the trace balance Z(s) = 0 for one face.

    Z(s) = -mhat tau (B(-Q) s - B(Q) n_K) - vhat m (s - n_D),
    Q(s) = z dpsi + gamma(s/nhat) - gamma(n_K/nhat).
    """
    if not (n_k > 0.0 and n_d > 0.0):
        raise AssemblyError("trace solve requires positive densities")
    if vhat < 0.0:
        raise AssemblyError("recombination velocity must be non-negative")
    eta = _k.stats_inverse_scalar(carrier.kind_id, n_k / carrier.nhat)
    g_k = eta - math.log(n_k / carrier.nhat)
    fp = _k.stats_fpg(carrier.kind_id, eta)[1] * carrier.nhat
    out_s = np.empty(1)
    out_j = np.empty(1)
    d1 = np.empty(1)
    d2 = np.empty(1)
    st = np.empty(1, dtype=np.int64)
    _k.schottky_fill(
        carrier.kind_id,
        carrier.z,
        carrier.mhat,
        vhat,
        carrier.nhat,
        np.array([tau]),
        np.array([msig]),
        np.array([dpsi]),
        np.array([n_k]),
        np.array([g_k]),
        np.array([fp]),
        np.array([n_d]),
        np.array([s_init if s_init is not None else n_d]),
        out_s,
        out_j,
        d1,
        d2,
        st,
    )
    if st[0] == 1:
        raise AssemblyError("trace solve bracket expansion failed")
    return float(out_s[0])


@dataclass
class _CarrierCtx:
    name: str
    row: int
    z: float
    kind_id: int
    nhat: float
    ehat: float
    mhat: float  # effective: includes ion_flux_scale for ions
    c_time: float
    w_pois: float  # weight of n_alpha in the Poisson right side


class AssemblyContext:
    """Voltage-free precomputation for one (mesh, device) pair."""

    def __init__(self, mesh, dev: DeviceSpec):
        dev.validate()
        self.mesh = mesh
        self.dev = dev
        self.nc = mesh.n_cells
        self.ndof = 4 * self.nc
        dl = dev.dimless
        p = dl.params
        self.lam2 = p.lam2
        self.model = dev.contacts.model
        self.carriers = []
        w = {"n": p.delta_n * dl.carriers["n"].z,
             "p": p.delta_n * p.delta_p * dl.carriers["p"].z,
             "a": dl.carriers["a"].z}
        c_time = {"n": p.nu, "p": p.nu, "a": 1.0}
        for name in CARRIER_ORDER:
            c = dl.carriers[name]
            mhat = c.mhat * (dev.ion_flux_scale if name == "a" else 1.0)
            self.carriers.append(
                _CarrierCtx(
                    name=name,
                    row=FIELD_OF[name],
                    z=c.z,
                    kind_id=c.kind_id,
                    nhat=c.nhat,
                    ehat=c.ehat,
                    mhat=mhat,
                    c_time=c_time[name],
                    w_pois=w[name],
                )
            )
        self.vhat_rec = {"n": dl.vhat_n, "p": dl.vhat_p}

        self.m_cell = mesh.cell_measures
        c_arr = dev.doping.cell_array(self.nc)
        self.doping = c_arr
        # constant doping part of the Poisson right side, m_K included
        self.pois_dope = self.m_cell * p.delta_n * p.delta_p * dev.doping.sign * c_arr

        self.int_k = mesh.int_cell_k
        self.int_l = mesh.int_cell_l
        self.int_tau = mesh.int_tau

        # contact-face subset of the boundary packing
        bd = boundary_data(dev, mesh)
        sel = np.flatnonzero(bd.contact >= 0)
        self.bd = bd
        self.ct_sel = sel
        self.ct_cell = mesh.bnd_cell[sel]
        self.ct_tau = mesh.bnd_tau[sel]
        self.ct_msig = mesh.bnd_measure[sel]
        self.ct_contact = bd.contact[sel]
        self.ct_psi_base = bd.psi_base[sel]
        self.ct_phi_base = bd.phi_base[sel]
        self.ct_nd = {}
        self.ct_gd = {}
        for c in self.carriers:
            nd = bd.n_d[c.name][sel]
            self.ct_nd[c.name] = nd
            y = nd / c.nhat
            eta = np.empty_like(y)
            _k.stats_inverse_fill(c.kind_id, np.ascontiguousarray(y), eta)
            self.ct_gd[c.name] = eta - np.log(y)
        self.n_ct = len(sel)
        self.n_int = len(self.int_tau)
        self._build_pattern()

    def _build_pattern(self):
        nc, nint, nct = self.nc, self.n_int, self.n_ct
        rows = []
        cols = []
        self.slices = {}
        pos = 0

        def add(r, c, key):
            nonlocal pos
            rows.append(r)
            cols.append(c)
            n = len(r)
            self.slices[key] = slice(pos, pos + n)
            pos += n

        cell = np.arange(nc)
        for c in self.carriers:
            r = 4 * cell + c.row
            add(r, 4 * cell + c.row, ("time_phi", c.name))
            add(r, 4 * cell + 3, ("time_psi", c.name))
        rp = 4 * cell + 3
        for c in self.carriers:
            add(rp, 4 * cell + c.row, ("pois_phi", c.name))
        add(rp, 4 * cell + 3, ("pois_psi",))

        k, l = self.int_k, self.int_l
        for c in self.carriers:
            rk = 4 * k + c.row
            rl = 4 * l + c.row
            add(rk, 4 * k + c.row, ("int_kk_phi", c.name))
            add(rk, 4 * k + 3, ("int_kk_psi", c.name))
            add(rk, 4 * l + c.row, ("int_kl_phi", c.name))
            add(rk, 4 * l + 3, ("int_kl_psi", c.name))
            add(rl, 4 * k + c.row, ("int_lk_phi", c.name))
            add(rl, 4 * k + 3, ("int_lk_psi", c.name))
            add(rl, 4 * l + c.row, ("int_ll_phi", c.name))
            add(rl, 4 * l + 3, ("int_ll_psi", c.name))
        add(4 * k + 3, 4 * k + 3, ("pint_kk",))
        add(4 * k + 3, 4 * l + 3, ("pint_kl",))
        add(4 * l + 3, 4 * l + 3, ("pint_ll",))
        add(4 * l + 3, 4 * k + 3, ("pint_lk",))

        if nct:
            kc = self.ct_cell
            for c in self.carriers[:2]:
                r = 4 * kc + c.row
                add(r, 4 * kc + c.row, ("ct_phi", c.name))
                add(r, 4 * kc + 3, ("ct_psi", c.name))
            add(4 * kc + 3, 4 * kc + 3, ("pct_kk",))

        self.pat_rows = np.concatenate(rows) if rows else np.empty(0, np.int64)
        self.pat_cols = np.concatenate(cols) if cols else np.empty(0, np.int64)
        self.nnz = pos

    def workspace(self) -> "Workspace":
        return Workspace(self)


class Workspace:
    """Mutable scratch: COO data buffer and Schottky trace warm starts."""

    def __init__(self, ctx: AssemblyContext):
        self.data = np.zeros(ctx.nnz)
        self.trace_s = {c.name: ctx.ct_nd[c.name].copy() for c in ctx.carriers[:2]}
        n = ctx.n_int
        self._int = [np.empty(n) for _ in range(5)]
        m = ctx.n_ct
        self._ct = [np.empty(m) for _ in range(5)]
        self._st = np.empty(m, dtype=np.int64)


def state_tables(ctx: AssemblyContext, u: np.ndarray):
    """Per-carrier density, density derivative, and activity offset tables.

    Returns (n, nfp, g): arrays of shape (3, n_cells); n and nfp carry the
    prefactor nhat, g is the pure-F activity offset gamma(eta).
    """
    if not np.all(np.isfinite(u)):
        raise AssemblyError("state contains non-finite entries")
    nc = ctx.nc
    psi = u[3::4]
    n = np.empty((3, nc))
    nfp = np.empty((3, nc))
    g = np.empty((3, nc))
    for i, c in enumerate(ctx.carriers):
        eta = np.ascontiguousarray(c.z * (u[c.row::4] - psi + c.ehat))
        f = np.empty(nc)
        fp = np.empty(nc)
        gg = np.empty(nc)
        _k.stats_fill(c.kind_id, eta, f, fp, gg)
        n[i] = c.nhat * f
        nfp[i] = c.nhat * fp
        g[i] = gg
    return n, nfp, g


def densities(ctx: AssemblyContext, u: np.ndarray) -> np.ndarray:
    return state_tables(ctx, u)[0]


def _contact_psi(ctx: AssemblyContext, vhat_by_contact: dict) -> np.ndarray:
    v = np.zeros(ctx.n_ct)
    for cid, val in vhat_by_contact.items():
        v[ctx.ct_contact == cid] = val
    return ctx.ct_psi_base + v


def assemble_system(
    ctx: AssemblyContext,
    u: np.ndarray,
    n_prev: np.ndarray,
    tau_m: float,
    vhat_by_contact: dict,
    ws: Workspace,
    want_jacobian: bool = True,
):
    """Residual (and optionally Jacobian) of one implicit Euler step.

    n_prev: densities of the previous time level, shape (3, n_cells). For a
    stationary solve pass tau_m = inf (time terms vanish).
    Returns (r, A) with A a CSC matrix or None.
    """
    if not tau_m > 0.0:
        raise AssemblyError("time step must be positive")
    n, nfp, g = state_tables(ctx, u)
    nc = ctx.nc
    r = np.zeros(ctx.ndof)
    data = ws.data
    if want_jacobian:
        data[:] = 0.0
    sl = ctx.slices
    psi = u[3::4]
    inv_tau = 0.0 if math.isinf(tau_m) else 1.0 / tau_m

    cell = np.arange(nc)
    pois = np.zeros(nc)
    pois_psi_diag = np.zeros(nc)
    for i, c in enumerate(ctx.carriers):
        # time term: c_time * z * m_K * (n - n_prev) / tau
        tcoef = c.c_time * c.z * ctx.m_cell * inv_tau
        r[4 * cell + c.row] += tcoef * (n[i] - n_prev[i])
        # Poisson right side accumulation
        pois += c.w_pois * n[i]
        if want_jacobian:
            data[sl[("time_phi", c.name)]] += tcoef * c.z * nfp[i]
            data[sl[("time_psi", c.name)]] += -tcoef * c.z * nfp[i]
            data[sl[("pois_phi", c.name)]] += -ctx.m_cell * c.w_pois * c.z * nfp[i]
            pois_psi_diag += ctx.m_cell * c.w_pois * c.z * nfp[i]
    r[4 * cell + 3] -= ctx.m_cell * pois + ctx.pois_dope
    if want_jacobian:
        data[sl[("pois_psi",)]] += pois_psi_diag

    # interior fluxes
    k, l = ctx.int_k, ctx.int_l
    dpsi = psi[l] - psi[k]
    jf, dpk, dsk, dpl, dsl = ws._int
    for i, c in enumerate(ctx.carriers):
        _k.interior_flux_fill(
            c.z, c.mhat, ctx.int_tau, dpsi,
            np.ascontiguousarray(n[i, k]), np.ascontiguousarray(n[i, l]),
            np.ascontiguousarray(g[i, k]), np.ascontiguousarray(g[i, l]),
            np.ascontiguousarray(nfp[i, k]), np.ascontiguousarray(nfp[i, l]),
            jf, dpk, dsk, dpl, dsl,
        )
        np.add.at(r, 4 * k + c.row, jf)
        np.add.at(r, 4 * l + c.row, -jf)
        if want_jacobian:
            data[sl[("int_kk_phi", c.name)]] += dpk
            data[sl[("int_kk_psi", c.name)]] += dsk
            data[sl[("int_kl_phi", c.name)]] += dpl
            data[sl[("int_kl_psi", c.name)]] += dsl
            data[sl[("int_lk_phi", c.name)]] += -dpk
            data[sl[("int_lk_psi", c.name)]] += -dsk
            data[sl[("int_ll_phi", c.name)]] += -dpl
            data[sl[("int_ll_psi", c.name)]] += -dsl
    # interior Poisson terms
    lam2t = ctx.lam2 * ctx.int_tau
    np.add.at(r, 4 * k + 3, -lam2t * dpsi)
    np.add.at(r, 4 * l + 3, lam2t * dpsi)
    if want_jacobian:
        data[sl[("pint_kk",)]] += lam2t
        data[sl[("pint_kl",)]] += -lam2t
        data[sl[("pint_ll",)]] += lam2t
        data[sl[("pint_lk",)]] += -lam2t

    # contact faces
    if ctx.n_ct:
        kc = ctx.ct_cell
        psi_s = _contact_psi(ctx, vhat_by_contact)
        dps = psi_s - psi[kc]
        lam2tc = ctx.lam2 * ctx.ct_tau
        np.add.at(r, 4 * kc + 3, -lam2tc * dps)
        if want_jacobian:
            data[sl[("pct_kk",)]] += lam2tc
        jc, a1, a2, a3, a4 = ws._ct
        for i, c in enumerate(ctx.carriers[:2]):
            n_kc = np.ascontiguousarray(n[i, kc])
            g_kc = np.ascontiguousarray(g[i, kc])
            fp_kc = np.ascontiguousarray(nfp[i, kc])
            if ctx.model is ContactModel.OHMIC:
                _k.interior_flux_fill(
                    c.z, c.mhat, ctx.ct_tau, dps,
                    n_kc, ctx.ct_nd[c.name],
                    g_kc, ctx.ct_gd[c.name],
                    fp_kc, np.zeros(ctx.n_ct),
                    jc, a1, a2, a3, a4,
                )
            else:
                s = ws.trace_s[c.name]
                _k.schottky_fill(
                    c.kind_id, c.z, c.mhat, ctx.vhat_rec[c.name], c.nhat,
                    ctx.ct_tau, ctx.ct_msig, dps,
                    n_kc, g_kc, fp_kc,
                    ctx.ct_nd[c.name], s,
                    a3, jc, a1, a2, ws._st,
                )
                if np.any(ws._st == 1):
                    raise AssemblyError("trace solve bracket expansion failed")
                if np.any(ws._st == 2):
                    raise AssemblyError("trace solve did not converge")
                s[:] = a3
            np.add.at(r, 4 * kc + c.row, jc)
            if want_jacobian:
                data[sl[("ct_phi", c.name)]] += a1
                data[sl[("ct_psi", c.name)]] += a2

    a_mat = None
    if want_jacobian:
        a_mat = sp.coo_matrix(
            (data, (ctx.pat_rows, ctx.pat_cols)), shape=(ctx.ndof, ctx.ndof)
        ).tocsc()
    return r, a_mat


def assemble_residual(state, state_prev, dt, mesh, dev: DeviceSpec, vhat=None):
    """Convenience wrapper over a fresh context (test-facing).

    state/state_prev: DeviceState; dt: dimensionless step; vhat: per-contact
    dimensionless voltages (default all zero).
    """
    ctx = AssemblyContext(mesh, dev)
    ws = ctx.workspace()
    if vhat is None:
        vhat = {cid: 0.0 for cid in dev.contacts.protocols}
    n_prev = densities(ctx, state_prev.u)
    r, _ = assemble_system(ctx, state.u, n_prev, dt, vhat, ws, want_jacobian=False)
    return r


def assemble_jacobian(state, state_prev, dt, mesh, dev: DeviceSpec, vhat=None):
    ctx = AssemblyContext(mesh, dev)
    ws = ctx.workspace()
    if vhat is None:
        vhat = {cid: 0.0 for cid in dev.contacts.protocols}
    n_prev = densities(ctx, state_prev.u)
    _, a_mat = assemble_system(ctx, state.u, n_prev, dt, vhat, ws)
    return a_mat


@dataclass
class BoundaryTrace:
    """Per-contact-face trace values and data (aligned with the contact
    subset of the mesh boundary packing)."""

    face_id: np.ndarray
    cell: np.ndarray
    contact: np.ndarray
    psi: np.ndarray
    phi_n: np.ndarray
    phi_p: np.ndarray
    phi_a: np.ndarray
    n_n: np.ndarray
    n_p: np.ndarray
    psi_D: np.ndarray
    phi_D: np.ndarray
    n_D: dict


def boundary_trace(
    ctx: AssemblyContext, u: np.ndarray, vhat_by_contact: dict, ws: Workspace
) -> BoundaryTrace:
    """Trace values at contact faces for the given state.

    Ohmic: phi traces are the Dirichlet data (voltage included); Schottky:
    carrier traces come from the eliminated Robin balance and phi_sigma is
    reconstructed from the trace density. Ion trace copies the cell value.
    """
    n, nfp, g = state_tables(ctx, u)
    psi = u[3::4]
    kc = ctx.ct_cell
    psi_s = _contact_psi(ctx, vhat_by_contact)
    v = np.zeros(ctx.n_ct)
    for cid, val in vhat_by_contact.items():
        v[ctx.ct_contact == cid] = val
    phi_traces = {}
    n_traces = {}
    if ctx.model is ContactModel.OHMIC:
        for c in ctx.carriers[:2]:
            phi_traces[c.name] = ctx.ct_phi_base + v
            n_traces[c.name] = ctx.ct_nd[c.name].copy()
    else:
        dps = psi_s - psi[kc]
        jc, a1, a2, a3, a4 = ws._ct
        for i, c in enumerate(ctx.carriers[:2]):
            s = ws.trace_s[c.name].copy()
            _k.schottky_fill(
                c.kind_id, c.z, c.mhat, ctx.vhat_rec[c.name], c.nhat,
                ctx.ct_tau, ctx.ct_msig, dps,
                np.ascontiguousarray(n[i, kc]),
                np.ascontiguousarray(g[i, kc]),
                np.ascontiguousarray(nfp[i, kc]),
                ctx.ct_nd[c.name], s,
                a3, jc, a1, a2, ws._st,
            )
            n_traces[c.name] = a3.copy()
            eta = np.empty(ctx.n_ct)
            _k.stats_inverse_fill(
                c.kind_id, np.ascontiguousarray(a3 / c.nhat), eta
            )
            phi_traces[c.name] = psi_s - c.ehat + eta / c.z
    return BoundaryTrace(
        face_id=ctx.mesh.bnd_face_id[ctx.ct_sel],
        cell=kc,
        contact=ctx.ct_contact,
        psi=psi_s,
        phi_n=phi_traces["n"],
        phi_p=phi_traces["p"],
        phi_a=u[2::4][kc].copy(),
        n_n=n_traces["n"],
        n_p=n_traces["p"],
        psi_D=ctx.ct_psi_base.copy(),
        phi_D=ctx.ct_phi_base.copy(),
        n_D={c.name: ctx.ct_nd[c.name].copy() for c in ctx.carriers},
    )
