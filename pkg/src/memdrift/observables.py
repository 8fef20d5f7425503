"""Terminal currents, free-energy monitors, ion mass, space charge, and
run-comparison metrics.

Total current through a contact sums, over its faces, the electron and hole
conduction fluxes, the (identically zero) ion flux, and the displacement
term lam^2 tau_sigma ((psi_K - psi_sigma)^m - (psi_K - psi_sigma)^{m-1})/tau^m.
Summing the charge-weighted mass balances over all cells and eliminating the
space charge with the discrete Poisson equation shows that these per-face
totals sum to zero over all contacts, so the two-terminal balance
I_left + I_right = 0 holds to solver tolerance by construction. The sign is
chosen so that a positive value is conventional current flowing from the
external circuit into the device at that contact.

The free-energy monitors mirror the implicit scheme: the relative free energy
is lam^2/2 sum tau (D(psi - psi_ref))^2 plus the ion free-energy integral and
the charge-weighted Bregman distances of electrons and holes from the contact
reference densities; the dissipation combines logarithmic-mean face terms with
the contact recombination products for the Robin contact model.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import _kernels as _k
from .assembly import AssemblyContext, state_tables
from .device import ContactModel, PiecewiseLinearCycles

# absolute floor (A) entering the two-terminal balance tolerance
I_FLOOR_A = 1e-12
# relative floor below which a current sample counts as a zero crossing
CURRENT_MASK_FLOOR = 1e-15
# |shoelace area| below this fraction of V_max*I_max counts as degenerate
DEGENERATE_AREA_FACTOR = 1e-6


class ObservableError(ValueError):
    pass


def _state_u(state) -> np.ndarray:
    return state.u if hasattr(state, "u") else np.asarray(state, dtype=np.float64)


def _face_voltages(ctx: AssemblyContext, vhat_by_contact: dict) -> np.ndarray:
    v = np.zeros(ctx.n_ct)
    for cid, val in vhat_by_contact.items():
        v[ctx.ct_contact == cid] = val
    return v


def _contact_fluxes(ctx: AssemblyContext, u: np.ndarray, vhat_by_contact: dict, trace):
    """Dimensionless electron and hole charge fluxes through every contact
    face, oriented out of the device, exactly as they enter the mass
    balances."""
    if ctx.n_ct == 0:
        return np.zeros(0), np.zeros(0)
    if ctx.model is ContactModel.SCHOTTKY:
        out = []
        for name, tr in (("n", trace.n_n), ("p", trace.n_p)):
            c = next(cc for cc in ctx.carriers if cc.name == name)
            out.append(
                c.z * ctx.vhat_rec[name] * ctx.ct_msig * (tr - ctx.ct_nd[name])
            )
        return out[0], out[1]
    n, nfp, g = state_tables(ctx, u)
    psi = u[3::4]
    kc = ctx.ct_cell
    psi_s = ctx.ct_psi_base + _face_voltages(ctx, vhat_by_contact)
    dps = psi_s - psi[kc]
    zeros = np.zeros(ctx.n_ct)
    out = []
    for i, c in enumerate(ctx.carriers[:2]):
        jc = np.empty(ctx.n_ct)
        a1 = np.empty(ctx.n_ct)
        a2 = np.empty(ctx.n_ct)
        a3 = np.empty(ctx.n_ct)
        a4 = np.empty(ctx.n_ct)
        _k.interior_flux_fill(
            c.z, c.mhat, ctx.ct_tau, dps,
            np.ascontiguousarray(n[i, kc]), ctx.ct_nd[c.name],
            np.ascontiguousarray(g[i, kc]), ctx.ct_gd[c.name],
            np.ascontiguousarray(nfp[i, kc]), zeros,
            jc, a1, a2, a3, a4,
        )
        out.append(jc)
    return out[0], out[1]


def total_current(
    ctx: AssemblyContext,
    state_m,
    state_prev,
    tau_hat: float,
    vhat_m: dict,
    vhat_prev: dict,
    trace_m,
    contact_id: int,
) -> float:
    """Physical terminal current (A) into the device at one contact.

    state_prev/vhat_prev belong to the previous time level; pass the same
    state twice with tau_hat = inf for a stationary snapshot (the
    displacement term then vanishes).
    """
    if contact_id not in ctx.dev.contacts.protocols:
        raise ObservableError(f"unknown contact id {contact_id}")
    u_m = _state_u(state_m)
    u_p = _state_u(state_prev)
    j_n, j_p = _contact_fluxes(ctx, u_m, vhat_m, trace_m)
    p = ctx.dev.dimless.params
    inv_tau = 0.0 if math.isinf(tau_hat) else 1.0 / tau_hat

    psi_m = u_m[3::4][ctx.ct_cell]
    psi_p = u_p[3::4][ctx.ct_cell]
    psis_m = ctx.ct_psi_base + _face_voltages(ctx, vhat_m)
    psis_p = ctx.ct_psi_base + _face_voltages(ctx, vhat_prev)
    disp = ctx.lam2 * ctx.ct_tau * ((psi_m - psis_m) - (psi_p - psis_p)) * inv_tau

    j_ion = np.zeros(ctx.n_ct)  # isolating ion boundary, kept for form
    total = (
        (p.delta_n / p.nu) * j_n
        + (p.delta_n * p.delta_p / p.nu) * j_p
        + j_ion
        + disp
    )
    sel = ctx.ct_contact == contact_id
    area = ctx.dev.area_prefactor(ctx.mesh.dimension)
    return -area * float(np.sum(total[sel]))


def terminal_currents(
    ctx: AssemblyContext, state_m, state_prev, tau_hat, vhat_m, vhat_prev, trace_m
) -> dict:
    return {
        cid: total_current(
            ctx, state_m, state_prev, tau_hat, vhat_m, vhat_prev, trace_m, cid
        )
        for cid in sorted(ctx.dev.contacts.protocols)
    }


# --- free-energy monitors ---


def _affine_extension(x_pts: np.ndarray, values: np.ndarray, x_eval: np.ndarray):
    """Least-squares affine-in-x extension of contact values; exact through
    two distinct contact positions, constant when all values agree."""
    if values.size == 0 or np.ptp(values) == 0.0:
        fill = values[0] if values.size else 0.0
        return np.full_like(x_eval, fill)
    a = np.column_stack([np.ones_like(x_pts), x_pts])
    coef, *_ = np.linalg.lstsq(a, values, rcond=None)
    return coef[0] + coef[1] * x_eval


def dirichlet_reference(ctx: AssemblyContext, vhat_by_contact: dict):
    """Reference electrostatic potential and carrier densities per cell.

    The contact traces psi_D + V and phi_D + V are extended affinely in x
    into the domain; reference densities follow from the state equation and
    are independent of the applied voltage because it shifts both potentials.
    """
    v = _face_voltages(ctx, vhat_by_contact)
    x_faces = ctx.mesh.bnd_centers[ctx.ct_sel, 0]
    x_cells = ctx.mesh.cell_centers[:, 0]
    psi_ref = _affine_extension(x_faces, ctx.ct_psi_base + v, x_cells)
    phi_ref = _affine_extension(x_faces, ctx.ct_phi_base + v, x_cells)
    n_ref = np.empty((3, ctx.nc))
    for i, c in enumerate(ctx.carriers):
        eta = np.ascontiguousarray(c.z * (phi_ref - psi_ref + c.ehat))
        f = np.empty(ctx.nc)
        fp = np.empty(ctx.nc)
        g = np.empty(ctx.nc)
        _k.stats_fill(c.kind_id, eta, f, fp, g)
        n_ref[i] = c.nhat * f
    return psi_ref, n_ref


def discrete_entropy(ctx: AssemblyContext, state, vhat_by_contact: dict) -> float:
    """Non-negative relative free energy of a state at fixed applied voltage.

    Zero exactly at the reference: potential equal to the extended Dirichlet
    reference and every density at its reference value (ions at the free
    energy minimum).
    """
    u = _state_u(state)
    n = state_tables(ctx, u)[0]
    psi = u[3::4]
    psi_ref, n_ref = dirichlet_reference(ctx, vhat_by_contact)
    w = psi - psi_ref

    k, l = ctx.int_k, ctx.int_l
    field = float(np.sum(ctx.int_tau * (w[l] - w[k]) ** 2))
    # contact traces match the reference exactly, leaving (0 - w_K)^2
    field += float(np.sum(ctx.ct_tau * w[ctx.ct_cell] ** 2))
    total = 0.5 * ctx.lam2 * field

    p = ctx.dev.dimless.params
    weight = {"n": p.delta_n, "p": p.delta_n * p.delta_p, "a": 1.0}
    for i, c in enumerate(ctx.carriers):
        out = np.empty(ctx.nc)
        if c.name == "a":
            _k.phi_fill(c.kind_id, np.ascontiguousarray(n[i] / c.nhat), out)
        else:
            _k.h_fill(
                c.kind_id,
                np.ascontiguousarray(n[i] / c.nhat),
                np.ascontiguousarray(n_ref[i] / c.nhat),
                out,
            )
        total += weight[c.name] * c.nhat * float(np.sum(ctx.m_cell * out))
    return total


def discrete_dissipation(ctx: AssemblyContext, state, trace) -> float:
    """Non-negative dissipation rate of a state with its boundary trace.

    Face terms carry the logarithmic mean of the adjacent densities and the
    squared potential difference; the Robin contact model adds the
    recombination products, each non-negative by monotonicity of the inverse
    statistics."""
    u = _state_u(state)
    n = state_tables(ctx, u)[0]
    p = ctx.dev.dimless.params
    pref = {
        "n": p.delta_n / (2.0 * p.nu),
        "p": p.delta_n * p.delta_p / (2.0 * p.nu),
        "a": 0.5,  # z_a^2 / 2 with |z_a| = 1
    }
    k, l = ctx.int_k, ctx.int_l
    total = 0.0
    for i, c in enumerate(ctx.carriers):
        phi = u[c.row::4]
        nk = np.ascontiguousarray(n[i, k])
        nl = np.ascontiguousarray(n[i, l])
        nbar = np.empty(ctx.n_int)
        _k.logmean_fill(nk, nl, nbar)
        total += pref[c.name] * c.mhat * float(
            np.sum(ctx.int_tau * nbar * (phi[l] - phi[k]) ** 2)
        )

    if ctx.n_ct:
        kc = ctx.ct_cell
        traces = {"n": (trace.phi_n, trace.n_n), "p": (trace.phi_p, trace.n_p)}
        for i, c in enumerate(ctx.carriers[:2]):
            phi = u[c.row::4]
            phi_s, n_s = traces[c.name]
            nbar = np.empty(ctx.n_ct)
            _k.logmean_fill(
                np.ascontiguousarray(n[i, kc]), np.ascontiguousarray(n_s), nbar
            )
            total += pref[c.name] * c.mhat * float(
                np.sum(ctx.ct_tau * nbar * (phi_s - phi[kc]) ** 2)
            )
        # the ion trace copies the cell value, so its contact term vanishes

        if ctx.model is ContactModel.SCHOTTKY:
            for i, c in enumerate(ctx.carriers[:2]):
                y_s = np.ascontiguousarray(trace.n_n if c.name == "n" else trace.n_p)
                y_d = ctx.ct_nd[c.name]
                eta_s = np.empty(ctx.n_ct)
                eta_d = np.empty(ctx.n_ct)
                _k.stats_inverse_fill(c.kind_id, np.ascontiguousarray(y_s / c.nhat), eta_s)
                _k.stats_inverse_fill(c.kind_id, np.ascontiguousarray(y_d / c.nhat), eta_d)
                w = p.delta_n / p.nu if c.name == "n" else p.delta_n * p.delta_p / p.nu
                total += w * ctx.vhat_rec[c.name] * float(
                    np.sum(ctx.ct_msig * (eta_s - eta_d) * (y_s - y_d))
                )
    return total


def entropy_dissipation_residual(ctx: AssemblyContext, traj, m: int) -> float:
    """(E^m - E^{m-1})/tau^m + D^m for consecutive trajectory records;
    non-positive up to solver tolerance under spatially constant boundary
    data and constant applied voltage."""
    if not 1 <= m < len(traj.records):
        raise ObservableError(f"record index {m} needs a predecessor")
    rec = traj.records[m]
    prev = traj.records[m - 1]
    e_m = discrete_entropy(ctx, rec.state, rec.vhat)
    e_p = discrete_entropy(ctx, prev.state, rec.vhat)
    d_m = discrete_dissipation(ctx, rec.state, rec.trace)
    return (e_m - e_p) / rec.tau_hat + d_m


# --- bulk diagnostics ---


def ion_mass(ctx: AssemblyContext, state) -> float:
    """Domain-averaged ion density (1/|Omega|) sum m_K n_a."""
    u = _state_u(state)
    n = state_tables(ctx, u)[0]
    return float(np.sum(ctx.m_cell * n[2]) / np.sum(ctx.m_cell))


def space_charge(ctx: AssemblyContext, state) -> np.ndarray:
    """Dimensionless net space charge per cell, including the doping term."""
    u = _state_u(state)
    n = state_tables(ctx, u)[0]
    rho = np.zeros(ctx.nc)
    for i, c in enumerate(ctx.carriers):
        rho += c.w_pois * n[i]
    return rho + ctx.pois_dope / ctx.m_cell


def space_charge_scale(dev) -> float:
    """C/m^3 per unit dimensionless space charge."""
    from .physics import Q_E

    return Q_E * dev.dimless.scaling.N_a_scale


# --- run comparison metrics ---


def relative_density_difference(n_ref: np.ndarray, n_other: np.ndarray) -> np.ndarray:
    """|n_ref - n_other| / |n_ref| per sample; the first run is the
    reference in the denominator."""
    a = np.asarray(n_ref, dtype=np.float64)
    b = np.asarray(n_other, dtype=np.float64)
    if a.shape != b.shape:
        raise ObservableError("density arrays must share a grid")
    return np.abs(a - b) / np.abs(a)


def relative_current_difference(i_ref: np.ndarray, i_other: np.ndarray):
    """Pointwise |I_ref - I_other|/|I_ref| with zero crossings masked.

    Returns (values, masked): entries whose reference magnitude falls below
    CURRENT_MASK_FLOOR * max|I_ref| carry NaN and masked=True there.
    """
    a = np.asarray(i_ref, dtype=np.float64)
    b = np.asarray(i_other, dtype=np.float64)
    if a.shape != b.shape:
        raise ObservableError("current series must share a time grid")
    floor = CURRENT_MASK_FLOOR * (np.max(np.abs(a)) if a.size else 0.0)
    masked = np.abs(a) < floor
    out = np.full(a.shape, np.nan)
    ok = ~masked
    out[ok] = np.abs(a[ok] - b[ok]) / np.abs(a[ok])
    return out, masked


def l2_current_error(i_i: np.ndarray, i_j: np.ndarray) -> float:
    """Relative l2 distance of current magnitudes over a shared time grid,
    normalized by the first series."""
    a = np.abs(np.asarray(i_i, dtype=np.float64))
    b = np.abs(np.asarray(i_j, dtype=np.float64))
    if a.shape != b.shape:
        raise ObservableError("current series must share a time grid")
    denom = math.sqrt(float(np.sum(a * a)))
    if denom == 0.0:
        raise ObservableError("reference current series is identically zero")
    return math.sqrt(float(np.sum((a - b) ** 2))) / denom


class LoopOrientation(enum.Enum):
    CLOCKWISE = "clockwise"
    COUNTERCLOCKWISE = "counterclockwise"
    DEGENERATE = "degenerate"


def loop_orientation(v: np.ndarray, i: np.ndarray, branch: str) -> LoopOrientation:
    """Traversal direction of one hysteresis branch of an I-V curve.

    branch selects the samples with V > 0 ("positive") or V < 0
    ("negative"); the signed shoelace area of the closed (V, I) polygon
    decides the direction, with near-zero areas reported as degenerate.
    """
    v = np.asarray(v, dtype=np.float64)
    i = np.asarray(i, dtype=np.float64)
    if v.shape != i.shape:
        raise ObservableError("voltage and current series must share a grid")
    if branch == "positive":
        sel = v > 0.0
    elif branch == "negative":
        sel = v < 0.0
    else:
        raise ObservableError(f"branch must be 'positive' or 'negative', got {branch!r}")
    vv, ii = v[sel], i[sel]
    if vv.size < 3:
        return LoopOrientation.DEGENERATE
    area = 0.5 * float(np.sum(vv * np.roll(ii, -1) - np.roll(vv, -1) * ii))
    v_max = float(np.max(np.abs(vv)))
    i_max = float(np.max(np.abs(ii)))
    if abs(area) < DEGENERATE_AREA_FACTOR * v_max * i_max:
        return LoopOrientation.DEGENERATE
    return LoopOrientation.COUNTERCLOCKWISE if area > 0.0 else LoopOrientation.CLOCKWISE


# --- trajectory reduction and tabular output ---


def measured_contact(dev) -> int:
    """Contact whose current goes into the sweep table: the swept contact
    when exactly one protocol is time-dependent, else the largest id."""
    ids = sorted(dev.contacts.protocols)
    swept = [c for c in ids if isinstance(dev.contacts.protocols[c], PiecewiseLinearCycles)]
    if len(swept) == 1:
        return swept[0]
    return ids[-1]


def trajectory_series(ctx: AssemblyContext, traj, contact_id: int | None = None) -> dict:
    """Per-step observable table of a trajectory.

    Returns arrays t_s, v_V, i_A (at the measured contact), entropy,
    dissipation, ion_mass, cycle, plus i_by_contact with every terminal
    current. The initial record uses a stationary current evaluation.
    """
    if contact_id is None:
        contact_id = measured_contact(ctx.dev)
    recs = traj.records
    nm = len(recs)
    ids = sorted(ctx.dev.contacts.protocols)
    series = {
        "t_s": np.empty(nm),
        "v_V": np.empty(nm),
        "i_A": np.empty(nm),
        "entropy": np.empty(nm),
        "dissipation": np.empty(nm),
        "ion_mass": np.empty(nm),
        "cycle": np.empty(nm, dtype=np.int64),
        "i_by_contact": {cid: np.empty(nm) for cid in ids},
    }
    for m, rec in enumerate(recs):
        prev = recs[m - 1] if m else rec
        tau = rec.tau_hat if m else math.inf
        cur = terminal_currents(
            ctx, rec.state, prev.state, tau, rec.vhat, prev.vhat, rec.trace
        )
        for cid in ids:
            series["i_by_contact"][cid][m] = cur[cid]
        series["t_s"][m] = rec.t_s
        series["v_V"][m] = rec.v_V[contact_id]
        series["i_A"][m] = cur[contact_id]
        series["entropy"][m] = discrete_entropy(ctx, rec.state, rec.vhat)
        series["dissipation"][m] = discrete_dissipation(ctx, rec.state, rec.trace)
        series["ion_mass"][m] = ion_mass(ctx, rec.state)
        series["cycle"][m] = rec.cycle
    return series


SWEEP_COLUMNS = ("t_s", "V_V", "I_A", "entropy", "dissipation", "ion_mass")


def write_sweep_csv(path, series: dict) -> None:
    cols = (
        series["t_s"], series["v_V"], series["i_A"],
        series["entropy"], series["dissipation"], series["ion_mass"],
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in zip(*cols):
            f.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_sweep_csv(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if header != list(SWEEP_COLUMNS):
        raise ObservableError(f"{path}: unexpected sweep table header {header}")
    out = {name: data[:, i] for i, name in enumerate(("t_s", "v_V", "i_A", "entropy", "dissipation", "ion_mass"))}
    return out


def write_snapshot_csv(path, ctx: AssemblyContext, state) -> None:
    """Per-cell snapshot in physical units: coordinates (m), densities
    (1/m^3), electrostatic potential (V), net space charge (C/m^3)."""
    u = _state_u(state)
    n = state_tables(ctx, u)[0]
    s = ctx.dev.dimless.scaling
    dens_scale = {"n": s.N_n_scale, "p": s.C_scale, "a": s.N_a_scale}
    rho = space_charge(ctx, state) * space_charge_scale(ctx.dev)
    xs = ctx.mesh.cell_centers * s.l
    dim = ctx.mesh.dimension
    header = ["x_m"] + (["z_m"] if dim == 2 else [])
    header += ["n_n", "n_p", "n_a", "psi_V", "space_charge"]
    cols = [xs[:, 0]] + ([xs[:, 1]] if dim == 2 else [])
    cols += [
        n[0] * dens_scale["n"],
        n[1] * dens_scale["p"],
        n[2] * dens_scale["a"],
        u[3::4] * s.U_T,
        rho,
    ]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in zip(*cols):
            f.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_snapshot_csv(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}
