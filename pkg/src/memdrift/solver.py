"""Damped Newton per implicit Euler step, equilibrium solve, and the
voltage-sweep driver with step halving and voltage continuation.

Convergence is measured in a per-equation scaled max norm: row i of the
residual is compared against abs_tol + rel_tol * sum_j |A_ij| max(1, |u_j|),
an estimate of the natural magnitude of the terms entering that equation.
After convergence a few polishing iterations push the residual to its
round-off floor, which keeps the discrete ion mass drift near machine level
over long sweeps.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse.linalg as spla

from . import assembly as asm
from . import device as dv
from .assembly import AssemblyContext, DeviceState
from .physics import ValidationError

log = logging.getLogger("memdrift.solver")


class NonconvergenceError(RuntimeError):
    def __init__(self, message, history):
        super().__init__(f"{message}; residual history {history}")
        self.history = history


class SweepFailure(RuntimeError):
    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class NewtonSettings:
    abs_tol: float = 0.0
    rel_tol: float = 1e-12
    max_iterations: int = 80
    update_clamp: float = 4.0
    damping_shrink: float = 0.5
    max_backtracks: int = 20
    polish_iterations: int = 2

    def validate(self) -> None:
        if self.abs_tol < 0.0 or self.rel_tol <= 0.0:
            raise ValidationError("solver.newton.tol", "tolerances must be positive")
        if self.max_iterations < 1:
            raise ValidationError("solver.newton.max_iterations", "must be >= 1")
        if self.update_clamp <= 0.0:
            raise ValidationError("solver.newton.update_clamp", "must be > 0")


def _scaled_norm(r: np.ndarray, a_mat, u: np.ndarray, st: NewtonSettings) -> float:
    w = np.maximum(1.0, np.abs(u))
    b = abs(a_mat) @ w
    s = st.abs_tol + st.rel_tol * b
    s = np.maximum(s, 1e-290)
    return float(np.max(np.abs(r) / s))


def _lin_solve(a_mat, rhs):
    try:
        return spla.splu(a_mat.tocsc()).solve(rhs)
    except RuntimeError as e:
        raise NonconvergenceError(f"linear solve failed: {e}", []) from e


def newton_solve(
    ctx: AssemblyContext,
    ws,
    u0: np.ndarray,
    n_prev: np.ndarray,
    tau: float,
    vhat: dict,
    settings: NewtonSettings,
):
    """Solve one implicit Euler step; returns (u, iterations, theta, history).

    Each update is limited component-wise (unknowns are potentials in
    thermal-voltage units, so the clamp bounds the per-iteration density
    change); a backtracking search prefers steps that reduce the scaled
    residual, but a finite non-decreasing step is accepted rather than
    failing outright because the scaled norm is not a descent function
    for this system. max_iterations bounds the total work either way.
    """
    settings.validate()
    u = u0.copy()
    history = []
    iters = 0
    try:
        r, a_mat = asm.assemble_system(ctx, u, n_prev, tau, vhat, ws)
    except asm.AssemblyError as e:
        # evaluation can fail at the guess itself (e.g. the new boundary
        # data sits too far from the old state); report nonconvergence so
        # the sweep driver can shrink the step instead of aborting
        raise NonconvergenceError(f"assembly failed at initial guess: {e}", []) from e
    theta = _scaled_norm(r, a_mat, u, settings)
    if not math.isfinite(theta):
        raise NonconvergenceError("non-finite residual at initial guess", [])
    history.append(theta)
    while theta > 1.0:
        if iters >= settings.max_iterations:
            raise NonconvergenceError("Newton did not converge", history)
        du = _lin_solve(a_mat, -r)
        np.clip(du, -settings.update_clamp, settings.update_clamp, out=du)
        lam = 1.0
        accepted = False
        fallback = None
        for _ in range(settings.max_backtracks + 1):
            u_try = u + lam * du
            try:
                r_try, a_try = asm.assemble_system(ctx, u_try, n_prev, tau, vhat, ws)
            except asm.AssemblyError:
                lam *= settings.damping_shrink
                continue
            if not np.all(np.isfinite(r_try)):
                lam *= settings.damping_shrink
                continue
            theta_try = _scaled_norm(r_try, a_try, u_try, settings)
            if fallback is None:
                fallback = (u_try, r_try, a_try, theta_try)
            if theta_try <= (1.0 - 0.1 * lam) * theta or theta_try <= 1.0:
                u, r, a_mat, theta = u_try, r_try, a_try, theta_try
                accepted = True
                break
            lam *= settings.damping_shrink
        if not accepted:
            if fallback is None:
                raise NonconvergenceError("line search failed", history)
            u, r, a_mat, theta = fallback
        iters += 1
        history.append(theta)
    # polish toward the round-off floor; revert on stagnation
    for _ in range(settings.polish_iterations):
        if theta == 0.0:
            break
        du = _lin_solve(a_mat, -r)
        u_try = u + du
        try:
            r_try, a_try = asm.assemble_system(ctx, u_try, n_prev, tau, vhat, ws)
        except asm.AssemblyError:
            break
        if not np.all(np.isfinite(r_try)):
            break
        theta_try = _scaled_norm(r_try, a_try, u_try, settings)
        if theta_try >= theta:
            break
        u, r, a_mat, theta = u_try, r_try, a_try, theta_try
    return u, iters, theta, history


def newton_step(state_guess: DeviceState, state_prev: DeviceState, tau, mesh, dev,
                vhat=None, settings: NewtonSettings | None = None) -> DeviceState:
    """One implicit Euler step from state_prev with the given initial guess."""
    ctx = AssemblyContext(mesh, dev)
    ws = ctx.workspace()
    if vhat is None:
        vhat = {cid: 0.0 for cid in dev.contacts.protocols}
    st = settings or NewtonSettings()
    n_prev = asm.densities(ctx, state_prev.u)
    u, iters, theta, hist = newton_solve(ctx, ws, state_guess.u, n_prev, tau, vhat, st)
    out = DeviceState(u)
    out.newton_iterations = iters
    out.residual_norm = theta
    return out


def _bulk_neutral_psi(ctx: AssemblyContext, phi0: float) -> np.ndarray:
    """Per-cell charge-neutral psi for constant quasi Fermi potential phi0."""
    from . import _kernels as _k

    dev = ctx.dev
    p = dev.dimless.params

    def charge(psi, c_val):
        tot = 0.0
        for c in ctx.carriers:
            f, _, _ = _k.stats_fpg(c.kind_id, c.z * (phi0 - psi + c.ehat))
            tot += c.w_pois * c.nhat * f
        return tot + p.delta_n * p.delta_p * dev.doping.sign * c_val

    psi = np.empty(ctx.nc)
    cache = {}
    for i, c_val in enumerate(ctx.doping):
        if c_val not in cache:
            lo, hi = phi0 - 2000.0, phi0 + 2000.0
            cache[c_val] = scipy.optimize.brentq(
                charge, lo, hi, args=(c_val,), xtol=1e-13, rtol=8.9e-16
            )
        psi[i] = cache[c_val]
    return psi


def _solve_poisson(ctx: AssemblyContext, ws, u0: np.ndarray, vhat: dict,
                   settings: NewtonSettings):
    """Newton on the Poisson rows only, quasi Fermi potentials frozen."""
    u = u0.copy()
    rows = np.arange(3, ctx.ndof, 4)
    n_dummy = np.zeros((3, ctx.nc))

    def block(u_in, want_jacobian=True):
        r, a_mat = asm.assemble_system(
            ctx, u_in, n_dummy, math.inf, vhat, ws, want_jacobian=want_jacobian
        )
        rp = r[rows]
        ap = a_mat.tocsr()[rows].tocsc()[:, rows] if want_jacobian else None
        return rp, ap

    def norm(rp, ap, u_in):
        w = np.maximum(1.0, np.abs(u_in[rows]))
        s = np.maximum(settings.abs_tol + settings.rel_tol * (abs(ap) @ w), 1e-290)
        return float(np.max(np.abs(rp) / s)), s

    history = []
    iters = 0
    rp, ap = block(u)
    theta, s = norm(rp, ap, u)
    history.append(theta)
    while theta > 1.0:
        if iters >= settings.max_iterations:
            raise NonconvergenceError("Poisson Newton did not converge", history)
        dpsi = _lin_solve(ap, -rp)
        np.clip(dpsi, -settings.update_clamp, settings.update_clamp, out=dpsi)
        lam = 1.0
        accepted = False
        fallback = None
        for _ in range(settings.max_backtracks + 1):
            u_try = u.copy()
            u_try[rows] += lam * dpsi
            try:
                rp_try, ap_try = block(u_try)
            except asm.AssemblyError:
                lam *= settings.damping_shrink
                continue
            if np.all(np.isfinite(rp_try)):
                t_try, s_try = norm(rp_try, ap_try, u_try)
                if fallback is None:
                    fallback = (u_try, rp_try, ap_try, t_try, s_try)
                if t_try <= (1.0 - 0.1 * lam) * theta or t_try <= 1.0:
                    u, rp, ap, theta, s = u_try, rp_try, ap_try, t_try, s_try
                    accepted = True
                    break
            lam *= settings.damping_shrink
        if not accepted:
            if fallback is None:
                raise NonconvergenceError("Poisson line search failed", history)
            u, rp, ap, theta, s = fallback
        iters += 1
        history.append(theta)
    for _ in range(settings.polish_iterations):
        if theta == 0.0:
            break
        dpsi = _lin_solve(ap, -rp)
        u_try = u.copy()
        u_try[rows] += dpsi
        try:
            rp_try, ap_try = block(u_try)
        except asm.AssemblyError:
            break
        if not np.all(np.isfinite(rp_try)):
            break
        t_try, _ = norm(rp_try, ap_try, u_try)
        if t_try >= theta:
            break
        u, rp, ap, theta = u_try, rp_try, ap_try, t_try
    return u


def solve_equilibrium(mesh, dev, settings: NewtonSettings | None = None) -> DeviceState:
    """Zero-bias state: constant quasi Fermi potentials, psi from Poisson."""
    st = settings or NewtonSettings()
    ctx = AssemblyContext(mesh, dev)
    ws = ctx.workspace()
    first = min(dev.contacts.protocols)
    phi0 = float(dev.contacts.phi_D[first].a)
    psi = _bulk_neutral_psi(ctx, phi0)
    u0 = DeviceState.from_fields(
        np.full(ctx.nc, phi0), np.full(ctx.nc, phi0), np.full(ctx.nc, phi0), psi
    ).u
    vhat = {cid: 0.0 for cid in dev.contacts.protocols}
    u = _solve_poisson(ctx, ws, u0, vhat, st)
    return DeviceState(u)


def initial_state(mesh, dev, settings: NewtonSettings | None = None) -> DeviceState:
    """Initial condition: thermal equilibrium or explicit quasi Fermi fields
    (psi then solved from the Poisson equation alone)."""
    dev.initial.validate()
    if dev.initial.mode is dv.InitialMode.THERMAL_EQUILIBRIUM:
        return solve_equilibrium(mesh, dev, settings)
    st = settings or NewtonSettings()
    ctx = AssemblyContext(mesh, dev)
    ws = ctx.workspace()
    first = min(dev.contacts.protocols)
    phi0 = float(dev.contacts.phi_D[first].a)
    psi = _bulk_neutral_psi(ctx, phi0)
    u0 = DeviceState.from_fields(
        np.asarray(dev.initial.phi_n, float),
        np.asarray(dev.initial.phi_p, float),
        np.asarray(dev.initial.phi_a, float),
        psi,
    ).u
    vhat = {cid: dev.vhat_at(cid, 0.0) for cid in dev.contacts.protocols}
    u = _solve_poisson(ctx, ws, u0, vhat, st)
    state = DeviceState(u)
    n_a = asm.densities(ctx, u)[2]
    c_a = ctx.carriers[2]
    if np.any(n_a >= c_a.nhat) or np.any(n_a <= 0.0):
        raise ValidationError(
            "device.initial.phi_a", "derived ion density leaves (0, 1)"
        )
    return state


@dataclass(frozen=True)
class UniformGrid:
    """M equal implicit Euler steps over [0, t_final]."""

    n_steps: int

    def validate(self):
        if self.n_steps < 1:
            raise ValidationError("solver.grid.n_steps", "must be >= 1")


@dataclass(frozen=True)
class AdaptiveGrid:
    """Growing steps, clipped to protocol breakpoints; seconds."""

    tau_init: float
    tau_min: float
    tau_max: float
    grow: float = 1.4

    def validate(self):
        if not (0.0 < self.tau_min <= self.tau_init <= self.tau_max):
            raise ValidationError(
                "solver.grid", "need 0 < tau_min <= tau_init <= tau_max"
            )
        if self.grow < 1.0:
            raise ValidationError("solver.grid.grow", "must be >= 1")


def default_uniform_grid(dev, t_final_s: float, dv_per_step: float = 0.13) -> UniformGrid:
    """Step count chosen so the voltage change per step stays small."""
    rate = 0.0
    for p in dev.contacts.protocols.values():
        if isinstance(p, dv.PiecewiseLinearCycles):
            rate = max(rate, p.rate)
    if rate == 0.0:
        return UniformGrid(100)
    return UniformGrid(max(1, math.ceil(t_final_s * rate / dv_per_step)))


@dataclass
class StepRecord:
    index: int
    t_s: float
    t_hat: float
    tau_hat: float
    v_V: dict
    vhat: dict
    state: DeviceState
    iterations: int
    residual_norm: float
    trace: object
    cycle: int
    is_target: bool


@dataclass
class Trajectory:
    records: list
    mesh: object
    dev: object
    settings: NewtonSettings

    @property
    def states(self):
        return [r.state for r in self.records]

    @property
    def times_s(self):
        return np.array([r.t_s for r in self.records])


@dataclass
class SweepResult:
    n_steps: int
    n_rejected: int
    n_continuations: int
    wall_s: float
    completed: bool
    message: str = ""


def _cycle_of(dev, t_s: float) -> int:
    for p in dev.contacts.protocols.values():
        if isinstance(p, dv.PiecewiseLinearCycles):
            # a step ending exactly on a cycle boundary belongs to the
            # cycle it closes
            c = int(math.floor(t_s / p.period * (1.0 - 1e-12)))
            return min(max(c, 0), p.n_cycles - 1)
    return 0


def run_sweep(
    mesh,
    dev,
    grid=None,
    settings: NewtonSettings | None = None,
    t_final_s: float | None = None,
    observers=(),
    tau_min_s: float | None = None,
):
    """Drive the applied-voltage protocol over [0, t_final].

    Per accepted step t^{m-1} -> t^m the voltage is frozen at V(t^m). On
    Newton failure the step is halved down to tau_min; if the smallest step
    still fails cold, the voltage increment is sub-stepped (continuation)
    before giving up. Returns (Trajectory, SweepResult).
    """
    st = settings or NewtonSettings()
    scale_t = dev.dimless.scaling.time_scale
    if t_final_s is None:
        h = min(p.horizon for p in dev.contacts.protocols.values())
        if math.isinf(h):
            raise ValidationError("solver.t_final", "needed for constant protocols")
        t_final_s = h
    if grid is None:
        grid = default_uniform_grid(dev, t_final_s)
    grid.validate()

    bps = set()
    for p in dev.contacts.protocols.values():
        bps.update(b for b in p.breakpoints() if 0.0 < b < t_final_s)

    if isinstance(grid, UniformGrid):
        targets = list(np.linspace(0.0, t_final_s, grid.n_steps + 1)[1:])
        tau_floor = (t_final_s / grid.n_steps) / 64.0
        adaptive = None
    else:
        targets = None
        tau_floor = grid.tau_min
        adaptive = grid
    if tau_min_s is not None:
        tau_floor = tau_min_s

    ctx = AssemblyContext(mesh, dev)
    ws = ctx.workspace()
    t0 = time.time()
    state0 = initial_state(mesh, dev, st)
    volts0 = {c: dev.voltage_V(c, 0.0) for c in dev.contacts.protocols}
    vhat0 = {c: v / dev.dimless.scaling.U_T for c, v in volts0.items()}
    trace0 = asm.boundary_trace(ctx, state0.u, vhat0, ws)
    records = [
        StepRecord(0, 0.0, 0.0, 0.0, volts0, vhat0, state0, 0, 0.0, trace0,
                   0, True)
    ]
    traj = Trajectory(records, mesh, dev, st)
    for ob in observers:
        ob(records[0])

    n_prev = asm.densities(ctx, state0.u)
    u = state0.u
    t = 0.0
    m = 0
    n_rejected = 0
    n_cont = 0
    t_eps = 1e-12 * t_final_s
    tau_next_s = adaptive.tau_init if adaptive is not None else None

    def attempt(t_end_s, u_guess, n_prev_local, v_prev):
        """Newton solve for the step ending at t_end_s; continuation on
        failure. Returns (u_new, iters, theta, used_continuation)."""
        nonlocal n_cont
        tau_hat = (t_end_s - t) / scale_t
        v_end = {c: dev.voltage_V(c, t_end_s) for c in dev.contacts.protocols}
        vhat_end = {c: v / dev.dimless.scaling.U_T for c, v in v_end.items()}
        try:
            out = newton_solve(ctx, ws, u_guess, n_prev_local, tau_hat, vhat_end, st)
            return out[0], out[1], out[2], v_end, vhat_end, False
        except NonconvergenceError:
            pass
        # voltage continuation at this step size
        for nsub in (2, 4, 8, 16):
            ug = u_guess.copy()
            try:
                for j in range(1, nsub + 1):
                    f = j / nsub
                    vh = {
                        c: (v_prev[c] + f * (v_end[c] - v_prev[c]))
                        / dev.dimless.scaling.U_T
                        for c in v_end
                    }
                    ug, it_j, th_j, _ = newton_solve(
                        ctx, ws, ug, n_prev_local, tau_hat, vh, st
                    )
                n_cont += 1
                return ug, it_j, th_j, v_end, vhat_end, True
            except NonconvergenceError:
                continue
        raise NonconvergenceError("step failed with continuation", [])

    while t < t_final_s - t_eps:
        if targets is not None:
            t_target = targets[0]
        else:
            t_target = min(t + tau_next_s, t_final_s)
            later = [b for b in bps if b > t + 1e-15 * t_final_s]
            if later:
                t_target = min(t_target, min(later))
        # halving loop
        t_try = t_target
        v_prev = {c: dev.voltage_V(c, t) for c in dev.contacts.protocols}
        while True:
            try:
                u_new, iters, theta, v_end, vhat_end, used_cont = attempt(
                    t_try, u.copy(), n_prev, v_prev
                )
                break
            except NonconvergenceError:
                n_rejected += 1
                tau_s = t_try - t
                if tau_s / 2.0 < tau_floor:
                    res = SweepResult(
                        m, n_rejected, n_cont, time.time() - t0, False,
                        f"step at t={t_try:.6e} s failed at minimum step size",
                    )
                    raise SweepFailure(res.message, traj)
                t_try = t + tau_s / 2.0
        m += 1
        tau_hat = (t_try - t) / scale_t
        t = t_try
        u = u_new
        n_prev = asm.densities(ctx, u)
        is_target = targets is not None and abs(t - targets[0]) <= t_eps
        if is_target:
            targets.pop(0)
        if adaptive is not None:
            tau_next_s = min(adaptive.tau_max, (t - records[-1].t_s) * adaptive.grow)
            tau_next_s = max(tau_next_s, adaptive.tau_min)
        trace = asm.boundary_trace(ctx, u, vhat_end, ws)
        rec = StepRecord(
            m, t, t / scale_t, tau_hat, v_end, vhat_end, DeviceState(u.copy()),
            iters, theta, trace, _cycle_of(dev, t), is_target or targets is None,
        )
        records.append(rec)
        log.info(
            "step=%d t=%.9e V=%.6f iters=%d resid=%.3e tau=%.3e cont=%d",
            m, t, max(v_end.values(), key=abs), iters, theta, tau_hat, int(used_cont),
        )
        for ob in observers:
            ob(rec)
    return traj, SweepResult(m, n_rejected, n_cont, time.time() - t0, True)
