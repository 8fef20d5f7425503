import os
os.environ.setdefault("MEMDRIFT_BACKEND", "numpy")
import numpy as np
import scipy.sparse.linalg as spla
from memdrift.physics import table_defaults, nondimensionalize
from memdrift import mesh as msh, device as dv, assembly as asm, solver as sv

phys = table_defaults()
dim = nondimensionalize(phys)
m = msh.build_interval_mesh(phys.length, 200)
prot = {0: dv.ConstantVoltage(0.0), 1: dv.ConstantVoltage(0.0)}
contacts = dv.default_contacts(dim, dv.ContactModel.SCHOTTKY, barrier_eV=0.3,
                               phi0f_V=0.0, v_n=phys.v_n, v_p=phys.v_p,
                               protocols=prot)
dev = dv.DeviceSpec(dim, dv.Doping(1, 1.0), contacts, dv.thermal_equilibrium(),
                    width=1e-6, thickness=6.15e-10)
eq = sv.solve_equilibrium(m, dev)
ctx = asm.AssemblyContext(m, dev)
ws = ctx.workspace()
n_eq = asm.densities(ctx, eq.u)
vh = {0: 0.1 / dim.scaling.U_T, 1: 0.0}
tau = 0.01 / dim.scaling.time_scale
st = sv.NewtonSettings()

u = eq.u.copy()
r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)


def norm_parts(r, A, u):
    w = np.maximum(1.0, np.abs(u))
    s = np.maximum(st.abs_tol + st.rel_tol * (abs(A) @ w), 1e-290)
    q = np.abs(r) / s
    return float(q.max()), int(q.argmax()), s


theta, imax, s0 = norm_parts(r, A, u)
print("theta0", theta, "argmax row", imax, "field", imax % 4, "cell", imax // 4)
for it in range(6):
    du = spla.splu(A.tocsc()).solve(-r)
    print(f"it {it}: |du|max {np.abs(du).max():.3e} at {np.abs(du).argmax()}")
    lam = 1.0
    row = []
    acc = None
    for k in range(21):
        try:
            r2, A2 = asm.assemble_system(ctx, u + lam * du, n_eq, tau, vh, ws)
            if np.all(np.isfinite(r2)):
                tf = float(np.max(np.abs(r2) / s0))  # frozen scale
                tn, im2, _ = norm_parts(r2, A2, u + lam * du)
                row.append((lam, tf, tn))
                if acc is None and tf <= (1 - 0.1 * lam) * theta:
                    acc = (lam, r2, A2)
            else:
                row.append((lam, np.nan, np.nan))
        except asm.AssemblyError as e:
            row.append((lam, None, str(e)[:30]))
        lam *= 0.5
    for lam, tf, tn in row[:12]:
        print(f"   lam={lam:9.3e} frozen={tf} fresh={tn}")
    if acc is None:
        print("   no acceptable step (frozen criterion)")
        break
    lam, r, A = acc
    u = u + lam * du
    theta, imax, s0 = norm_parts(r, A, u)
    print(f"   accepted lam={lam:.3e} -> theta {theta:.6e} argmax {imax} field {imax%4} cell {imax//4}")
