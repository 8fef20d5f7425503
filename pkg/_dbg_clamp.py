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
st = sv.NewtonSettings()


def norm(r, A, u):
    w = np.maximum(1.0, np.abs(u))
    s = np.maximum(st.rel_tol * (abs(A) @ w), 1e-290)
    return float(np.max(np.abs(r) / s))


def run(dmax, vholt, tau_s, label):
    vh = {0: vholt / dim.scaling.U_T, 1: 0.0}
    tau = tau_s / dim.scaling.time_scale
    u = eq.u.copy()
    thetas = []
    for it in range(60):
        r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
        th = norm(r, A, u)
        thetas.append(th)
        if th <= 1.0:
            break
        du = spla.splu(A.tocsc()).solve(-r)
        mx = np.abs(du).max()
        if mx > dmax:
            du *= dmax / mx
        u = u + du
    print(f"{label}: dmax={dmax} V={vholt} tau={tau_s}: iters={len(thetas)-1}")
    print("  ", " ".join(f"{t:.2e}" for t in thetas[:40]))


run(4.0, 0.1, 0.01, "A")
run(2.0, 0.1, 0.01, "B")
run(8.0, 0.1, 0.01, "C")
run(4.0, 0.13, 0.0455, "sweep-like")
run(4.0, -0.13, 0.0455, "sweep-neg")
run(4.0, 1.0, 0.0455, "big jump 1V")
