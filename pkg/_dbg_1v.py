import os
os.environ.setdefault("MEMDRIFT_BACKEND", "numpy")
import numpy as np
import scipy.sparse.linalg as spla
from memdrift.physics import table_defaults, nondimensionalize
from memdrift import mesh as msh, device as dv, assembly as asm, solver as sv
from memdrift import _kernels as _k

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

vh = {0: 1.0 / dim.scaling.U_T, 1: 0.0}
tau = 0.0455 / dim.scaling.time_scale
u = eq.u.copy()
for it in range(60):
    r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
    w = np.maximum(1.0, np.abs(u))
    s = np.maximum(1e-12 * (abs(A) @ w), 1e-290)
    q = np.abs(r) / s
    th = q.max()
    i = int(q.argmax())
    if it > 50:
        eta_a = (u[2::4] - u[3::4] + ctx.carriers[2].ehat) * ctx.carriers[2].z
        print(f"it {it}: th {th:.4e} row {i} f{i%4} c{i//4} r {r[i]:.4e} "
              f"eta_a[c] {eta_a[i//4]:.3f} max eta_a {eta_a.max():.3f}")
    if th <= 1.0:
        print("converged", it)
        break
    du = spla.splu(A.tocsc()).solve(-r)
    np.clip(du, -4.0, 4.0, out=du)
    u = u + du
