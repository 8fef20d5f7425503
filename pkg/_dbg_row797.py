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

vh = {0: 1.0 / dim.scaling.U_T, 1: 0.0}
tau = 0.0455 / dim.scaling.time_scale
u = eq.u.copy()
for it in range(56):
    r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
    du = spla.splu(A.tocsc()).solve(-r)
    np.clip(du, -4.0, 4.0, out=du)
    u = u + du

r0, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
Ad = A.toarray()
row = 797
print("r797", r0[row])
cols = [792, 793, 794, 795, 796, 797, 798, 799]
for c in cols:
    an = Ad[row, c]
    best = None
    for h in (1e-5, 1e-6, 1e-7):
        up = u.copy(); up[c] += h
        um = u.copy(); um[c] -= h
        rp, _ = asm.assemble_system(ctx, up, n_eq, tau, vh, ws, want_jacobian=False)
        rm, _ = asm.assemble_system(ctx, um, n_eq, tau, vh, ws, want_jacobian=False)
        fd = (rp[row] - rm[row]) / (2 * h)
        rel = abs(fd - an) / max(abs(an), abs(fd), 1e-300)
        if best is None or rel < best[0]:
            best = (rel, h, fd)
    print(f"col {c} f{c%4} c{c//4}: an {an: .6e} fd {best[2]: .6e} rel {best[0]:.2e} (h={best[1]:.0e})")

# term breakdown for row 797: recompute residual with sub-knobs
n, nfp, g = asm.state_tables(ctx, u)
print("n_p cell198", n[1, 198], "cell199", n[1, 199], "trace_s sample", ws.trace_s[:4])
