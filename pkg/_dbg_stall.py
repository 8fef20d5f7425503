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

vh = {0: -0.13 / dim.scaling.U_T, 1: 0.0}
tau = 0.0455 / dim.scaling.time_scale
u = eq.u.copy()
for it in range(30):
    r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
    du = spla.splu(A.tocsc()).solve(-r)
    mx = np.abs(du).max()
    if mx > 4.0:
        du *= 4.0 / mx
    u = u + du

r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
w = np.maximum(1.0, np.abs(u))
s = np.maximum(1e-12 * (abs(A) @ w), 1e-290)
q = np.abs(r) / s
order = np.argsort(q)[::-1]
print("top rows by theta:")
for i in order[:6]:
    print(f"  row {i} field {i%4} cell {i//4} theta {q[i]:.3e} r {r[i]:.6e} scale {s[i]:.3e}")

du = spla.splu(A.tocsc()).solve(-r)
print("|du| max", np.abs(du).max(), "argmax", np.abs(du).argmax(),
      "field", np.abs(du).argmax() % 4, "cell", np.abs(du).argmax() // 4)

# directional derivative test at this state
for h in (1e-4, 1e-5, 1e-6, 1e-7):
    d = du / np.abs(du).max()
    r2, _ = asm.assemble_system(ctx, u + h * d, n_eq, tau, vh, ws)
    fd = (r2 - r) / h
    an = A @ d
    denom = np.maximum(np.abs(an).max(), 1e-30)
    err = np.abs(fd - an)
    rel = err / np.maximum(np.abs(an), 1e-6 * s / 1e-12)
    j = int(np.argmax(rel))
    print(f"h={h:.0e}: max rel dir-deriv err {rel.max():.3e} at row {j} "
          f"(field {j%4} cell {j//4}) an {an[j]:.4e} fd {fd[j]:.4e}")

# iterate trace near stall: watch the argmax row residual sign
print("cycle detail:")
for it in range(8):
    r, A = asm.assemble_system(ctx, u, n_eq, tau, vh, ws)
    q = np.abs(r) / s
    i = int(np.argmax(q))
    du = spla.splu(A.tocsc()).solve(-r)
    print(f" it {it}: theta {q.max():.6e} row {i} f{i%4} c{i//4} r {r[i]:.6e} |du|max {np.abs(du).max():.3e}")
    u = u + du
