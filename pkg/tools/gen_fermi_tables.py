"""Generate frozen evaluation tables for the Fermi-Dirac integrals.

Writes src/memdrift/_fermi_tables.py.

The complete Fermi-Dirac integral of order k used here is

    F_k(eta) = (1/Gamma(k+1)) * int_0^inf  xi^k / (1 + exp(xi - eta)) dxi

evaluated in mpmath at 40 significant digits directly from the integral
(series summation for eta <= -3 where the alternating expansion converges
geometrically). log F_k is fitted by Chebyshev interpolation on subintervals
of [-3, 100]; beyond 100 a three-coefficient even asymptotic correction to
the leading power law is solved from exact samples. Derivative tables are the
exact Chebyshev derivatives of the fitted coefficients, so downstream code can
evaluate F' as the exact derivative of the implemented approximant.

Run: python3 tools/gen_fermi_tables.py [--check-only]
"""

import argparse
import sys
import time

import mpmath as mp
import numpy as np

mp.mp.dps = 40

SERIES_CUT = mp.mpf(-3)
ASYMP_CUT = mp.mpf(100)
INTERVALS = [(-3.0, 4.0), (4.0, 16.0), (16.0, 48.0), (48.0, 100.0)]
TARGET = mp.mpf("5e-15")  # abs error on log F == rel error on F
MAX_DEGREE = 60


def fd_series(k, eta):
    s = mp.mpf(0)
    j = 1
    while j <= 600:
        t = (-1) ** (j + 1) * mp.e ** (j * eta) / mp.mpf(j) ** (k + 1)
        s += t
        if abs(t) < mp.mpf("1e-45") * abs(s):
            break
        j += 1
    return s


def fd(k, eta):
    eta = mp.mpf(eta)
    if eta <= SERIES_CUT:
        return fd_series(k, eta)
    f = lambda x: x ** k / (1 + mp.e ** (x - eta))
    if eta > 1:
        pts = [0, eta / 2, eta, eta + 30, mp.inf]
    else:
        pts = [0, 5, 40, mp.inf]
    return mp.quad(f, pts) / mp.gamma(k + 1)


def cheb_fit(fun, a, b, deg):
    """Chebyshev interpolation coefficients (chebval convention) on [a, b]."""
    n = deg + 1
    a = mp.mpf(a)
    b = mp.mpf(b)
    us = [mp.cos(mp.pi * (i + mp.mpf("0.5")) / n) for i in range(n)]
    xs = [(a + b) / 2 + (b - a) / 2 * u for u in us]
    vals = [fun(x) for x in xs]
    coef = []
    for j in range(n):
        cj = mp.mpf(0)
        for i in range(n):
            cj += vals[i] * mp.cos(mp.pi * j * (i + mp.mpf("0.5")) / n)
        cj *= mp.mpf(2) / n
        coef.append(cj)
    coef[0] /= 2
    return coef


def cheb_eval_mp(coef, a, b, x):
    u = (2 * mp.mpf(x) - (a + b)) / (mp.mpf(b) - mp.mpf(a))
    b1 = mp.mpf(0)
    b2 = mp.mpf(0)
    for c in reversed(coef[1:]):
        b1, b2 = c + 2 * u * b1 - b2, b1
    return coef[0] + u * b1 - b2


def cheb_derivative(coef, a, b):
    """Exact derivative coefficients in the same basis, chain rule included."""
    n = len(coef)
    d = [mp.mpf(0)] * (n + 1)
    for j in range(n - 1, 0, -1):
        d[j - 1] = d[j + 1] + 2 * j * coef[j]
    d[0] /= 2
    scale = mp.mpf(2) / (mp.mpf(b) - mp.mpf(a))
    return [dj * scale for dj in d[: max(n - 1, 1)]]


def fit_log_fd(k, label):
    pieces = []
    for (a, b) in INTERVALS:
        fun = lambda x: mp.log(fd(k, x))
        deg = 12
        while True:
            coef = cheb_fit(fun, a, b, deg)
            grid = np.linspace(a, b, 73)
            err = mp.mpf(0)
            for x in grid:
                e = abs(cheb_eval_mp(coef, a, b, x) - fun(x))
                err = max(err, e)
            if err <= TARGET or deg >= MAX_DEGREE:
                print(f"  {label} [{a},{b}] deg={deg} maxerr={mp.nstr(err, 3)}")
                if err > TARGET:
                    raise RuntimeError(f"degree cap hit on {label} [{a},{b}]")
                break
            deg += 6
        dcoef = cheb_derivative(coef, a, b)
        pieces.append((a, b, coef, dcoef))
    return pieces


def fit_asymptotic(k, label):
    """g(eta) = log A + (k+1) log eta + log(1 + c1/eta^2 + c2/eta^4 + c3/eta^6)."""
    A = 1 / mp.gamma(k + 2)
    samples = [mp.mpf(100), mp.mpf(140), mp.mpf(200)]
    rows = []
    rhs = []
    for eta in samples:
        base = A * eta ** (k + 1)
        ratio = fd(k, eta) / base - 1
        rows.append([eta ** -2, eta ** -4, eta ** -6])
        rhs.append(ratio)
    M = mp.matrix(rows)
    r = mp.matrix(rhs)
    c = mp.lu_solve(M, r)
    errs = []
    for eta in [mp.mpf(x) for x in (100, 110, 130, 170, 250, 400, 700)]:
        approx = A * eta ** (k + 1) * (1 + c[0] * eta ** -2 + c[1] * eta ** -4 + c[2] * eta ** -6)
        errs.append(abs(approx / fd(k, eta) - 1))
    print(f"  {label} asymptotic c={[mp.nstr(x, 10) for x in c]} maxrel={mp.nstr(max(errs), 3)}")
    if max(errs) > mp.mpf("2e-14"):
        raise RuntimeError(f"asymptotic fit too loose for {label}")
    return A, list(c)


def arr_repr(vals, indent="    "):
    parts = [mp.nstr(v, 17, strip_zeros=False) for v in vals]
    lines = []
    line = indent
    for p in parts:
        p = p + ","
        if len(line) + len(p) > 96:
            lines.append(line.rstrip())
            line = indent
        line += p + " "
    lines.append(line.rstrip())
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="src/memdrift/_fermi_tables.py")
    args = ap.parse_args()

    t0 = time.time()
    print("fitting log F_{1/2}")
    half_pieces = fit_log_fd(mp.mpf("0.5"), "F12")
    half_asym = fit_asymptotic(mp.mpf("0.5"), "F12")
    print("fitting log F_{3/2}")
    three_pieces = fit_log_fd(mp.mpf("1.5"), "F32")
    three_asym = fit_asymptotic(mp.mpf("1.5"), "F32")

    f12_zero = fd(mp.mpf("0.5"), 0)
    f32_zero = fd(mp.mpf("1.5"), 0)

    out = []
    out.append('"""Frozen Chebyshev/asymptotic tables for Fermi-Dirac integrals.')
    out.append("")
    out.append("Generated by tools/gen_fermi_tables.py from 40-digit evaluations of the")
    out.append("defining integral; do not edit by hand. log F is fitted; derivative")
    out.append('arrays are exact Chebyshev derivatives of the fitted coefficients."""')
    out.append("")
    out.append("import numpy as np")
    out.append("")
    out.append("SERIES_CUT = -3.0")
    out.append("ASYMP_CUT = 100.0")
    out.append("")

    def emit(tag, pieces, asym):
        A, c = asym
        bounds = [p[0] for p in pieces] + [pieces[-1][1]]
        out.append(f"{tag}_BOUNDS = np.array([{', '.join(repr(float(x)) for x in bounds)}])")
        for i, (a, b, coef, dcoef) in enumerate(pieces):
            out.append(f"{tag}_C{i} = np.array([")
            out.append(arr_repr(coef))
            out.append("])")
            out.append(f"{tag}_D{i} = np.array([")
            out.append(arr_repr(dcoef))
            out.append("])")
        out.append(f"{tag}_NPIECE = {len(pieces)}")
        out.append(f"{tag}_ASYM_LOGA = {mp.nstr(mp.log(A), 17)}")
        out.append(f"{tag}_ASYM_C = np.array([")
        out.append(arr_repr(c))
        out.append("])")
        out.append("")

    emit("F12", half_pieces, half_asym)
    emit("F32", three_pieces, three_asym)
    out.append(f"F12_ZERO = {mp.nstr(f12_zero, 17)}")
    out.append(f"F32_ZERO = {mp.nstr(f32_zero, 17)}")
    out.append("")

    with open(args.out, "w") as fh:
        fh.write("\n".join(out))
    print(f"wrote {args.out} in {time.time() - t0:.1f} s")


if __name__ == "__main__":
    sys.exit(main())
