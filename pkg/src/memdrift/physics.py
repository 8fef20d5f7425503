"""Carrier statistics, entropy functions, Bernoulli function, and scaling.

All statistics functions act on the dimensionless argument eta and return
density ratios y = F(eta); actual dimensionless densities carry a per-carrier
prefactor nhat = N_alpha / (density scaling factor), applied by the callers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k

# CODATA exact SI values
Q_E = 1.602176634e-19  # C
K_B = 1.380649e-23  # J/K
EPS_0 = 8.8541878128e-12  # F/m


class DomainError(ValueError):
    """Argument outside the mathematical domain of the requested function."""


class ValidationError(ValueError):
    """Invalid configuration value; `field` holds the dotted path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


class StatisticsKind(enum.Enum):
    BOLTZMANN = "boltzmann"
    FERMI_DIRAC_ONE_HALF = "fermi-dirac-1/2"
    FERMI_DIRAC_MINUS_ONE = "fermi-dirac-minus-1"

    @property
    def kind_id(self) -> int:
        return _KIND_IDS[self]

    @property
    def bounded(self) -> bool:
        """True when the range of F is (0, 1) rather than (0, inf)."""
        return self is StatisticsKind.FERMI_DIRAC_MINUS_ONE


_KIND_IDS = {
    StatisticsKind.BOLTZMANN: _k.KIND_BOLTZMANN,
    StatisticsKind.FERMI_DIRAC_ONE_HALF: _k.KIND_FERMI12,
    StatisticsKind.FERMI_DIRAC_MINUS_ONE: _k.KIND_FERMIM1,
}

_KIND_ALIASES = {
    "boltzmann": StatisticsKind.BOLTZMANN,
    "fermi-dirac-1/2": StatisticsKind.FERMI_DIRAC_ONE_HALF,
    "fermi12": StatisticsKind.FERMI_DIRAC_ONE_HALF,
    "fermi-dirac-minus-1": StatisticsKind.FERMI_DIRAC_MINUS_ONE,
    "fermim1": StatisticsKind.FERMI_DIRAC_MINUS_ONE,
}


def parse_statistics(name: str, field_path: str = "statistics") -> StatisticsKind:
    key = name.strip().lower()
    if key not in _KIND_ALIASES:
        raise ValidationError(field_path, f"unknown statistics {name!r}")
    return _KIND_ALIASES[key]


def _kind_id(kind) -> int:
    if isinstance(kind, StatisticsKind):
        return kind.kind_id
    if isinstance(kind, str):
        return parse_statistics(kind).kind_id
    return int(kind)


def _check_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} must be finite")


def _map_scalar_or_array(fn_scalar, fn_fill, kind_id, x, what):
    arr = np.asarray(x, dtype=np.float64)
    _check_finite(arr, what)
    if arr.ndim == 0:
        return fn_scalar(kind_id, float(arr))
    flat = np.ascontiguousarray(arr.ravel())
    out = np.empty_like(flat)
    fn_fill(kind_id, flat, out)
    return out.reshape(arr.shape)


def stats_eval(kind, eta):
    """Density ratio y = F(eta); range (0, inf), or (0, 1) for F_{-1}."""
    k = _kind_id(kind)
    arr = np.asarray(eta, dtype=np.float64)
    _check_finite(arr, "eta")
    if arr.ndim == 0:
        return _k.stats_fpg(k, float(arr))[0]
    flat = np.ascontiguousarray(arr.ravel())
    f = np.empty_like(flat)
    fp = np.empty_like(flat)
    g = np.empty_like(flat)
    _k.stats_fill(k, flat, f, fp, g)
    return f.reshape(arr.shape)


def stats_derivative(kind, eta):
    """dF/deta, evaluated as the exact derivative of the implemented F."""
    k = _kind_id(kind)
    arr = np.asarray(eta, dtype=np.float64)
    _check_finite(arr, "eta")
    if arr.ndim == 0:
        return _k.stats_fpg(k, float(arr))[1]
    flat = np.ascontiguousarray(arr.ravel())
    f = np.empty_like(flat)
    fp = np.empty_like(flat)
    g = np.empty_like(flat)
    _k.stats_fill(k, flat, f, fp, g)
    return fp.reshape(arr.shape)


def stats_inverse(kind, y):
    """eta with F(eta) = y; y must lie in the open range of F."""
    k = _kind_id(kind)
    arr = np.asarray(y, dtype=np.float64)
    _check_finite(arr, "y")
    if np.any(arr <= 0.0):
        raise DomainError("y must be positive")
    if k == _k.KIND_FERMIM1 and np.any(arr >= 1.0):
        raise DomainError("y must be below the saturation limit 1 for F_{-1}")
    if arr.ndim == 0:
        return _k.stats_inverse_scalar(k, float(arr))
    flat = np.ascontiguousarray(arr.ravel())
    out = np.empty_like(flat)
    _k.stats_inverse_fill(k, flat, out)
    return out.reshape(arr.shape)


def bernoulli(x):
    """B(x) = x/(exp(x)-1) with B(0) = 1; total on finite arguments."""
    arr = np.asarray(x, dtype=np.float64)
    _check_finite(arr, "x")
    if arr.ndim == 0:
        return _k.bern(float(arr))
    flat = np.ascontiguousarray(arr.ravel())
    b = np.empty_like(flat)
    bp = np.empty_like(flat)
    _k.bernoulli_pair_fill(flat, b, bp)
    return b.reshape(arr.shape)


def bernoulli_prime(x):
    """dB/dx."""
    arr = np.asarray(x, dtype=np.float64)
    _check_finite(arr, "x")
    if arr.ndim == 0:
        return _k.bernp(float(arr))
    flat = np.ascontiguousarray(arr.ravel())
    b = np.empty_like(flat)
    bp = np.empty_like(flat)
    _k.bernoulli_pair_fill(flat, b, bp)
    return bp.reshape(arr.shape)


def _check_closure(k: int, arr: np.ndarray) -> None:
    if np.any(arr < 0.0):
        raise DomainError("density must be non-negative")
    if k == _k.KIND_FERMIM1 and np.any(arr > 1.0):
        raise DomainError("density above the saturation limit 1 for F_{-1}")


def entropy_phi(kind, x):
    """Convex free-energy density Phi, zero at its unique minimum.

    Boltzmann: x log x - x + 1; F_{-1}: x log x + (1-x) log(1-x) + log 2;
    F_{1/2}: anti-derivative of F^{-1} anchored at x0 = F_{1/2}(0).
    Endpoints handled by continuous extension.
    """
    k = _kind_id(kind)
    arr = np.asarray(x, dtype=np.float64)
    _check_finite(arr, "x")
    _check_closure(k, arr)
    if arr.ndim == 0:
        return _k.phi_scalar(k, float(arr))
    flat = np.ascontiguousarray(arr.ravel())
    out = np.empty_like(flat)
    _k.phi_fill(k, flat, out)
    return out.reshape(arr.shape)


def relative_entropy(kind, x, y):
    """Bregman distance H(x, y) = Phi(x) - Phi(y) - Phi'(y)(x - y) >= 0."""
    k = _kind_id(kind)
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    _check_finite(ax, "x")
    _check_finite(ay, "y")
    _check_closure(k, ax)
    if np.any(ay <= 0.0) or (k == _k.KIND_FERMIM1 and np.any(ay >= 1.0)):
        raise DomainError("reference density y must be interior to the range")
    if ax.ndim == 0 and ay.ndim == 0:
        return _k.h_scalar(k, float(ax), float(ay))
    ax, ay = np.broadcast_arrays(ax, ay)
    fx = np.ascontiguousarray(ax.ravel().astype(np.float64))
    fy = np.ascontiguousarray(ay.ravel().astype(np.float64))
    out = np.empty_like(fx)
    _k.h_fill(k, fx, fy, out)
    return out.reshape(ax.shape)


# --- physical parameter set and scaling ---


@dataclass(frozen=True)
class PhysicalCarrier:
    """Physical per-carrier data; densities in 1/m^3, energies in eV."""

    name: str
    z: int
    mobility: float  # m^2/(V s)
    reference_density: float  # 1/m^3 (DoS or saturation density)
    band_energy: float  # eV
    statistics: StatisticsKind


@dataclass(frozen=True)
class PhysicalParams:
    temperature: float  # K
    relative_permittivity: float
    length: float  # m, scaling length (channel length h_C)
    carriers: dict  # name -> PhysicalCarrier for n, p, a
    doping_sign: int  # z_C
    doping_density: float  # 1/m^3, >= 0
    v_n: float  # m/s
    v_p: float  # m/s
    doping_scale: float | None = None  # 1/m^3; default doping_density


@dataclass(frozen=True)
class ScalingSet:
    """Scaling factors: lengths by l, potentials by U_T, time by l^2/(mu_a U_T),
    densities per carrier, current densities per carrier."""

    l: float
    U_T: float
    N_n_scale: float
    C_scale: float
    N_a_scale: float
    mu_scale: float
    mu_a_scale: float
    time_scale: float
    j_n_scale: float
    j_p_scale: float
    j_a_scale: float
    v_scale: float

    def validate(self) -> None:
        for name in (
            "l",
            "U_T",
            "N_n_scale",
            "C_scale",
            "N_a_scale",
            "mu_scale",
            "mu_a_scale",
            "time_scale",
            "j_n_scale",
            "j_p_scale",
            "j_a_scale",
            "v_scale",
        ):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"scaling.{name}", "must be positive")
        derived = {
            "time_scale": self.l**2 / (self.mu_a_scale * self.U_T),
            "j_n_scale": Q_E * self.U_T * self.N_n_scale * self.mu_scale / self.l,
            "j_p_scale": Q_E * self.U_T * self.C_scale * self.mu_scale / self.l,
            "j_a_scale": Q_E * self.U_T * self.N_a_scale * self.mu_a_scale / self.l,
            "v_scale": self.mu_scale * self.U_T / self.l,
        }
        for name, want in derived.items():
            have = getattr(self, name)
            if abs(have - want) > 1e-14 * abs(want):
                raise ValidationError(f"scaling.{name}", "inconsistent derived scale")


@dataclass(frozen=True)
class DimensionlessParams:
    lam: float  # rescaled Debye length
    nu: float  # mobility ratio
    delta_n: float
    delta_p: float

    @property
    def lam2(self) -> float:
        return self.lam * self.lam

    def validate(self) -> None:
        for name in ("lam", "nu", "delta_n", "delta_p"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"params.{name}", "must be positive")


@dataclass(frozen=True)
class DimlessCarrier:
    """Dimensionless per-carrier data for the scaled system.

    Density is nhat * F(eta) with eta = z*(phi - psi + ehat);
    face fluxes carry the mobility ratio mhat relative to the species scale.
    """

    name: str
    z: float
    kind: StatisticsKind
    mhat: float
    nhat: float
    ehat: float

    @property
    def kind_id(self) -> int:
        return self.kind.kind_id


@dataclass(frozen=True)
class DimlessSet:
    params: DimensionlessParams
    scaling: ScalingSet
    carriers: dict  # name -> DimlessCarrier
    z_C: int
    doping: float  # uniform dimensionless doping magnitude C-hat
    vhat_n: float
    vhat_p: float

    # time-derivative prefactors of the three mass balances
    @property
    def c_time(self) -> dict:
        return {"n": self.params.nu, "p": self.params.nu, "a": 1.0}


def nondimensionalize(physical: PhysicalParams) -> DimlessSet:
    """Scale a physical parameter set; raises ValidationError naming the field."""
    if physical.temperature <= 0.0:
        raise ValidationError("physics.temperature", "must be positive")
    if physical.relative_permittivity <= 0.0:
        raise ValidationError("physics.relative_permittivity", "must be positive")
    if physical.length <= 0.0:
        raise ValidationError("physics.length", "must be positive")
    if physical.doping_density < 0.0:
        raise ValidationError("physics.doping_density", "must be non-negative")
    if physical.doping_sign not in (-1, 1):
        raise ValidationError("physics.doping_sign", "must be -1 or +1")
    if physical.v_n < 0.0:
        raise ValidationError("physics.contacts.v_n", "must be non-negative")
    if physical.v_p < 0.0:
        raise ValidationError("physics.contacts.v_p", "must be non-negative")
    for cname in ("n", "p", "a"):
        if cname not in physical.carriers:
            raise ValidationError(f"physics.carriers.{cname}", "carrier missing")
        c = physical.carriers[cname]
        if c.mobility <= 0.0:
            raise ValidationError(f"physics.carriers.{cname}.mobility", "must be positive")
        if c.reference_density <= 0.0:
            raise ValidationError(
                f"physics.carriers.{cname}.reference_density", "must be positive"
            )
        if not math.isfinite(c.band_energy):
            raise ValidationError(f"physics.carriers.{cname}.band_energy", "must be finite")
    cn = physical.carriers["n"]
    cp = physical.carriers["p"]
    ca = physical.carriers["a"]
    if cn.z != -1:
        raise ValidationError("physics.carriers.n.z", "must be -1")
    if cp.z != +1:
        raise ValidationError("physics.carriers.p.z", "must be +1")
    if ca.z == 0:
        raise ValidationError("physics.carriers.a.z", "must be nonzero")

    u_t = K_B * physical.temperature / Q_E
    l = physical.length
    n_n_scale = cn.reference_density
    n_a_scale = ca.reference_density
    c_scale = physical.doping_scale
    if c_scale is None:
        c_scale = physical.doping_density if physical.doping_density > 0.0 else cp.reference_density
    if c_scale <= 0.0:
        raise ValidationError("physics.doping_scale", "must be positive")
    mu_scale = cn.mobility
    mu_a_scale = ca.mobility
    scaling = ScalingSet(
        l=l,
        U_T=u_t,
        N_n_scale=n_n_scale,
        C_scale=c_scale,
        N_a_scale=n_a_scale,
        mu_scale=mu_scale,
        mu_a_scale=mu_a_scale,
        time_scale=l * l / (mu_a_scale * u_t),
        j_n_scale=Q_E * u_t * n_n_scale * mu_scale / l,
        j_p_scale=Q_E * u_t * c_scale * mu_scale / l,
        j_a_scale=Q_E * u_t * n_a_scale * mu_a_scale / l,
        v_scale=mu_scale * u_t / l,
    )
    scaling.validate()

    eps_s = physical.relative_permittivity * EPS_0
    params = DimensionlessParams(
        lam=math.sqrt(eps_s * u_t / (l * l * Q_E * n_a_scale)),
        nu=mu_a_scale / mu_scale,
        delta_n=n_n_scale / n_a_scale,
        delta_p=c_scale / n_n_scale,
    )
    params.validate()

    dens_scale = {"n": n_n_scale, "p": c_scale, "a": n_a_scale}
    mob_scale = {"n": mu_scale, "p": mu_scale, "a": mu_a_scale}
    carriers = {}
    for cname in ("n", "p", "a"):
        c = physical.carriers[cname]
        carriers[cname] = DimlessCarrier(
            name=cname,
            z=float(c.z),
            kind=c.statistics,
            mhat=c.mobility / mob_scale[cname],
            nhat=c.reference_density / dens_scale[cname],
            ehat=c.band_energy / u_t,
        )
    return DimlessSet(
        params=params,
        scaling=scaling,
        carriers=carriers,
        z_C=physical.doping_sign,
        doping=physical.doping_density / c_scale,
        vhat_n=physical.v_n / scaling.v_scale,
        vhat_p=physical.v_p / scaling.v_scale,
    )


def table_defaults() -> PhysicalParams:
    """Reference MoS2 parameter set (300 K)."""
    return PhysicalParams(
        temperature=300.0,
        relative_permittivity=10.0,
        length=1e-6,
        carriers={
            "n": PhysicalCarrier(
                "n", -1, 2.5e-4, 1e25, -4.0, StatisticsKind.FERMI_DIRAC_ONE_HALF
            ),
            "p": PhysicalCarrier(
                "p", +1, 2.5e-4, 1.5e25, -5.3, StatisticsKind.FERMI_DIRAC_ONE_HALF
            ),
            "a": PhysicalCarrier(
                "a", +1, 5e-14, 1e28, -4.32, StatisticsKind.FERMI_DIRAC_MINUS_ONE
            ),
        },
        doping_sign=+1,
        doping_density=1.0e21,
        v_n=3.6e4,
        v_p=3.2e4,
    )
