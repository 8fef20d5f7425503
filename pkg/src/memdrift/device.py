"""Device-level configuration: doping, contacts, voltage signal, initial state.

Boundary conventions (dimensionless): at a contact face sigma of contact c,
  psi_sigma = psi_D(x_sigma) + V_c(t)/U_T      (both contact models)
  ohmic:    phi_n,sigma = phi_p,sigma = phi_D(x_sigma) + V_c(t)/U_T
  Schottky: carrier traces eliminated through the Robin flux with velocity
            vhat and reference densities n_D
with the reference densities
  n_D_alpha = nhat_alpha * F_alpha(z_alpha (phi_D - psi_D + ehat_alpha))
independent of the applied voltage. Ion flux through every contact is zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .physics import DimlessSet, StatisticsKind, ValidationError


class ProtocolRangeError(ValueError):
    """Time outside the protocol horizon."""


class ContactModel(enum.Enum):
    OHMIC = "ohmic"
    SCHOTTKY = "schottky"


@dataclass(frozen=True)
class Affine:
    """Affine-in-space scalar data a + b*x (first coordinate, dimensionless)."""

    a: float
    b: float = 0.0

    def __call__(self, x):
        return self.a + self.b * np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class ConstantVoltage:
    value: float  # V

    def voltage_at(self, t: float) -> float:
        if t < 0.0:
            raise ProtocolRangeError("t must be non-negative")
        return self.value

    @property
    def horizon(self) -> float:
        return math.inf

    def breakpoints(self):
        return np.empty(0)


@dataclass(frozen=True)
class PiecewiseLinearCycles:
    """Triangle cycles 0 -> +V_max -> -V_max -> 0 at a fixed sweep rate."""

    amplitude: float  # V_max, V
    rate: float  # V/s
    n_cycles: int

    def __post_init__(self):
        if self.amplitude <= 0.0 or self.rate <= 0.0 or self.n_cycles < 1:
            raise ValidationError(
                "protocol", "amplitude, rate must be positive and n_cycles >= 1"
            )

    @property
    def period(self) -> float:
        return 4.0 * self.amplitude / self.rate

    @property
    def horizon(self) -> float:
        return self.n_cycles * self.period

    def voltage_at(self, t: float) -> float:
        if t < 0.0:
            raise ProtocolRangeError("t must be non-negative")
        if t > self.horizon * (1.0 + 1e-12):
            raise ProtocolRangeError(
                f"t = {t} is beyond the protocol horizon {self.horizon}"
            )
        q = self.amplitude / self.rate  # quarter period
        u = math.fmod(t, self.period)
        if u <= q:
            return self.rate * u
        if u <= 3.0 * q:
            return self.amplitude - self.rate * (u - q)
        return -self.amplitude + self.rate * (u - 3.0 * q)

    def breakpoints(self):
        """Corner times of the triangle wave over the full horizon."""
        q = self.amplitude / self.rate
        return np.arange(0, 4 * self.n_cycles + 1) * q


def voltage_at(protocol, t: float) -> float:
    return protocol.voltage_at(t)


@dataclass(frozen=True)
class Doping:
    """Background charge: sign z_C and dimensionless density >= 0."""

    sign: int
    density: object  # float (uniform) or per-cell array

    def cell_array(self, n_cells: int) -> np.ndarray:
        arr = np.asarray(self.density, dtype=np.float64)
        if arr.ndim == 0:
            arr = np.full(n_cells, float(arr))
        if arr.shape != (n_cells,):
            raise ValidationError("device.doping", "density shape does not match mesh")
        if np.any(arr < 0.0):
            raise ValidationError("device.doping", "density must be non-negative")
        return arr


@dataclass(frozen=True)
class ContactSpec:
    """Contact data shared by all contacts of a device.

    psi_D/phi_D: per-contact dimensionless affine Dirichlet data.
    protocols: per-contact voltage signal (physical volts and seconds).
    barrier/phi0f enter only through the default psi_D/phi_D values and are
    kept for reporting.
    """

    model: ContactModel
    psi_D: dict  # contact_id -> Affine (dimensionless)
    phi_D: dict  # contact_id -> Affine (dimensionless)
    protocols: dict  # contact_id -> voltage protocol
    barrier_eV: float = 0.0
    phi0f_V: float = 0.0
    v_n: float = 0.0  # m/s, Schottky recombination velocity
    v_p: float = 0.0

    def validate(self) -> None:
        if self.v_n < 0.0 or self.v_p < 0.0:
            raise ValidationError("device.contacts.v", "must be non-negative")
        if set(self.psi_D) != set(self.phi_D) or set(self.psi_D) != set(self.protocols):
            raise ValidationError(
                "device.contacts", "psi_D, phi_D, protocols must share contact ids"
            )


def default_contacts(
    dimless: DimlessSet,
    model: ContactModel,
    barrier_eV: float,
    phi0f_V: float,
    v_n: float,
    v_p: float,
    protocols: dict,
) -> ContactSpec:
    """Contact data with the barrier-consistent built-in potential.

    psi0 = -(barrier - E_n)/q as a voltage, constant in space; the contact
    quasi Fermi level phi0f is likewise constant. Both are scaled by U_T.
    """
    u_t = dimless.scaling.U_T
    e_n_eV = dimless.carriers["n"].ehat * u_t
    psi0_hat = -(barrier_eV - e_n_eV) / u_t
    phi0_hat = phi0f_V / u_t
    ids = sorted(protocols)
    return ContactSpec(
        model=model,
        psi_D={c: Affine(psi0_hat) for c in ids},
        phi_D={c: Affine(phi0_hat) for c in ids},
        protocols=dict(protocols),
        barrier_eV=barrier_eV,
        phi0f_V=phi0f_V,
        v_n=v_n,
        v_p=v_p,
    )


class InitialMode(enum.Enum):
    THERMAL_EQUILIBRIUM = "thermal-equilibrium"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class InitialState:
    mode: InitialMode
    phi_n: np.ndarray | None = None
    phi_p: np.ndarray | None = None
    phi_a: np.ndarray | None = None

    def validate(self) -> None:
        if self.mode is InitialMode.EXPLICIT:
            for name in ("phi_n", "phi_p", "phi_a"):
                arr = getattr(self, name)
                if arr is None or not np.all(np.isfinite(arr)):
                    raise ValidationError(f"device.initial.{name}", "must be finite")


def thermal_equilibrium() -> InitialState:
    return InitialState(InitialMode.THERMAL_EQUILIBRIUM)


def equilibrium_boundary_densities(
    contact: ContactSpec, carriers: dict, contact_id: int, x: float = 0.0
) -> dict:
    """Voltage-free reference trace densities n_D per carrier at one contact.

    Includes the carrier prefactor nhat; for Schottky contacts these are the
    equilibrium densities set by the barrier.
    """
    psi = float(contact.psi_D[contact_id](x))
    phi = float(contact.phi_D[contact_id](x))
    out = {}
    for name, c in carriers.items():
        eta = c.z * (phi - psi + c.ehat)
        f, _, _ = _k.stats_fpg(c.kind_id, eta)
        out[name] = c.nhat * f
    return out


@dataclass(frozen=True)
class DeviceSpec:
    """Complete device description in dimensionless variables."""

    dimless: DimlessSet
    doping: Doping
    contacts: ContactSpec
    initial: InitialState
    width: float  # h_W, m
    thickness: float  # h_T, m
    ion_flux_scale: float = 1.0  # 0 freezes the ion distribution

    def validate(self) -> None:
        self.contacts.validate()
        if self.doping.sign not in (-1, 1):
            raise ValidationError("device.doping.sign", "must be -1 or +1")
        if self.width <= 0.0 or self.thickness <= 0.0:
            raise ValidationError("device.geometry", "width and thickness must be positive")
        if self.ion_flux_scale not in (0.0, 1.0):
            raise ValidationError("device.ion_flux_scale", "must be 0 or 1")

    def voltage_V(self, contact_id: int, t_s: float) -> float:
        return self.contacts.protocols[contact_id].voltage_at(t_s)

    def vhat_at(self, contact_id: int, t_hat: float) -> float:
        t_s = t_hat * self.dimless.scaling.time_scale
        return self.voltage_V(contact_id, t_s) / self.dimless.scaling.U_T

    def horizon_hat(self) -> float:
        h = min(p.horizon for p in self.contacts.protocols.values())
        return h / self.dimless.scaling.time_scale

    def area_prefactor(self, dimension: int) -> float:
        """Ampere per unit dimensionless ion-scale current (A)."""
        s = self.dimless.scaling
        if dimension == 1:
            return s.j_a_scale * self.width * self.thickness
        return s.j_a_scale * s.l * self.width

    def vhat_schottky(self) -> dict:
        s = self.dimless
        return {"n": s.vhat_n, "p": s.vhat_p}


@dataclass(frozen=True)
class BoundaryData:
    """Voltage-free per-boundary-face data, cached per mesh.

    Arrays are aligned with mesh.bnd_* packing; contact < 0 marks insulating
    faces (their entries are zero and unused).
    """

    contact: np.ndarray  # contact id, -1 insulating
    psi_base: np.ndarray  # psi_D(x_sigma)
    phi_base: np.ndarray  # phi_D(x_sigma)
    n_d: dict  # carrier -> n_D per face (prefactor included)


def boundary_data(dev: DeviceSpec, mesh) -> BoundaryData:
    nb = len(mesh.bnd_cell)
    contact = mesh.bnd_contact.copy()
    psi_base = np.zeros(nb)
    phi_base = np.zeros(nb)
    x = mesh.bnd_centers[:, 0]
    for cid in dev.contacts.protocols:
        sel = contact == cid
        psi_base[sel] = dev.contacts.psi_D[cid](x[sel])
        phi_base[sel] = dev.contacts.phi_D[cid](x[sel])
    n_d = {}
    for name, c in dev.dimless.carriers.items():
        arr = np.zeros(nb)
        mask = contact >= 0
        eta = c.z * (phi_base[mask] - psi_base[mask] + c.ehat)
        vals = np.empty_like(eta)
        f = np.empty_like(eta)
        fp = np.empty_like(eta)
        g = np.empty_like(eta)
        _k.stats_fill(c.kind_id, np.ascontiguousarray(eta), f, fp, g)
        vals = c.nhat * f
        arr[mask] = vals
        n_d[name] = arr
    return BoundaryData(contact=contact, psi_base=psi_base, phi_base=phi_base, n_d=n_d)


def contact_voltages(dev: DeviceSpec, t_hat: float) -> dict:
    return {cid: dev.vhat_at(cid, t_hat) for cid in dev.contacts.protocols}


def face_voltages(bd: BoundaryData, volts_hat: dict) -> np.ndarray:
    """Per-boundary-face applied dimensionless voltage (0 on insulating)."""
    v = np.zeros_like(bd.psi_base)
    for cid, val in volts_hat.items():
        v[bd.contact == cid] = val
    return v
