"""Device data: protocols, doping, contacts, scaling constants, validation."""

import dataclasses
import math

import numpy as np
import pytest

from memdrift.device import (
    Affine,
    ConstantVoltage,
    ContactModel,
    DeviceSpec,
    Doping,
    InitialMode,
    InitialState,
    PiecewiseLinearCycles,
    ProtocolRangeError,
    boundary_data,
    contact_voltages,
    equilibrium_boundary_densities,
    face_voltages,
    thermal_equilibrium,
)
from memdrift.physics import ValidationError, stats_eval
from tests.conftest import build_desk


@pytest.fixture(scope="module")
def desk():
    mesh, dev, grid, settings, t_final, outputs = build_desk()
    return mesh, dev


# ------------------------------------------------------------------- protocols


def test_constant_protocol():
    p = ConstantVoltage(2.5)
    assert p.voltage_at(0.0) == 2.5
    assert p.voltage_at(1e9) == 2.5
    assert math.isinf(p.horizon)
    assert p.breakpoints().size == 0
    with pytest.raises(ProtocolRangeError):
        p.voltage_at(-1e-9)


def test_triangle_corners_and_period():
    p = PiecewiseLinearCycles(amplitude=13.0, rate=5.0, n_cycles=2)
    assert p.period == 10.4
    assert p.horizon == 20.8
    q = 2.6
    assert p.voltage_at(0.0) == 0.0
    assert p.voltage_at(q) == 13.0
    assert p.voltage_at(3 * q) == -13.0
    assert p.voltage_at(4 * q) == pytest.approx(0.0, abs=1e-12)
    # the -V_max corner of the second cycle
    assert p.voltage_at(18.2) == pytest.approx(-13.0, rel=1e-12)
    np.testing.assert_allclose(p.breakpoints(), np.arange(9) * 2.6, rtol=1e-15)


def test_triangle_against_interpolation_oracle():
    p = PiecewiseLinearCycles(amplitude=1.7, rate=0.4, n_cycles=3)
    q = 1.7 / 0.4
    tk = np.array([0.0, q, 3 * q, 4 * q])
    vk = np.array([0.0, 1.7, -1.7, 0.0])
    ts = np.linspace(0.0, p.horizon, 1201)
    want = np.interp(np.mod(ts, p.period), tk, vk)
    got = np.array([p.voltage_at(t) for t in ts])
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_triangle_range_errors():
    p = PiecewiseLinearCycles(amplitude=1.0, rate=1.0, n_cycles=1)
    with pytest.raises(ProtocolRangeError):
        p.voltage_at(-0.1)
    with pytest.raises(ProtocolRangeError):
        p.voltage_at(p.horizon * 1.01)
    with pytest.raises(ValidationError):
        PiecewiseLinearCycles(amplitude=-1.0, rate=1.0, n_cycles=1)
    with pytest.raises(ValidationError):
        PiecewiseLinearCycles(amplitude=1.0, rate=1.0, n_cycles=0)


# ---------------------------------------------------------------------- doping


def test_doping_scalar_broadcast():
    arr = Doping(1, 0.25).cell_array(6)
    np.testing.assert_array_equal(arr, np.full(6, 0.25))


def test_doping_array_passthrough_and_errors():
    vals = np.linspace(0.0, 1.0, 5)
    np.testing.assert_array_equal(Doping(-1, vals).cell_array(5), vals)
    with pytest.raises(ValidationError):
        Doping(1, vals).cell_array(7)
    with pytest.raises(ValidationError):
        Doping(1, np.array([0.1, -0.2, 0.3])).cell_array(3)


# --------------------------------------------------- scaling constants (frozen)


def test_scaling_constants(desk):
    _, dev = desk
    s = dev.dimless.scaling
    p = dev.dimless.params
    assert s.U_T == pytest.approx(0.025851999786435535, rel=1e-14)
    assert p.lam2 == pytest.approx(1.4286718242426059e-9, rel=1e-12)
    assert p.nu == pytest.approx(2e-10, rel=1e-12)
    assert p.delta_n == pytest.approx(1e-3, rel=1e-12)
    assert p.delta_p == pytest.approx(1e-4, rel=1e-12)
    assert s.time_scale == pytest.approx(773.6345414366721, rel=1e-12)
    assert s.j_n_scale == pytest.approx(10354867.5, rel=1e-12)
    assert s.j_p_scale == pytest.approx(1035.48675, rel=1e-12)
    assert s.j_a_scale == pytest.approx(2.0709735, rel=1e-12)
    assert dev.dimless.vhat_n == pytest.approx(5570.168698344039, rel=1e-12)
    assert dev.dimless.vhat_p == pytest.approx(4951.261065194701, rel=1e-12)


def test_band_offsets_and_prefactors(desk):
    _, dev = desk
    dl = dev.dimless
    assert dl.carriers["n"].ehat == pytest.approx(-154.72690828733442, rel=1e-12)
    assert dl.carriers["p"].ehat == pytest.approx(-205.0131534807181, rel=1e-12)
    assert dl.carriers["a"].ehat == pytest.approx(-167.1050609503212, rel=1e-12)
    assert dl.carriers["n"].nhat == 1.0
    assert dl.carriers["p"].nhat == pytest.approx(1.5e4, rel=1e-12)
    assert dl.carriers["a"].nhat == 1.0
    assert dl.carriers["n"].z == -1.0
    assert dl.carriers["p"].z == 1.0
    assert dl.carriers["a"].z == 1.0


def test_area_prefactors(desk):
    _, dev = desk
    # interval: j_a * h_W * h_T; cross-section: j_a * l * h_W
    assert dev.area_prefactor(1) == pytest.approx(3.10646025e-13, rel=1e-12)
    assert dev.area_prefactor(2) == pytest.approx(2.0709735e-11, rel=1e-12)
    s = dev.dimless.scaling
    assert dev.area_prefactor(1) == pytest.approx(
        s.j_a_scale * dev.width * dev.thickness, rel=1e-15
    )
    assert dev.area_prefactor(2) == pytest.approx(
        s.j_a_scale * s.l * dev.width, rel=1e-15
    )


# -------------------------------------------------------------------- contacts


def test_contact_dirichlet_recompute(desk):
    """psi_D is the barrier-consistent built-in potential, phi_D the applied
    quasi Fermi level, both constant in space by default."""
    _, dev = desk
    ct = dev.contacts
    u_t = dev.dimless.scaling.U_T
    e_n_eV = dev.dimless.carriers["n"].ehat * u_t
    want_psi = -(ct.barrier_eV - e_n_eV) / u_t
    for cid in (0, 1):
        assert ct.psi_D[cid].a == pytest.approx(want_psi, rel=1e-14)
        assert ct.psi_D[cid].b == 0.0
        assert ct.phi_D[cid].a == ct.phi0f_V / u_t
    assert ct.model is ContactModel.SCHOTTKY
    assert ct.barrier_eV == 0.001


def test_equilibrium_boundary_densities_recompute(desk):
    _, dev = desk
    ct = dev.contacts
    n_d = equilibrium_boundary_densities(ct, dev.dimless.carriers, 0)
    for name, c in dev.dimless.carriers.items():
        eta = c.z * (float(ct.phi_D[0](0.0)) - float(ct.psi_D[0](0.0)) + c.ehat)
        want = c.nhat * stats_eval(c.kind, eta)
        assert n_d[name] == pytest.approx(want, rel=1e-14)
        assert n_d[name] > 0.0


def test_vhat_and_horizon(desk):
    _, dev = desk
    s = dev.dimless.scaling
    t_hat = 1.2345
    want = dev.voltage_V(1, t_hat * s.time_scale) / s.U_T
    assert dev.vhat_at(1, t_hat) == pytest.approx(want, rel=1e-14)
    assert dev.horizon_hat() == pytest.approx(20.8 / s.time_scale, rel=1e-14)
    assert dev.vhat_schottky() == {
        "n": dev.dimless.vhat_n,
        "p": dev.dimless.vhat_p,
    }


def test_device_validation_errors(desk):
    _, dev = desk
    with pytest.raises(ValidationError):
        dataclasses.replace(dev, doping=Doping(0, 0.1)).validate()
    with pytest.raises(ValidationError):
        dataclasses.replace(dev, width=-1.0).validate()
    with pytest.raises(ValidationError):
        dataclasses.replace(dev, ion_flux_scale=0.5).validate()
    dataclasses.replace(dev, ion_flux_scale=0.0).validate()


def test_initial_state_validation():
    thermal_equilibrium().validate()
    ok = InitialState(InitialMode.EXPLICIT, np.zeros(3), np.zeros(3), np.zeros(3))
    ok.validate()
    with pytest.raises(ValidationError):
        InitialState(InitialMode.EXPLICIT, np.zeros(3), None, np.zeros(3)).validate()
    with pytest.raises(ValidationError):
        InitialState(
            InitialMode.EXPLICIT, np.zeros(3), np.full(3, np.nan), np.zeros(3)
        ).validate()


# --------------------------------------------------------------- boundary data


def test_boundary_data_interval(desk):
    mesh, dev = desk
    bd = boundary_data(dev, mesh)
    assert bd.contact.shape == (2,)
    assert set(bd.contact) == {0, 1}
    for cid in (0, 1):
        sel = bd.contact == cid
        assert bd.psi_base[sel] == pytest.approx(dev.contacts.psi_D[cid].a)
        assert bd.phi_base[sel] == pytest.approx(dev.contacts.phi_D[cid].a)
    ref = equilibrium_boundary_densities(dev.contacts, dev.dimless.carriers, 0)
    for name in ("n", "p", "a"):
        assert bd.n_d[name][bd.contact == 0] == pytest.approx(ref[name], rel=1e-14)


def test_boundary_data_insulating_zeroed():
    mesh, dev, *_ = build_desk(
        {"geometry": {"dimension": "2", "nx": "6", "nz": "2"}}
    )
    bd = boundary_data(dev, mesh)
    ins = bd.contact < 0
    assert np.any(ins)
    assert np.all(bd.psi_base[ins] == 0.0)
    for name in ("n", "p", "a"):
        assert np.all(bd.n_d[name][ins] == 0.0)
        assert np.all(bd.n_d[name][~ins] > 0.0)


def test_face_voltages_scatter(desk):
    mesh, dev = desk
    bd = boundary_data(dev, mesh)
    v = face_voltages(bd, {0: 0.0, 1: 7.5})
    assert v[bd.contact == 1] == pytest.approx(7.5)
    assert v[bd.contact == 0] == pytest.approx(0.0)
    volts = contact_voltages(dev, 0.0)
    assert volts == {0: 0.0, 1: 0.0}


def test_affine_evaluates_along_first_coordinate():
    f = Affine(2.0, -0.5)
    np.testing.assert_allclose(f(np.array([0.0, 1.0, 4.0])), [2.0, 1.5, 0.0])
    assert f(2.0) == 1.0
