"""Mesh construction: counting, measures, transmissibilities, tags, errors."""

import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memdrift.mesh import (
    INSULATING,
    AdmissibleMesh,
    Cell,
    Contact,
    ContactConfig,
    Face,
    GeometrySpec,
    InconsistentConfigError,
    InvalidResolutionError,
    MeshError,
    OverlappingElectrodesError,
    _graded_widths,
    build_device_mesh,
    build_interval_mesh,
)

SCALE = SimpleNamespace(l=1e-6)


def geom(cfg=ContactConfig.SIDE, h_C=1e-6, h_T=15e-9, h_E=0.0, nx=8, nz=2, grading=1.0):
    return GeometrySpec(cfg, h_C, h_T, h_E, nx, nz, grading)


def contact_faces(mesh, cid=None):
    out = [f for f in mesh.faces if isinstance(f.tag, Contact)]
    if cid is not None:
        out = [f for f in out if f.tag.contact_id == cid]
    return out


def insulating_faces(mesh):
    return [f for f in mesh.faces if f.tag is INSULATING]


def interior_faces(mesh):
    return [f for f in mesh.faces if f.is_interior]


# ---------------------------------------------------------------- graded widths


def test_uniform_widths_are_exact():
    w = _graded_widths(5, 1.0)
    assert np.all(w == 0.2)


def test_graded_widths_even_oracle():
    # n=6, g=2: w0*[1,2,4,4,2,1] with w0 = 0.5/7
    w = _graded_widths(6, 2.0)
    w0 = 0.5 / 7.0
    np.testing.assert_allclose(w, w0 * np.array([1, 2, 4, 4, 2, 1]), rtol=1e-15)


def test_graded_widths_odd_oracle():
    # n=5, g=3: w0*[1,3,9,3,1] with w0 = 1/(2*(1+3)+9)
    w = _graded_widths(5, 3.0)
    w0 = 1.0 / 17.0
    np.testing.assert_allclose(w, w0 * np.array([1, 3, 9, 3, 1]), rtol=1e-15)


@given(st.integers(2, 40), st.floats(1.0, 3.0))
@settings(max_examples=150, deadline=None)
def test_graded_widths_properties(n, g):
    w = _graded_widths(n, g)
    assert w.shape == (n,)
    assert np.all(w > 0.0)
    assert abs(float(np.sum(w)) - 1.0) < 1e-12
    np.testing.assert_allclose(w, w[::-1], rtol=1e-12)
    half = n // 2
    for i in range(half - 1):
        assert abs(w[i + 1] / w[i] - g) < 1e-12 * g


# -------------------------------------------------------------------- 1D meshes


def test_interval_counts_and_partition():
    m = build_interval_mesh(1e-6, 7)
    assert m.dimension == 1
    assert m.n_cells == 7
    assert m.n_faces == 8
    assert len(contact_faces(m, 0)) == 1 and len(contact_faces(m, 1)) == 1
    assert len(interior_faces(m)) == 6
    assert not insulating_faces(m)
    assert abs(m.domain_measure() - 1.0) < 1e-15


def test_interval_uniform_transmissibilities():
    # dx = 1/4: interior tau = 4, endpoint tau = 1/(dx/2) = 8
    m = build_interval_mesh(1e-6, 4)
    np.testing.assert_allclose(m.int_tau, 4.0, rtol=1e-15)
    np.testing.assert_allclose(m.bnd_tau, 8.0, rtol=1e-15)
    assert m.faces[0].center == (0.0,)
    assert m.faces[-1].center == (1.0,)


def test_interval_graded_endpoints_refined():
    m = build_interval_mesh(1e-6, 10, grading=1.5)
    meas = m.cell_measures
    assert meas[0] < meas[4]
    assert abs(meas[0] - meas[-1]) < 1e-15
    assert abs(float(np.sum(meas)) - 1.0) < 1e-12
    m.validate()


def test_interval_rejects_degenerate():
    with pytest.raises(InvalidResolutionError):
        build_interval_mesh(1e-6, 1)
    with pytest.raises(InvalidResolutionError):
        build_interval_mesh(1e-6, 8, grading=0.5)
    with pytest.raises(MeshError):
        build_interval_mesh(-1e-6, 8)


# -------------------------------------------------------------------- 2D meshes


def test_side_4x2_face_partition():
    m = build_device_mesh(geom(nx=4, nz=2), SCALE)
    assert m.n_cells == 8
    # vertical (nx+1)*nz = 10, horizontal nx*(nz+1) = 12
    assert m.n_faces == 22
    assert len(contact_faces(m, 0)) == 2
    assert len(contact_faces(m, 1)) == 2
    assert len(insulating_faces(m)) == 8
    assert len(interior_faces(m)) == 10


def test_side_measures_and_taus():
    m = build_device_mesh(geom(nx=4, nz=2), SCALE)
    xlen, zlen = 1.0, 15e-9 / 1e-6
    dx, dz = xlen / 4, zlen / 2
    np.testing.assert_allclose(m.cell_measures, dx * dz, rtol=1e-15)
    assert abs(m.domain_measure() - xlen * zlen) < 1e-15
    for f in interior_faces(m):
        k, l = f.cells
        ck = np.asarray(m.cells[k].center)
        cl = np.asarray(m.cells[l].center)
        d = cl - ck
        if abs(d[0]) > abs(d[1]):  # vertical face
            np.testing.assert_allclose(f.measure, dz, rtol=1e-15)
            np.testing.assert_allclose(f.distance, dx, rtol=1e-12)
        else:
            np.testing.assert_allclose(f.measure, dx, rtol=1e-15)
            np.testing.assert_allclose(f.distance, dz, rtol=1e-12)
        np.testing.assert_allclose(f.transmissibility, f.measure / f.distance, rtol=1e-15)
    # walls sit half a cell from the first center
    for f in contact_faces(m):
        np.testing.assert_allclose(f.distance, dx / 2, rtol=1e-12)


def test_mixed_quarter_extension_counting():
    # extension ratio 1/4 on an 8-column channel adds 2 columns per side
    m = build_device_mesh(
        geom(ContactConfig.MIXED, h_E=0.25e-6, nx=8, nz=2), SCALE
    )
    assert m.n_cells == (8 + 2 + 2) * 2
    top0 = [f for f in contact_faces(m, 0) if f.center[1] > 0]
    wall0 = [f for f in contact_faces(m, 0) if f.center[1] < 0.015]
    top0 = [f for f in contact_faces(m, 0) if abs(f.center[1] - 0.015) < 1e-12]
    assert len(top0) == 2
    assert all(f.center[0] < 0 for f in top0)
    wall0 = [f for f in contact_faces(m, 0) if f not in top0]
    assert len(wall0) == 2
    assert all(f.center[0] == -0.25 for f in wall0)


def test_top_contacts_leave_walls_insulating():
    m = build_device_mesh(geom(ContactConfig.TOP, h_E=0.25e-6, nx=8, nz=2), SCALE)
    assert len(contact_faces(m, 0)) == 2
    assert len(contact_faces(m, 1)) == 2
    for f in contact_faces(m):
        assert abs(f.center[1] - 0.015) < 1e-12  # all on the top surface
    walls = [f for f in insulating_faces(m) if abs(abs(f.center[0]) - 0.25) < 1e-12
             or abs(f.center[0] - 1.25) < 1e-12]
    assert walls


def test_electrode_gap_is_preserved():
    """Growing the extension must not move the inner electrode edges."""
    for ratio in (0.1, 0.3):
        m = build_device_mesh(
            geom(ContactConfig.TOP, h_E=ratio * 1e-6, nx=10, nz=2), SCALE
        )
        tops = contact_faces(m)
        inner0 = max(f.center[0] for f in tops if f.center[0] < 0.5)
        inner1 = min(f.center[0] for f in tops if f.center[0] > 0.5)
        # every electrode face lies strictly outside the channel [0, 1]
        assert inner0 < 0.0
        assert inner1 > 1.0
        xs = sorted({f.center[0] for f in m.faces if not f.is_interior})
        assert math.isclose(min(xs), -ratio, rel_tol=1e-12)
        assert math.isclose(max(xs), 1.0 + ratio, rel_tol=1e-12)


def test_single_column_floor_for_narrow_extension():
    # nx*ratio rounds to zero but at least one column is always meshed
    m = build_device_mesh(
        geom(ContactConfig.TOP, h_E=0.02e-6, nx=10, nz=2), SCALE
    )
    assert m.n_cells == (10 + 1 + 1) * 2
    assert len(contact_faces(m, 0)) == 1


def test_mesh_lines_hit_electrode_edges():
    m = build_device_mesh(geom(ContactConfig.MIXED, h_E=0.3e-6, nx=10, nz=3), SCALE)
    xs = {f.center[0] for f in m.faces}
    assert 0.0 in xs
    assert any(abs(x - 1.0) < 1e-15 for x in xs)


def test_bottom_is_always_insulating():
    for cfg, he in ((ContactConfig.SIDE, 0.0), (ContactConfig.TOP, 0.25e-6),
                    (ContactConfig.MIXED, 0.25e-6)):
        m = build_device_mesh(geom(cfg, h_E=he, nx=8, nz=2), SCALE)
        bottoms = [f for f in m.faces if not f.is_interior and f.center[1] == 0.0]
        assert bottoms
        assert all(f.tag is INSULATING for f in bottoms)


def test_packed_arrays_match_face_lists():
    m = build_device_mesh(geom(ContactConfig.MIXED, h_E=0.25e-6, nx=8, nz=2), SCALE)
    assert len(m.int_tau) == len(interior_faces(m))
    assert len(m.bnd_tau) == len(m.faces) - len(m.int_tau)
    assert set(np.unique(m.bnd_contact)) <= {-1, 0, 1}
    for fid, tau in zip(m.int_face_id, m.int_tau):
        assert m.faces[fid].transmissibility == tau
    for fid, cellk in zip(m.bnd_face_id, m.bnd_cell):
        assert m.faces[fid].cells == (cellk,)


def test_geometry_error_cases():
    with pytest.raises(OverlappingElectrodesError):
        geom(ContactConfig.TOP, h_E=0.6e-6).validate()
    with pytest.raises(InconsistentConfigError):
        geom(ContactConfig.SIDE, h_E=0.1e-6).validate()
    with pytest.raises(InconsistentConfigError):
        geom(ContactConfig.TOP, h_E=0.0).validate()
    with pytest.raises(InconsistentConfigError):
        geom(ContactConfig.TOP, h_E=0.1e-6, grading=1.2).validate()
    with pytest.raises(InvalidResolutionError):
        geom(nx=1).validate()
    with pytest.raises(InvalidResolutionError):
        geom(nz=0).validate()
    with pytest.raises(MeshError):
        geom(h_C=0.0).validate()


def test_validate_rejects_corrupted_geometry():
    m = build_interval_mesh(1e-6, 3)
    bad_cells = [Cell(c.id, c.center, c.measure) for c in m.cells]
    bad_faces = list(m.faces)
    f = bad_faces[1]
    bad_faces[1] = Face(f.id, f.measure, f.distance, f.transmissibility * 1.5,
                        f.cells, f.tag, f.center)
    broken = AdmissibleMesh(
        dimension=m.dimension, cells=bad_cells, faces=bad_faces,
        cell_centers=m.cell_centers, cell_measures=m.cell_measures,
        int_cell_k=m.int_cell_k, int_cell_l=m.int_cell_l, int_tau=m.int_tau,
        int_face_id=m.int_face_id, bnd_cell=m.bnd_cell, bnd_tau=m.bnd_tau,
        bnd_measure=m.bnd_measure, bnd_contact=m.bnd_contact,
        bnd_face_id=m.bnd_face_id, bnd_centers=m.bnd_centers,
    )
    with pytest.raises(MeshError):
        broken.validate()


def test_validate_rejects_skewed_cell_pair():
    m = build_device_mesh(geom(nx=4, nz=2), SCALE)
    centers = m.cell_centers.copy()
    cells = [Cell(c.id, tuple(centers[c.id]), c.measure) for c in m.cells]
    k = m.int_cell_k[0]
    cells[k] = Cell(cells[k].id,
                    (cells[k].center[0] + 0.03, cells[k].center[1] + 0.003),
                    cells[k].measure)
    broken = AdmissibleMesh(
        dimension=2, cells=cells, faces=m.faces,
        cell_centers=centers, cell_measures=m.cell_measures,
        int_cell_k=m.int_cell_k, int_cell_l=m.int_cell_l, int_tau=m.int_tau,
        int_face_id=m.int_face_id, bnd_cell=m.bnd_cell, bnd_tau=m.bnd_tau,
        bnd_measure=m.bnd_measure, bnd_contact=m.bnd_contact,
        bnd_face_id=m.bnd_face_id, bnd_centers=m.bnd_centers,
    )
    with pytest.raises(MeshError):
        broken.validate()


# ---------------------------------------------------------------- serialization


def test_serialize_is_deterministic_and_full_precision():
    m = build_device_mesh(geom(ContactConfig.MIXED, h_E=0.3e-6, nx=6, nz=2), SCALE)
    text = m.serialize()
    assert text == m.serialize()
    lines = text.strip().split("\n")
    assert lines[0] == "dimension 2"
    assert lines[1] == f"cells {m.n_cells}"
    # cell rows round-trip measure and coordinates bitwise through repr17
    for c in m.cells:
        parts = lines[2 + c.id].split()
        assert int(parts[0]) == c.id
        assert float(parts[1]) == c.measure
        assert float(parts[2]) == c.center[0]
        assert float(parts[3]) == c.center[1]
    ihdr = 2 + m.n_cells
    assert lines[ihdr] == f"faces {m.n_faces}"
    for f in m.faces:
        parts = lines[ihdr + 1 + f.id].split()
        assert float(parts[3]) == f.transmissibility
        kind = parts[4]
        assert kind == ("interior" if f.is_interior else "boundary")


def test_serialize_tags_match_faces():
    m = build_interval_mesh(1e-6, 3)
    text = m.serialize()
    assert "contact 0" in text
    assert "contact 1" in text
    assert "insulating" not in text
    m2 = build_device_mesh(geom(nx=4, nz=1), SCALE)
    assert "insulating" in m2.serialize()
