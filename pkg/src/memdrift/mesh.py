"""Admissible finite-volume meshes: 1D intervals and 2D tensor-product rectangles.

All coordinates are dimensionless (lengths divided by the scaling length).
Interior faces store the two adjacent cells; boundary faces carry either a
Contact(contact_id) tag or Insulating. Transmissibility tau = m_sigma/d_sigma.
Meshes are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    pass


class InvalidResolutionError(MeshError):
    pass


class OverlappingElectrodesError(MeshError):
    pass


class InconsistentConfigError(MeshError):
    pass


@dataclass(frozen=True)
class Contact:
    contact_id: int


@dataclass(frozen=True)
class Insulating:
    pass


INSULATING = Insulating()


@dataclass(frozen=True)
class Cell:
    id: int
    center: tuple
    measure: float


@dataclass(frozen=True)
class Face:
    id: int
    measure: float
    distance: float
    transmissibility: float
    cells: tuple  # (K,) boundary or (K, L) interior
    tag: object | None  # Contact/Insulating for boundary faces, None interior
    center: tuple

    @property
    def is_interior(self) -> bool:
        return len(self.cells) == 2


class ContactConfig(enum.Enum):
    SIDE = "side"
    TOP = "top"
    MIXED = "mixed"


@dataclass(frozen=True)
class GeometrySpec:
    """Physical x-z cross-section geometry; lengths in meters."""

    contact_config: ContactConfig
    h_C: float  # channel length along x (electrode gap)
    h_T: float  # flake thickness along z
    h_E: float  # top-electrode length, added beyond the channel per side
    nx: int  # columns across the channel
    nz: int
    grading: float = 1.0

    def validate(self) -> None:
        if self.h_C <= 0.0 or self.h_T <= 0.0:
            raise MeshError("h_C and h_T must be positive")
        if self.h_E < 0.0:
            raise MeshError("h_E must be non-negative")
        if self.h_E > self.h_C / 2.0:
            raise OverlappingElectrodesError(
                f"electrodes overlap: h_E = {self.h_E} exceeds h_C/2 = {self.h_C / 2.0}"
            )
        if self.contact_config is ContactConfig.SIDE and self.h_E > 0.0:
            raise InconsistentConfigError("side-contact configuration requires h_E = 0")
        if self.contact_config is not ContactConfig.SIDE and self.h_E == 0.0:
            raise InconsistentConfigError(
                "top/mixed contact configurations require h_E > 0"
            )
        if self.nx < 2 or self.nz < 1:
            raise InvalidResolutionError("need nx >= 2 and nz >= 1")
        if self.grading < 1.0:
            raise InvalidResolutionError("grading factor must be >= 1")
        if self.contact_config is not ContactConfig.SIDE and self.grading != 1.0:
            raise InconsistentConfigError(
                "grading is only supported for side contacts"
            )


@dataclass(frozen=True)
class AdmissibleMesh:
    dimension: int
    cells: list
    faces: list
    # packed arrays for assembly (derived, read-only)
    cell_centers: np.ndarray = field(repr=False)
    cell_measures: np.ndarray = field(repr=False)
    int_cell_k: np.ndarray = field(repr=False)
    int_cell_l: np.ndarray = field(repr=False)
    int_tau: np.ndarray = field(repr=False)
    int_face_id: np.ndarray = field(repr=False)
    bnd_cell: np.ndarray = field(repr=False)
    bnd_tau: np.ndarray = field(repr=False)
    bnd_measure: np.ndarray = field(repr=False)
    bnd_contact: np.ndarray = field(repr=False)  # contact id, -1 insulating
    bnd_face_id: np.ndarray = field(repr=False)
    bnd_centers: np.ndarray = field(repr=False)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def cell_of_face(self, face_id: int) -> tuple:
        return self.faces[face_id].cells

    def boundary_tag(self, face_id: int):
        tag = self.faces[face_id].tag
        if tag is None:
            raise MeshError(f"face {face_id} is interior")
        return tag

    def domain_measure(self) -> float:
        return float(np.sum(self.cell_measures))

    def validate(self) -> None:
        for c in self.cells:
            if not c.measure > 0.0:
                raise MeshError(f"cell {c.id} has non-positive measure")
        ids = set()
        for f in self.faces:
            if not (f.measure > 0.0 and f.distance > 0.0 and f.transmissibility > 0.0):
                raise MeshError(f"face {f.id} has non-positive geometry data")
            if abs(f.transmissibility - f.measure / f.distance) > 1e-14 * f.transmissibility:
                raise MeshError(f"face {f.id}: tau != m/d")
            if len(f.cells) == 2:
                if f.cells[0] == f.cells[1]:
                    raise MeshError(f"face {f.id} connects a cell to itself")
                if f.tag is not None:
                    raise MeshError(f"interior face {f.id} carries a boundary tag")
                if self.dimension == 2:
                    xk = np.asarray(self.cells[f.cells[0]].center)
                    xl = np.asarray(self.cells[f.cells[1]].center)
                    d = xl - xk
                    # tensor-product faces are axis-aligned: the K-L segment
                    # must be parallel to exactly one axis
                    if min(abs(d[0]), abs(d[1])) > 1e-12 * max(abs(d[0]), abs(d[1])):
                        raise MeshError(f"face {f.id} violates orthogonality")
            elif len(f.cells) == 1:
                if f.tag is None:
                    raise MeshError(f"boundary face {f.id} is untagged")
                if not isinstance(f.tag, (Contact, Insulating)):
                    raise MeshError(f"boundary face {f.id} has unknown tag")
            else:
                raise MeshError(f"face {f.id} has {len(f.cells)} cells")
            ids.add(f.id)
        if ids != set(range(len(self.faces))):
            raise MeshError("face ids are not contiguous")

    def serialize(self) -> str:
        """Plain-text form with 17 significant digits, for golden-file tests."""
        out = [f"dimension {self.dimension}", f"cells {len(self.cells)}"]
        for c in self.cells:
            coords = " ".join(f"{x:.17g}" for x in c.center)
            out.append(f"{c.id} {c.measure:.17g} {coords}")
        out.append(f"faces {len(self.faces)}")
        for f in self.faces:
            coords = " ".join(f"{x:.17g}" for x in f.center)
            head = f"{f.id} {f.measure:.17g} {f.distance:.17g} {f.transmissibility:.17g}"
            if f.is_interior:
                out.append(f"{head} interior {f.cells[0]} {f.cells[1]} {coords}")
            elif isinstance(f.tag, Contact):
                out.append(f"{head} boundary {f.cells[0]} contact {f.tag.contact_id} {coords}")
            else:
                out.append(f"{head} boundary {f.cells[0]} insulating {coords}")
        return "\n".join(out) + "\n"


def _pack(dimension: int, cells: list, faces: list) -> AdmissibleMesh:
    nc = len(cells)
    dim = dimension
    centers = np.zeros((nc, dim))
    measures = np.zeros(nc)
    for c in cells:
        centers[c.id] = c.center
        measures[c.id] = c.measure
    ik, il, it, ifid = [], [], [], []
    bc, bt, bm, btag, bfid, bctr = [], [], [], [], [], []
    for f in faces:
        if f.is_interior:
            ik.append(f.cells[0])
            il.append(f.cells[1])
            it.append(f.transmissibility)
            ifid.append(f.id)
        else:
            bc.append(f.cells[0])
            bt.append(f.transmissibility)
            bm.append(f.measure)
            btag.append(f.tag.contact_id if isinstance(f.tag, Contact) else -1)
            bfid.append(f.id)
            bctr.append(f.center)
    mesh = AdmissibleMesh(
        dimension=dimension,
        cells=cells,
        faces=faces,
        cell_centers=centers,
        cell_measures=measures,
        int_cell_k=np.asarray(ik, dtype=np.int64),
        int_cell_l=np.asarray(il, dtype=np.int64),
        int_tau=np.asarray(it),
        int_face_id=np.asarray(ifid, dtype=np.int64),
        bnd_cell=np.asarray(bc, dtype=np.int64),
        bnd_tau=np.asarray(bt),
        bnd_measure=np.asarray(bm),
        bnd_contact=np.asarray(btag, dtype=np.int64),
        bnd_face_id=np.asarray(bfid, dtype=np.int64),
        bnd_centers=np.asarray(bctr).reshape(len(bc), dim),
    )
    mesh.validate()
    return mesh


def _graded_widths(n: int, grading: float) -> np.ndarray:
    """Cell widths on [0, 1], geometrically refined toward both ends."""
    if grading == 1.0:
        return np.full(n, 1.0 / n)
    half = n // 2
    ratios = grading ** np.arange(half, dtype=float)
    if n % 2 == 0:
        w0 = 0.5 / np.sum(ratios)
        w = np.concatenate([w0 * ratios, (w0 * ratios)[::-1]])
    else:
        # odd count: center cell continues the progression
        w0 = 1.0 / (2.0 * np.sum(ratios) + grading**half)
        mid = np.array([w0 * grading**half])
        w = np.concatenate([w0 * ratios, mid, (w0 * ratios)[::-1]])
    return w


def build_interval_mesh(h_C: float, n_cells: int, grading: float = 1.0) -> AdmissibleMesh:
    """1D mesh on [0, 1]; endpoints are Contact faces (0 left, 1 right)."""
    if n_cells < 2:
        raise InvalidResolutionError("need at least 2 cells")
    if grading < 1.0:
        raise InvalidResolutionError("grading factor must be >= 1")
    if h_C <= 0.0:
        raise MeshError("h_C must be positive")
    widths = _graded_widths(n_cells, grading)
    pos = np.concatenate([[0.0], np.cumsum(widths)])
    pos[-1] = 1.0
    xc = 0.5 * (pos[:-1] + pos[1:])
    cells = [Cell(i, (float(xc[i]),), float(pos[i + 1] - pos[i])) for i in range(n_cells)]
    faces = []
    fid = 0
    d0 = float(xc[0] - pos[0])
    faces.append(Face(fid, 1.0, d0, 1.0 / d0, (0,), Contact(0), (float(pos[0]),)))
    fid += 1
    for i in range(n_cells - 1):
        d = float(xc[i + 1] - xc[i])
        faces.append(Face(fid, 1.0, d, 1.0 / d, (i, i + 1), None, (float(pos[i + 1]),)))
        fid += 1
    dn = float(pos[-1] - xc[-1])
    faces.append(
        Face(fid, 1.0, dn, 1.0 / dn, (n_cells - 1,), Contact(1), (float(pos[-1]),))
    )
    return _pack(1, cells, faces)


def _segment_positions(x_breaks: list, counts: list) -> np.ndarray:
    pos = [x_breaks[0]]
    for (a, b), n in zip(zip(x_breaks[:-1], x_breaks[1:]), counts):
        seg = np.linspace(a, b, n + 1)[1:]
        pos.extend(seg.tolist())
    return np.asarray(pos)


def build_device_mesh(geom: GeometrySpec, scale) -> AdmissibleMesh:
    """Tensor-product rectangular mesh of the x-z cross-section.

    The channel occupies x in [0, h_C] with nx columns; h_C is the distance
    between the electrode inner edges in every configuration. Top and mixed
    configurations extend the flake by h_E beyond each end, meshed at the
    channel column width, so the electrode gap does not shrink as h_E
    grows. Side: the end walls are contacts 0/1. Top: the two top
    segments over the extensions. Mixed: union of both (top segments plus
    outer end walls). Mesh lines align with electrode endpoints so no face
    straddles a tag change.
    """
    geom.validate()
    l = scale.l
    xlen = geom.h_C / l
    zlen = geom.h_T / l
    cfg = geom.contact_config
    if cfg is ContactConfig.SIDE:
        xw = _graded_widths(geom.nx, geom.grading) * xlen
        xpos = np.concatenate([[0.0], np.cumsum(xw)])
        xpos[-1] = xlen
    else:
        xe = geom.h_E / l
        n_e = max(1, round(geom.nx * xe / xlen))
        xpos = _segment_positions(
            [-xe, 0.0, xlen, xlen + xe], [n_e, geom.nx, n_e]
        )
    zpos = np.linspace(0.0, zlen, geom.nz + 1)
    nx = len(xpos) - 1
    nz = geom.nz
    xc = 0.5 * (xpos[:-1] + xpos[1:])
    zc = 0.5 * (zpos[:-1] + zpos[1:])
    dx = np.diff(xpos)
    dz = np.diff(zpos)

    def cid(i, j):
        return j * nx + i

    cells = []
    for j in range(nz):
        for i in range(nx):
            cells.append(
                Cell(cid(i, j), (float(xc[i]), float(zc[j])), float(dx[i] * dz[j]))
            )

    side_contacts = cfg in (ContactConfig.SIDE, ContactConfig.MIXED)
    top_contacts = cfg in (ContactConfig.TOP, ContactConfig.MIXED)
    eps = 1e-12 * xlen

    faces = []
    fid = 0
    # vertical faces (normal along x)
    for j in range(nz):
        for i in range(nx + 1):
            m = float(dz[j])
            ctr = (float(xpos[i]), float(zc[j]))
            if i == 0:
                d = float(xc[0] - xpos[0])
                tag = Contact(0) if side_contacts else INSULATING
                faces.append(Face(fid, m, d, m / d, (cid(0, j),), tag, ctr))
            elif i == nx:
                d = float(xpos[nx] - xc[nx - 1])
                tag = Contact(1) if side_contacts else INSULATING
                faces.append(Face(fid, m, d, m / d, (cid(nx - 1, j),), tag, ctr))
            else:
                d = float(xc[i] - xc[i - 1])
                faces.append(
                    Face(fid, m, d, m / d, (cid(i - 1, j), cid(i, j)), None, ctr)
                )
            fid += 1
    # horizontal faces (normal along z)
    for j in range(nz + 1):
        for i in range(nx):
            m = float(dx[i])
            ctr = (float(xc[i]), float(zpos[j]))
            if j == 0:
                d = float(zc[0] - zpos[0])
                faces.append(Face(fid, m, d, m / d, (cid(i, 0),), INSULATING, ctr))
            elif j == nz:
                d = float(zpos[nz] - zc[nz - 1])
                tag = INSULATING
                if top_contacts:
                    if xc[i] < -eps:
                        tag = Contact(0)
                    elif xc[i] > xlen + eps:
                        tag = Contact(1)
                faces.append(Face(fid, m, d, m / d, (cid(i, nz - 1),), tag, ctr))
            else:
                d = float(zc[j] - zc[j - 1])
                faces.append(
                    Face(fid, m, d, m / d, (cid(i, j - 1), cid(i, j)), None, ctr)
                )
            fid += 1
    return _pack(2, cells, faces)
