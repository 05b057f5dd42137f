"""Antenna layouts: planar grids, stent-mounted rings, deployment perturbations.

Elements are indexed ``(l, m)``: ``l`` runs over longitudinal rings (grid
rows) and ``m`` over circumferential positions (grid columns). Flattening is
row-major, so element ``l * M + m`` of a flat list is ``(l, m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

from .errors import ValidationError
from .fieldcore import as_vec3
from .rng import SplitMix64

ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class CylinderAxis:
    origin: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True, eq=False)
class IndexedArray:
    """Positions on an ``(L, M)`` index grid, shape ``(L, M, 3)``.

    ``axis`` is set for stent layouts so radial and tilt perturbations can
    recover the cylinder.
    """

    positions: np.ndarray
    axis: CylinderAxis | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 3 or pos.shape[2] != 3 or pos.shape[0] < 1 or pos.shape[1] < 1:
            raise ValidationError("positions must have shape (L, M, 3) with L, M >= 1")
        if not np.all(np.isfinite(pos)):
            raise ValidationError("positions must be finite")
        flat = pos.reshape(-1, 3)
        if flat.shape[0] > 1 and pdist(flat).min() == 0.0:
            raise ValidationError("element positions must be distinct")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def shape(self) -> tuple[int, int]:
        return self.positions.shape[0], self.positions.shape[1]

    @property
    def n_elements(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def flat_positions(self) -> np.ndarray:
        return self.positions.reshape(-1, 3)

    @property
    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat (l, m) index arrays in row-major order."""
        L, M = self.shape
        ll, mm = np.meshgrid(np.arange(L), np.arange(M), indexing="ij")
        return ll.reshape(-1), mm.reshape(-1)

    @property
    def centroid(self) -> np.ndarray:
        return self.flat_positions.mean(axis=0)


@dataclass(frozen=True)
class StentLayoutSpec:
    radius: float
    ring_z: Sequence[float]
    n_circ: int
    angular_offset_per_ring: float = 0.0
    axis_origin: Sequence[float] = (0.0, 0.0, 0.0)
    axis_direction: Sequence[float] = (0.0, 0.0, 1.0)

    def validate(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValidationError("radius must be positive")
        z = np.asarray(self.ring_z, dtype=float)
        if z.ndim != 1 or z.size == 0 or not np.all(np.isfinite(z)):
            raise ValidationError("ring_z must be a non-empty list of finite values")
        if np.any(np.diff(z) <= 0):
            raise ValidationError("ring_z must be strictly increasing")
        if int(self.n_circ) != self.n_circ or self.n_circ < 1:
            raise ValidationError("n_circ must be an integer >= 1")
        as_vec3(self.axis_origin, "axis_origin")
        a = as_vec3(self.axis_direction, "axis_direction")
        if abs(np.linalg.norm(a) - 1.0) > ORTHO_TOL:
            raise ValidationError("axis_direction must be a unit vector")


@dataclass(frozen=True)
class PerturbationSpec:
    radial_scale: float = 1.0
    axial_tilt: float = 0.0
    jitter_sigma: float = 0.0
    seed: int = 0

    def validate(self):
        if not (np.isfinite(self.radial_scale) and self.radial_scale > 0):
            raise ValidationError("radial_scale must be positive")
        if not np.isfinite(self.axial_tilt):
            raise ValidationError("axial_tilt must be finite")
        if not (np.isfinite(self.jitter_sigma) and self.jitter_sigma >= 0):
            raise ValidationError("jitter_sigma must be >= 0")


def perpendicular_frame(axis) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal (u, v) spanning the plane normal to ``axis``."""
    a = as_vec3(axis, "axis")
    a = a / np.linalg.norm(a)
    h = np.array([1.0, 0.0, 0.0])
    if abs(a @ h) > 0.9:
        h = np.array([0.0, 1.0, 0.0])
    u = h - (h @ a) * a
    u /= np.linalg.norm(u)
    return u, np.cross(a, u)


def stent_layout(spec: StentLayoutSpec) -> IndexedArray:
    spec.validate()
    origin = np.asarray(spec.axis_origin, dtype=float)
    a = np.asarray(spec.axis_direction, dtype=float)
    u, v = perpendicular_frame(a)
    z = np.asarray(spec.ring_z, dtype=float)
    ll, mm = np.meshgrid(np.arange(z.size), np.arange(int(spec.n_circ)), indexing="ij")
    theta = 2 * np.pi * mm / spec.n_circ + ll * spec.angular_offset_per_ring
    pos = (
        origin
        + z[ll][..., None] * a
        + spec.radius * (np.cos(theta)[..., None] * u + np.sin(theta)[..., None] * v)
    )
    return IndexedArray(pos, CylinderAxis(origin.copy(), a.copy()))


def planar_grid(rows: int, cols: int, spacing: float, origin=(0.0, 0.0, 0.0), in_plane_basis=None) -> IndexedArray:
    if rows < 1 or cols < 1:
        raise ValidationError("rows and cols must be >= 1")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValidationError("spacing must be positive")
    if in_plane_basis is None:
        in_plane_basis = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    b1 = as_vec3(in_plane_basis[0], "basis[0]")
    b2 = as_vec3(in_plane_basis[1], "basis[1]")
    gram = np.array([[b1 @ b1, b1 @ b2], [b2 @ b1, b2 @ b2]])
    if np.abs(gram - np.eye(2)).max() > ORTHO_TOL:
        raise ValidationError("in_plane_basis must be orthonormal")
    o = as_vec3(origin, "origin")
    ll, mm = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    pos = o + spacing * (ll[..., None] * b1 + mm[..., None] * b2)
    return IndexedArray(pos)


def explicit_positions(positions) -> IndexedArray:
    """Wrap a flat list of points as a single-row ``(1, N)`` array."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValidationError("positions must be a list of [x, y, z]")
    return IndexedArray(pos[None, :, :])


def _radial_parts(pos, axis: CylinderAxis):
    rel = pos - axis.origin
    along = (rel @ axis.direction)[..., None] * axis.direction
    return axis.origin + along, rel - along


def perturb_layout(array: IndexedArray, pert: PerturbationSpec) -> IndexedArray:
    """Apply radial scaling, then axial tilt, then Gaussian jitter.

    Each stage is skipped when it is the identity, so the identity spec
    returns positions unchanged bit for bit.
    """
    pert.validate()
    pos = array.positions
    axis = array.axis
    needs_axis = pert.radial_scale != 1.0 or pert.axial_tilt != 0.0
    if needs_axis and axis is None:
        raise ValidationError("radial_scale and axial_tilt need a stent layout with a known axis")

    if pert.radial_scale != 1.0:
        foot, radial = _radial_parts(pos, axis)
        pos = foot + pert.radial_scale * radial

    if pert.axial_tilt != 0.0:
        center = pos.reshape(-1, 3).mean(axis=0)
        u, _ = perpendicular_frame(axis.direction)
        rot = Rotation.from_rotvec(pert.axial_tilt * u)
        pos = center + rot.apply((pos - center).reshape(-1, 3)).reshape(pos.shape)
        new_origin = center + rot.apply(axis.origin - center)
        axis = CylinderAxis(new_origin, rot.apply(axis.direction))

    if pert.jitter_sigma > 0.0:
        noise = SplitMix64(pert.seed).normals(pos.shape)
        pos = pos + pert.jitter_sigma * noise

    if pos is array.positions:
        return array
    return replace(array, positions=pos, axis=axis)


def aperture(array) -> float:
    """Largest pairwise element distance; 0 for a single element."""
    pos = array.flat_positions if isinstance(array, IndexedArray) else np.asarray(array, dtype=float)
    if pos.shape[0] < 2:
        return 0.0
    return float(pdist(pos).max())
