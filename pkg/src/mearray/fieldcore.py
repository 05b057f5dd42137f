"""Far-field electric field and time-averaged intensity of an antenna array.

Each antenna is an oscillating point charge driven along a common direction
``f0`` with its own phase offset. Amplitude terms use the array centroid;
propagation phases use the exact element distances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from . import kernels
from .errors import DegenerateGeometryError, FarFieldWarning, ValidationError

COINCIDENCE_TOL = 1e-12  # metres
UNIT_TOL = 1e-12
FAR_FIELD_FACTOR = 10.0


def as_vec3(v, name="vector") -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValidationError(f"{name} must have 3 components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} must be finite")
    return a


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MediumConstants:
    """Propagation constants; defaults are exact vacuum values."""

    c: float = 299_792_458.0
    eps0: float = 8.8541878128e-12

    @property
    def mu0(self) -> float:
        return 1.0 / (self.c * self.c * self.eps0)


VACUUM = MediumConstants()


@dataclass(frozen=True)
class AntennaElement:
    position: tuple[float, float, float]
    phase: float = 0.0

    def __post_init__(self):
        pos = tuple(float(v) for v in as_vec3(self.position, "position"))
        object.__setattr__(self, "position", pos)
        if not np.isfinite(self.phase):
            raise ValidationError("phase must be finite")


@dataclass(frozen=True, eq=False)
class ArrayConfig:
    """An antenna array with a common drive.

    ``positions`` is ``(N, 3)`` in metres and ``phases`` is ``(N,)`` in radians,
    stored unreduced. ``k_el`` absorbs the charge, mass and field constants.
    """

    positions: np.ndarray
    phases: np.ndarray
    f0: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    omega: float = 2 * np.pi * 2.5e9
    k_el: float = 1.0
    medium: MediumConstants = VACUUM

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] == 0:
            raise ValidationError("positions must be a non-empty (N, 3) array")
        ph = np.array(self.phases, dtype=float).reshape(-1)
        if ph.shape[0] != pos.shape[0]:
            raise ValidationError(f"{ph.shape[0]} phases for {pos.shape[0]} elements")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(ph))):
            raise ValidationError("positions and phases must be finite")
        f0 = as_vec3(self.f0, "f0")
        if np.linalg.norm(f0) == 0.0:
            raise ValidationError("f0 must be non-zero")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValidationError("omega must be positive")
        if not np.isfinite(self.k_el):
            raise ValidationError("k_el must be finite")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "phases", _frozen(ph))
        object.__setattr__(self, "f0", _frozen(f0))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "k_el", float(self.k_el))

    @classmethod
    def from_elements(cls, elements: Iterable[AntennaElement], **kwargs) -> ArrayConfig:
        elements = list(elements)
        if not elements:
            raise ValidationError("elements must be non-empty")
        return cls(
            positions=[e.position for e in elements],
            phases=[e.phase for e in elements],
            **kwargs,
        )

    @property
    def elements(self) -> list[AntennaElement]:
        return [AntennaElement(tuple(p), float(ph)) for p, ph in zip(self.positions, self.phases)]

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]

    @property
    def wavenumber(self) -> float:
        return self.omega / self.medium.c

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.wavenumber

    @cached_property
    def aperture(self) -> float:
        if self.n_elements < 2:
            return 0.0
        return float(pdist(self.positions).max())

    def with_phases(self, phases: Sequence[float]) -> ArrayConfig:
        return ArrayConfig(self.positions, phases, self.f0, self.omega, self.k_el, self.medium)


def mean_position(config: ArrayConfig) -> np.ndarray:
    return config.positions.mean(axis=0)


def transverse_project(f0, n_s) -> np.ndarray:
    """Component of ``f0`` orthogonal to the unit vector ``n_s``."""
    f0 = as_vec3(f0, "f0")
    n_s = as_vec3(n_s, "n_s")
    if abs(np.linalg.norm(n_s) - 1.0) > UNIT_TOL:
        raise ValidationError("n_s must be a unit vector")
    return f0 - np.dot(n_s, f0) * n_s


def element_distances(config: ArrayConfig, x) -> np.ndarray:
    """Distances |x - y_j|; raises if x sits on an element."""
    x = as_vec3(x, "x")
    d = np.linalg.norm(x - config.positions, axis=1)
    if d.min() < COINCIDENCE_TOL:
        raise DegenerateGeometryError(
            f"observation point coincides with element {int(d.argmin())}"
        )
    return d


def array_factor(config: ArrayConfig, x) -> float:
    d = element_distances(config, x)
    return kernels.array_factor(config.phases, d, config.wavenumber)


def is_far_field(config: ArrayConfig, x) -> bool:
    """True when |x - y_s| is at least ten apertures."""
    r = np.linalg.norm(as_vec3(x, "x") - mean_position(config))
    return bool(r >= FAR_FIELD_FACTOR * config.aperture)


def _centroid_geometry(config: ArrayConfig, x):
    x = as_vec3(x, "x")
    rel = x - mean_position(config)
    r = float(np.linalg.norm(rel))
    if r < COINCIDENCE_TOL:
        raise DegenerateGeometryError("observation point coincides with the array centroid")
    if r < FAR_FIELD_FACTOR * config.aperture:
        warnings.warn(
            f"|x - y_s| = {r:.3g} m is below {FAR_FIELD_FACTOR:g} apertures "
            f"({config.aperture:.3g} m); far-field approximation is marginal",
            FarFieldWarning,
            stacklevel=3,
        )
    return x, rel / r, r


def far_field_e(config: ArrayConfig, x, t=0.0) -> np.ndarray:
    """Complex field vector at ``x``; ``t`` may be an array, giving shape (..., 3)."""
    x, n_s, r = _centroid_geometry(config, x)
    d = element_distances(config, x)
    phasor = np.exp(1j * (config.phases + config.wavenumber * d)).sum()
    spatial = config.k_el / r * transverse_project(config.f0, n_s) * phasor
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * config.omega * t)[..., None] * spatial


def intensity(config: ArrayConfig, x) -> float:
    """Time-averaged Poynting magnitude c eps0 |E|^2 / 2 in closed form."""
    return intensity_prefactor(config, x) * array_factor(config, x)


def intensity_prefactor(config: ArrayConfig, x) -> float:
    """Intensity per unit array factor at ``x`` (phase independent)."""
    x, n_s, r = _centroid_geometry(config, x)
    proj = transverse_project(config.f0, n_s)
    m = config.medium
    return m.c * m.eps0 * config.k_el**2 / (2.0 * r * r) * float(np.dot(proj, proj))
