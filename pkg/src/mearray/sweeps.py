"""Parameter sweeps over (k1, k2), peak finding, gain patterns, deployment checks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.interpolate import RectBivariateSpline

from . import kernels
from .errors import DegenerateGeometryError, ValidationError
from .fieldcore import (
    FAR_FIELD_FACTOR,
    VACUUM,
    ArrayConfig,
    MediumConstants,
    as_vec3,
    element_distances,
    mean_position,
)
from .geometry import IndexedArray, perpendicular_frame
from .phases import (
    InterferenceReport,
    PhaseFamily,
    classify_interference,
    custom_phase_table,
    optimal_phases,
)

UNITS = ("af", "si")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
REFINE_ROUNDS = 100


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """A rectangular (k1, k2) sweep.

    ``units="af"`` yields array factors; ``"si"`` yields intensities using
    ``f0``, ``k_el`` and ``medium``.
    """

    k1_range: tuple[float, float, int]
    k2_range: tuple[float, float, int]
    family: PhaseFamily
    array: IndexedArray
    receiver: Sequence[float]
    omega: float
    compensation: bool = True
    units: str = "af"
    f0: Sequence[float] = (0.0, 0.0, 1.0)
    k_el: float = 1.0
    medium: MediumConstants = VACUUM

    def __post_init__(self):
        for name in ("k1_range", "k2_range"):
            lo, hi, steps = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValidationError(f"{name} needs finite min < max")
            if int(steps) != steps or steps < 2:
                raise ValidationError(f"{name} needs an integer step count >= 2")
            object.__setattr__(self, name, (float(lo), float(hi), int(steps)))
        object.__setattr__(self, "receiver", tuple(as_vec3(self.receiver, "receiver")))
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValidationError("omega must be positive")
        if self.units not in UNITS:
            raise ValidationError(f"units must be one of {UNITS}")

    @property
    def k1_axis(self) -> np.ndarray:
        return np.linspace(*self.k1_range)

    @property
    def k2_axis(self) -> np.ndarray:
        return np.linspace(*self.k2_range)

    @property
    def n_elements(self) -> int:
        return self.array.n_elements

    def config_at(self, k1: float, k2: float) -> ArrayConfig:
        from .phases import family_config

        return family_config(
            self.array, self.family, k1, k2, self.receiver, self.omega, self.compensation,
            f0=self.f0, k_el=self.k_el, medium=self.medium,
        )

    def to_dict(self) -> dict:
        return {
            "k1_range": list(self.k1_range),
            "k2_range": list(self.k2_range),
            "family": self.family.name,
            "expression": self.family.expression,
            "array_shape": list(self.array.shape),
            "receiver": list(self.receiver),
            "omega": self.omega,
            "compensation": self.compensation,
            "units": self.units,
        }


@dataclass(frozen=True, eq=False)
class IntensityMap:
    """Grid values with ``values[i, j]`` at ``(k1_axis[i], k2_axis[j])``.

    ``af_scale`` converts array factor to the stored units (1 for "af").
    """

    k1_axis: np.ndarray
    k2_axis: np.ndarray
    values: np.ndarray
    units: str = "af"
    af_scale: float = 1.0
    spec: SweepSpec | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        k1 = np.asarray(self.k1_axis, dtype=float)
        k2 = np.asarray(self.k2_axis, dtype=float)
        if v.shape != (k1.size, k2.size):
            raise ValidationError(f"values shape {v.shape} does not match axes ({k1.size}, {k2.size})")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValidationError("map values must be finite and non-negative")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "k1_axis", k1)
        object.__setattr__(self, "k2_axis", k2)


@dataclass(frozen=True)
class Peak:
    k1: float
    k2: float
    value: float
    regime: InterferenceReport | None
    grid_index: tuple[int, int]


class _SweepEvaluator:
    """Array factor of a sweep at arbitrary (k1, k2) points."""

    def __init__(self, spec: SweepSpec):
        self.spec = spec
        pos = spec.array.flat_positions
        self.l, self.m = spec.array.indices
        dist = element_distances(
            ArrayConfig(pos, np.zeros(len(pos)), omega=spec.omega, medium=spec.medium), spec.receiver
        )
        k = spec.omega / spec.medium.c
        self.prop = k * dist
        self.comp = (
            optimal_phases(pos, spec.receiver, spec.omega, spec.medium.c)
            if spec.compensation
            else np.zeros(len(pos))
        )
        if spec.family.is_linear:
            a, b, c, shift = spec.family.coefficients(self.l, self.m)
            self.coef = (a, b, c, shift)
        else:
            self.coef = None

    def grid(self, k1, k2) -> np.ndarray:
        if self.coef is not None:
            a, b, c, shift = self.coef
            return kernels.sweep_linear(k1, k2, a, b, c, shift, self.comp, self.prop)
        table = custom_phase_table(self.spec.family, self.l, self.m, k1, k2)
        theta = (table + self.comp) + self.prop
        return kernels.phasor_power(theta)

    def __call__(self, k1: float, k2: float) -> float:
        return float(self.grid(np.array([k1]), np.array([k2]))[0, 0])


def _af_scale(spec: SweepSpec) -> float:
    if spec.units == "af":
        return 1.0
    from .fieldcore import intensity_prefactor

    cfg = ArrayConfig(
        spec.array.flat_positions, np.zeros(spec.n_elements), spec.f0, spec.omega, spec.k_el, spec.medium
    )
    return intensity_prefactor(cfg, spec.receiver)


def sweep_k1k2(spec: SweepSpec, workers: int = 1) -> IntensityMap:
    """Evaluate the sweep grid; rows may be split across ``workers`` threads.

    Each cell is computed independently, so the result does not depend on
    ``workers``.
    """
    ev = _SweepEvaluator(spec)
    k1, k2 = spec.k1_axis, spec.k2_axis
    if workers <= 1 or k1.size < 2 * workers:
        af = ev.grid(k1, k2)
    else:
        chunks = np.array_split(np.arange(k1.size), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: ev.grid(k1[idx], k2), chunks))
        af = np.vstack(parts)
    scale = _af_scale(spec)
    return IntensityMap(k1, k2, af * scale, spec.units, scale, spec, {"sweep": spec.to_dict()})


def _golden_max(f: Callable[[float], float], lo: float, hi: float, iters: int = 60) -> float:
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return x1 if f1 >= f2 else x2


def _objective(m: IntensityMap) -> Callable[[float, float], float]:
    if m.spec is not None:
        ev = _SweepEvaluator(m.spec)
        return lambda a, b: ev(a, b) * m.af_scale
    kx = min(3, m.k1_axis.size - 1)
    ky = min(3, m.k2_axis.size - 1)
    spline = RectBivariateSpline(m.k1_axis, m.k2_axis, m.values, kx=kx, ky=ky)
    return lambda a, b: float(spline(a, b)[0, 0])


def _regional_maxima(v: np.ndarray) -> list[tuple[int, int]]:
    """One seed cell per strict regional maximum (plateaus count once)."""
    footprint = np.ones((3, 3), dtype=bool)
    neigh_max = ndimage.maximum_filter(v, footprint=footprint, mode="constant", cval=-np.inf)
    candidate = v >= neigh_max
    labels, n = ndimage.label(candidate, structure=footprint)
    seeds = []
    for lab in range(1, n + 1):
        cells = np.argwhere(labels == lab)
        if len(cells) == v.size:
            continue  # constant map
        comp = labels == lab
        ring = ndimage.binary_dilation(comp, structure=footprint) & ~comp
        if np.any(v[ring] >= v[comp][0]):
            continue  # plateau leaks into an equal or higher region
        centre = cells.mean(axis=0)
        best = cells[np.argmin(((cells - centre) ** 2).sum(axis=1))]
        seeds.append((int(best[0]), int(best[1])))
    return seeds


def find_peaks(
    m: IntensityMap, min_prominence_fraction: float = 0.5, n_total: int | None = None
) -> list[Peak]:
    """Regional maxima above ``fraction * max``, refined within one grid cell.

    A flat-topped plateau yields a single peak at its most central cell.
    Refinement is coordinate-wise golden-section search inside the cell box
    and never lowers the seed value.
    """
    if not (0 < min_prominence_fraction <= 1):
        raise ValidationError("min_prominence_fraction must be in (0, 1]")
    v = m.values
    vmax = float(v.max())
    if vmax <= 0:
        return []
    if n_total is None and m.spec is not None:
        n_total = m.spec.n_elements
    f = _objective(m)
    k1, k2 = m.k1_axis, m.k2_axis
    h1 = (k1[-1] - k1[0]) / (k1.size - 1)
    h2 = (k2[-1] - k2[0]) / (k2.size - 1)

    peaks = []
    for i, j in _regional_maxima(v):
        seed = float(v[i, j])
        if seed < min_prominence_fraction * vmax:
            continue
        x, y = float(k1[i]), float(k2[j])
        box1 = (max(k1[0], x - h1), min(k1[-1], x + h1))
        box2 = (max(k2[0], y - h2), min(k2[-1], y + h2))
        bx, by = x, y
        for _ in range(REFINE_ROUNDS):
            px, py = bx, by
            bx = _golden_max(lambda s: f(s, by), *box1)
            by = _golden_max(lambda s: f(bx, s), *box2)
            if abs(bx - px) <= 1e-12 * h1 and abs(by - py) <= 1e-12 * h2:
                break
        value = f(bx, by)
        if not value >= seed:
            bx, by, value = x, y, seed
        regime = None
        if n_total is not None:
            af = min(value / m.af_scale, float(n_total) ** 2)
            regime = classify_interference(max(af, 0.0), n_total)
        peaks.append(Peak(bx, by, value, regime, (i, j)))
    peaks.sort(key=lambda p: (-p.value, p.k1, p.k2))
    return peaks


PLANES = {
    "XY": ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    "XZ": ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "YZ": ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
}


def plane_basis(plane) -> tuple[str, np.ndarray, np.ndarray]:
    """Name and in-plane basis for "XY"/"XZ"/"YZ" or a plane normal vector."""
    if isinstance(plane, str):
        key = plane.upper()
        if key not in PLANES:
            raise ValidationError(f"plane must be one of {sorted(PLANES)} or a normal vector")
        e1, e2 = PLANES[key]
        return key, np.array(e1), np.array(e2)
    n = as_vec3(plane, "plane normal")
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValidationError("plane normal must be non-zero")
    u, v = perpendicular_frame(n / norm)
    return "normal:" + ",".join(f"{c:.17g}" for c in n / norm), u, v


@dataclass(frozen=True, eq=False)
class GainPattern:
    """Intensity on a circle; ``angles[i]`` is measured from the first basis vector."""

    plane: str
    angles: np.ndarray
    intensity: np.ndarray
    gain_db: np.ndarray
    radius: float
    frequency_hz: float = float("nan")
    far_field: bool = True

    @property
    def samples(self):
        return list(zip(self.angles.tolist(), self.intensity.tolist(), self.gain_db.tolist()))


def to_gain_db(intensity: np.ndarray) -> np.ndarray:
    intensity = np.asarray(intensity, dtype=float)
    peak = intensity.max()
    if not peak > 0:
        raise DegenerateGeometryError("pattern has zero intensity everywhere")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(intensity / peak)


def gain_pattern(config: ArrayConfig, plane="YZ", radius: float = 1.0, n_samples: int = 360) -> GainPattern:
    """Sample intensity on a circle about the array centroid."""
    if n_samples < 8:
        raise ValidationError("n_samples must be >= 8")
    if not (np.isfinite(radius) and radius > 0):
        raise ValidationError("radius must be positive")
    name, e1, e2 = plane_basis(plane)
    center = mean_position(config)
    angles = 2 * np.pi * np.arange(n_samples) / n_samples
    dirs = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
    points = center + radius * dirs

    # direction-wise closed form, vectorised over sample points
    rel = points[:, None, :] - config.positions[None, :, :]
    dist = np.linalg.norm(rel, axis=2)
    if dist.min() < 1e-12:
        raise DegenerateGeometryError("pattern circle passes through an element")
    theta = config.phases[None, :] + config.wavenumber * dist
    af = kernels.phasor_power(np.ascontiguousarray(theta))
    proj = config.f0 - (dirs @ config.f0)[:, None] * dirs
    med = config.medium
    inten = med.c * med.eps0 * config.k_el**2 / (2 * radius**2) * (proj * proj).sum(axis=1) * af
    return GainPattern(
        name,
        angles,
        inten,
        to_gain_db(inten),
        float(radius),
        config.omega / (2 * np.pi),
        bool(radius >= FAR_FIELD_FACTOR * config.aperture),
    )


@dataclass(frozen=True)
class DeploymentCheck:
    passed: bool
    af_ratio: float
    array_factor: float
    n_nominal: int


def verify_deployment(
    nominal: ArrayConfig, actual_array, receiver, pass_fraction: float = 0.5
) -> DeploymentCheck:
    """Array factor of the actual geometry under the nominal phases, relative to N^2.

    If the actual array has fewer elements (failed antennas), the nominal
    phase list is truncated to match.
    """
    if not (0 < pass_fraction <= 1):
        raise ValidationError("pass_fraction must be in (0, 1]")
    if isinstance(actual_array, IndexedArray):
        pos = actual_array.flat_positions
    else:
        pos = np.asarray(actual_array, dtype=float).reshape(-1, 3)
    n = nominal.n_elements
    if pos.shape[0] > n:
        raise ValidationError("actual array has more elements than the nominal configuration")
    cfg = ArrayConfig(pos, nominal.phases[: pos.shape[0]], nominal.f0, nominal.omega, nominal.k_el, nominal.medium)
    d = element_distances(cfg, receiver)
    af = kernels.array_factor(cfg.phases, d, cfg.wavenumber)
    ratio = af / float(n * n)
    return DeploymentCheck(bool(ratio >= pass_fraction), float(ratio), float(af), n)
