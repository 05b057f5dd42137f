"""YAML run configuration.

Schema (all lengths in metres, frequency in hertz; defaults shown)::

    workflow: sweep            # sweep | optimize | pattern | verify
    frequency_hz: 2.5e9        # required, > 0
    receiver: [0, 0, 0.5]      # required for sweep, optimize and verify
    seed: 0                    # jitter seed (splitmix64, see mearray.rng)
    units: af                  # af | si
    array:                     # exactly one of planar / stent / positions
      planar: {rows: 2, cols: 2, spacing: 0.01,
               origin: [0, 0, 0], basis: [[1, 0, 0], [0, 1, 0]]}
      stent:  {radius: 0.002, ring_z: [0, 0.004, 0.008], n_circ: 6,
               angular_offset_per_ring: 0, axis_origin: [0, 0, 0],
               axis_direction: [0, 0, 1]}
      positions: [[x, y, z], ...]
    drive: {f0: [0, 0, 1], k_el: 1.0}
    medium: {c: 299792458.0, eps0: 8.8541878128e-12}
    family:
      name: A                  # A | B | C | OPTIMAL | CUSTOM (OPTIMAL unless workflow is sweep)
      expression: null         # CUSTOM only, e.g. "2*pi*(m*k1 + l*k2)"
      k1: 0.0
      k2: 0.0
      compensation: true
    sweep: {k1_range: [-2, 2, 201], k2_range: [-2, 2, 201],
            min_prominence_fraction: 0.5, workers: 1}
    pattern: {planes: [XY, XZ, YZ], radius: null, n_samples: 360}
    verify: {radial_scale: 1.0, axial_tilt: 0.0, jitter_sigma: 0.0,
             pass_fraction: 0.5, n_seeds: 1}
    output: {dir: out, scale: linear}   # scale: linear | log10

``pattern.radius: null`` means the receiver distance from the array
centroid, or 1 m without a receiver.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .errors import ConfigParseError, ConfigValidationError, ValidationError
from .fieldcore import MediumConstants
from .geometry import IndexedArray, StentLayoutSpec, explicit_positions, planar_grid, stent_layout
from .phases import FamilyId, PhaseFamily

WORKFLOWS = ("sweep", "optimize", "pattern", "verify")
NEEDS_RECEIVER = ("sweep", "optimize", "verify")


def _num(value, path, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or value is None:
        raise ConfigValidationError(path, f"expected a number, got {value!r}")
    try:
        x = float(value)  # YAML 1.1 reads "2.5e9" as a string
    except (TypeError, ValueError):
        raise ConfigValidationError(path, f"expected a number, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigValidationError(path, "must be finite")
    if positive and x <= 0:
        raise ConfigValidationError(path, "must be > 0")
    if nonneg and x < 0:
        raise ConfigValidationError(path, "must be >= 0")
    if integer:
        if x != int(x):
            raise ConfigValidationError(path, "must be an integer")
        return int(x)
    return x


def _vec(value, path):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigValidationError(path, "expected a list of 3 numbers")
    return [_num(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _section(doc, key, path=None):
    val = doc.get(key, {})
    if val is None:
        val = {}
    if not isinstance(val, dict):
        raise ConfigValidationError(path or key, "expected a mapping")
    return val


def _reject_unknown(section: dict, allowed, path):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigValidationError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


@dataclass
class ArraySource:
    kind: str
    params: dict

    def build(self) -> IndexedArray:
        try:
            if self.kind == "planar":
                p = self.params
                return planar_grid(p["rows"], p["cols"], p["spacing"], p["origin"], p["basis"])
            if self.kind == "stent":
                return stent_layout(StentLayoutSpec(**self.params))
            return explicit_positions(self.params["positions"])
        except ValidationError as exc:
            raise ConfigValidationError(f"array.{self.kind}", str(exc)) from None


@dataclass
class FamilySettings:
    name: str
    expression: str | None = None
    k1: float = 0.0
    k2: float = 0.0
    compensation: bool = True

    def family(self) -> PhaseFamily:
        if self.name == "CUSTOM":
            return PhaseFamily.custom(self.expression)
        return PhaseFamily(FamilyId(self.name))


@dataclass
class SweepSettings:
    k1_range: list = field(default_factory=lambda: [-2.0, 2.0, 201])
    k2_range: list = field(default_factory=lambda: [-2.0, 2.0, 201])
    min_prominence_fraction: float = 0.5
    workers: int = 1


@dataclass
class PatternSettings:
    planes: list = field(default_factory=lambda: ["XY", "XZ", "YZ"])
    radius: float | None = None
    n_samples: int = 360


@dataclass
class VerifySettings:
    radial_scale: float = 1.0
    axial_tilt: float = 0.0
    jitter_sigma: float = 0.0
    pass_fraction: float = 0.5
    n_seeds: int = 1


@dataclass
class RunConfig:
    workflow: str
    array: ArraySource
    frequency_hz: float
    receiver: list | None = None
    f0: list = field(default_factory=lambda: [0.0, 0.0, 1.0])
    k_el: float = 1.0
    medium: MediumConstants = field(default_factory=MediumConstants)
    family: FamilySettings = field(default_factory=lambda: FamilySettings("OPTIMAL"))
    sweep: SweepSettings = field(default_factory=SweepSettings)
    pattern: PatternSettings = field(default_factory=PatternSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)
    seed: int = 0
    units: str = "af"
    output_dir: str = "out"
    scale: str = "linear"

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency_hz

    def to_dict(self) -> dict:
        """Effective configuration with every default filled in."""
        d = asdict(self)
        d["array"] = {self.array.kind: self.array.params}
        d["drive"] = {"f0": d.pop("f0"), "k_el": d.pop("k_el")}
        d["output"] = {"dir": d.pop("output_dir"), "scale": d.pop("scale")}
        d["omega"] = self.omega
        return _plain(d)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _parse_array(doc) -> ArraySource:
    if "array" not in doc:
        raise ConfigValidationError("array", "missing")
    sec = _section(doc, "array")
    kinds = [k for k in ("planar", "stent", "positions") if k in sec]
    _reject_unknown(sec, ("planar", "stent", "positions"), "array")
    if len(kinds) != 1:
        raise ConfigValidationError("array", "give exactly one of planar, stent, positions")
    kind = kinds[0]
    if kind == "positions":
        pts = sec["positions"]
        if not isinstance(pts, list) or not pts:
            raise ConfigValidationError("array.positions", "expected a non-empty list of [x, y, z]")
        return ArraySource(kind, {"positions": [_vec(p, f"array.positions[{i}]") for i, p in enumerate(pts)]})
    p = _section(sec, kind, f"array.{kind}")
    base = f"array.{kind}"
    if kind == "planar":
        _reject_unknown(p, ("rows", "cols", "spacing", "origin", "basis"), base)
        for req in ("rows", "cols", "spacing"):
            if req not in p:
                raise ConfigValidationError(f"{base}.{req}", "missing")
        basis = p.get("basis", [[1, 0, 0], [0, 1, 0]])
        if not isinstance(basis, list) or len(basis) != 2:
            raise ConfigValidationError(f"{base}.basis", "expected two vectors")
        return ArraySource(kind, {
            "rows": _num(p["rows"], f"{base}.rows", positive=True, integer=True),
            "cols": _num(p["cols"], f"{base}.cols", positive=True, integer=True),
            "spacing": _num(p["spacing"], f"{base}.spacing", positive=True),
            "origin": _vec(p.get("origin", [0, 0, 0]), f"{base}.origin"),
            "basis": [_vec(b, f"{base}.basis[{i}]") for i, b in enumerate(basis)],
        })
    _reject_unknown(p, ("radius", "ring_z", "n_circ", "angular_offset_per_ring", "axis_origin", "axis_direction"), base)
    for req in ("radius", "ring_z", "n_circ"):
        if req not in p:
            raise ConfigValidationError(f"{base}.{req}", "missing")
    rz = p["ring_z"]
    if not isinstance(rz, list) or not rz:
        raise ConfigValidationError(f"{base}.ring_z", "expected a non-empty list")
    return ArraySource(kind, {
        "radius": _num(p["radius"], f"{base}.radius", positive=True),
        "ring_z": [_num(z, f"{base}.ring_z[{i}]") for i, z in enumerate(rz)],
        "n_circ": _num(p["n_circ"], f"{base}.n_circ", positive=True, integer=True),
        "angular_offset_per_ring": _num(p.get("angular_offset_per_ring", 0.0), f"{base}.angular_offset_per_ring"),
        "axis_origin": _vec(p.get("axis_origin", [0, 0, 0]), f"{base}.axis_origin"),
        "axis_direction": _vec(p.get("axis_direction", [0, 0, 1]), f"{base}.axis_direction"),
    })


def _range(value, path):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigValidationError(path, "expected [min, max, steps]")
    lo, hi = _num(value[0], f"{path}[0]"), _num(value[1], f"{path}[1]")
    steps = _num(value[2], f"{path}[2]", integer=True)
    if not lo < hi:
        raise ConfigValidationError(path, "min must be < max")
    if steps < 2:
        raise ConfigValidationError(path, "steps must be >= 2")
    return [lo, hi, steps]


def parse_config(text: str, workflow: str | None = None) -> RunConfig:
    """Parse and validate a YAML document; ``workflow`` overrides the document's."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigParseError(f"malformed config{where}: {problem}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigParseError("config must be a mapping at the top level")
    _reject_unknown(doc, (
        "workflow", "frequency_hz", "receiver", "seed", "units", "array", "drive", "medium",
        "family", "sweep", "pattern", "verify", "output",
    ), "")

    wf = workflow or doc.get("workflow")
    if wf is None:
        raise ConfigValidationError("workflow", "missing")
    if wf not in WORKFLOWS:
        raise ConfigValidationError("workflow", f"must be one of {WORKFLOWS}")

    if "frequency_hz" not in doc:
        raise ConfigValidationError("frequency_hz", "missing")
    freq = _num(doc["frequency_hz"], "frequency_hz", positive=True)

    receiver = doc.get("receiver")
    if receiver is None:
        if wf in NEEDS_RECEIVER:
            raise ConfigValidationError("receiver", f"required for workflow {wf!r}")
    else:
        receiver = _vec(receiver, "receiver")

    array = _parse_array(doc)

    drive = _section(doc, "drive")
    _reject_unknown(drive, ("f0", "k_el"), "drive")
    f0 = _vec(drive.get("f0", [0, 0, 1]), "drive.f0")
    if not any(f0):
        raise ConfigValidationError("drive.f0", "must be non-zero")
    k_el = _num(drive.get("k_el", 1.0), "drive.k_el")

    med = _section(doc, "medium")
    _reject_unknown(med, ("c", "eps0"), "medium")
    medium = MediumConstants(
        _num(med.get("c", MediumConstants.c), "medium.c", positive=True),
        _num(med.get("eps0", MediumConstants.eps0), "medium.eps0", positive=True),
    )

    fam = _section(doc, "family")
    _reject_unknown(fam, ("name", "expression", "k1", "k2", "compensation"), "family")
    name = str(fam.get("name", "A" if wf == "sweep" else "OPTIMAL")).upper()
    if name not in FamilyId.__members__:
        raise ConfigValidationError("family.name", f"unknown family {name!r}")
    expression = fam.get("expression")
    if name == "CUSTOM":
        if not isinstance(expression, str):
            raise ConfigValidationError("family.expression", "required for CUSTOM")
        try:
            PhaseFamily.custom(expression)
        except ValidationError as exc:
            raise ConfigValidationError("family.expression", str(exc)) from None
    compensation = fam.get("compensation", True)
    if not isinstance(compensation, bool):
        raise ConfigValidationError("family.compensation", "expected true or false")
    family = FamilySettings(
        name, expression, _num(fam.get("k1", 0.0), "family.k1"), _num(fam.get("k2", 0.0), "family.k2"), compensation
    )

    sw = _section(doc, "sweep")
    _reject_unknown(sw, ("k1_range", "k2_range", "min_prominence_fraction", "workers"), "sweep")
    frac = _num(sw.get("min_prominence_fraction", 0.5), "sweep.min_prominence_fraction", positive=True)
    if frac > 1:
        raise ConfigValidationError("sweep.min_prominence_fraction", "must be <= 1")
    sweep = SweepSettings(
        _range(sw.get("k1_range", [-2.0, 2.0, 201]), "sweep.k1_range"),
        _range(sw.get("k2_range", [-2.0, 2.0, 201]), "sweep.k2_range"),
        frac,
        _num(sw.get("workers", 1), "sweep.workers", positive=True, integer=True),
    )

    pt = _section(doc, "pattern")
    _reject_unknown(pt, ("planes", "radius", "n_samples"), "pattern")
    planes = pt.get("planes", ["XY", "XZ", "YZ"])
    if not isinstance(planes, list) or not planes:
        raise ConfigValidationError("pattern.planes", "expected a non-empty list")
    norm_planes = []
    for i, pl in enumerate(planes):
        if isinstance(pl, str) and pl.upper() in ("XY", "XZ", "YZ"):
            norm_planes.append(pl.upper())
        elif isinstance(pl, list):
            norm_planes.append(_vec(pl, f"pattern.planes[{i}]"))
        else:
            raise ConfigValidationError(f"pattern.planes[{i}]", "expected XY, XZ, YZ or a normal vector")
    radius = pt.get("radius")
    if radius is not None:
        radius = _num(radius, "pattern.radius", positive=True)
    n_samples = _num(pt.get("n_samples", 360), "pattern.n_samples", integer=True)
    if n_samples < 8:
        raise ConfigValidationError("pattern.n_samples", "must be >= 8")
    pattern = PatternSettings(norm_planes, radius, n_samples)

    vf = _section(doc, "verify")
    _reject_unknown(vf, ("radial_scale", "axial_tilt", "jitter_sigma", "pass_fraction", "n_seeds"), "verify")
    pf = _num(vf.get("pass_fraction", 0.5), "verify.pass_fraction", positive=True)
    if pf > 1:
        raise ConfigValidationError("verify.pass_fraction", "must be <= 1")
    verify = VerifySettings(
        _num(vf.get("radial_scale", 1.0), "verify.radial_scale", positive=True),
        _num(vf.get("axial_tilt", 0.0), "verify.axial_tilt"),
        _num(vf.get("jitter_sigma", 0.0), "verify.jitter_sigma", nonneg=True),
        pf,
        _num(vf.get("n_seeds", 1), "verify.n_seeds", positive=True, integer=True),
    )

    units = doc.get("units", "af")
    if units not in ("af", "si"):
        raise ConfigValidationError("units", "must be 'af' or 'si'")
    out = _section(doc, "output")
    _reject_unknown(out, ("dir", "scale"), "output")
    scale = out.get("scale", "linear")
    if scale not in ("linear", "log10"):
        raise ConfigValidationError("output.scale", "must be 'linear' or 'log10'")

    cfg = RunConfig(
        workflow=wf,
        array=array,
        frequency_hz=freq,
        receiver=receiver,
        f0=f0,
        k_el=k_el,
        medium=medium,
        family=family,
        sweep=sweep,
        pattern=pattern,
        verify=verify,
        seed=_num(doc.get("seed", 0), "seed", integer=True),
        units=units,
        output_dir=str(out.get("dir", "out")),
        scale=scale,
    )
    cfg.array.build()  # surface geometry errors at parse time
    return cfg
