"""File emitters and readers: map CSV, PPM heatmap, gain-pattern CSV.

Floats are written with 17 significant digits so reading a file back
reproduces every value bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .sweeps import GainPattern, IntensityMap

MAP_HEADER = "k1,k2,value"
PATTERN_HEADER = "angle_rad,intensity,gain_db"
LOG_FLOOR = 1e-6  # log10 heatmaps clamp at max * LOG_FLOOR


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def hot_colormap() -> np.ndarray:
    """256 x 3 uint8 table: black -> red -> yellow -> white.

    Entry ``i`` is ``(min(255, 3i), clip(3i - 255), clip(3i - 510))`` with
    ``clip`` limiting to [0, 255]. The full table is listed in docs/colormap.md.
    """
    i = np.arange(256) * 3
    table = np.stack([i, i - 255, i - 510], axis=1)
    return np.clip(table, 0, 255).astype(np.uint8)


def emit_csv(m: IntensityMap, path) -> Path:
    """One ``k1,k2,value`` row per cell, k1 outer and k2 inner."""
    path = Path(path)
    lines = [MAP_HEADER]
    for i, a in enumerate(m.k1_axis):
        sa = fmt(a)
        lines.extend(f"{sa},{fmt(b)},{fmt(m.values[i, j])}" for j, b in enumerate(m.k2_axis))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path, units: str = "af") -> IntensityMap:
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    if not rows or rows[0].strip() != MAP_HEADER:
        raise ValidationError(f"{path}: expected header {MAP_HEADER!r}")
    data = np.array([[float(t) for t in r.split(",")] for r in rows[1:] if r.strip()])
    k1 = np.unique(data[:, 0])
    k2 = np.unique(data[:, 1])
    if data.shape[0] != k1.size * k2.size:
        raise ValidationError(f"{path}: rows do not form a full grid")
    # row-major order means the first k2.size rows enumerate the k2 axis in file order
    k1_axis = data[:: k2.size, 0]
    k2_axis = data[: k2.size, 1]
    return IntensityMap(k1_axis, k2_axis, data[:, 2].reshape(k1.size, k2.size), units)


def heatmap_indices(m: IntensityMap, scale: str = "linear") -> np.ndarray:
    """Colormap index per cell; only cells equal to the maximum get 255."""
    v = m.values
    positive = v.max() > 0
    if scale == "log10":
        vmax = v.max()
        if vmax > 0:
            v = np.log10(np.maximum(v, vmax * LOG_FLOOR))
    elif scale != "linear":
        raise ValidationError("scale must be 'linear' or 'log10'")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape, 255 if positive else 0, dtype=np.uint8)
    t = (v - lo) / (hi - lo)
    idx = np.floor(255 * t).astype(int)
    idx[v == hi] = 255
    return np.clip(idx, 0, 255).astype(np.uint8)


def emit_heatmap(m: IntensityMap, path, scale: str = "linear", metadata: dict | None = None) -> Path:
    """Binary PPM (P6), one pixel per cell.

    Columns follow ``k1`` ascending and rows follow ``k2`` descending, so the
    image reads like a plot with k1 on the horizontal axis. ``metadata`` is
    written as a single JSON comment line after the magic number.
    """
    path = Path(path)
    idx = heatmap_indices(m, scale)
    rgb = hot_colormap()[idx.T[::-1]]  # (k2 rows top-down, k1 columns, 3)
    header = "P6\n"
    if metadata is not None:
        header += "# " + json.dumps(metadata, sort_keys=True) + "\n"
    header += f"{m.k1_axis.size} {m.k2_axis.size} 255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
    return path


def read_ppm(path) -> tuple[np.ndarray, list[str]]:
    """Return ``(pixels[h, w, 3], comments)`` from a binary PPM."""
    raw = Path(path).read_bytes()
    tokens, comments, pos = [], [], 0
    while len(tokens) < 4:
        while raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            end = raw.index(b"\n", pos)
            comments.append(raw[pos + 1 : end].decode("ascii").strip())
            pos = end + 1
            continue
        start = pos
        while not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos].decode("ascii"))
    pos += 1  # single whitespace byte before the payload
    if tokens[0] != "P6" or tokens[3] != "255":
        raise ValidationError(f"{path}: not an 8-bit P6 image")
    w, h = int(tokens[1]), int(tokens[2])
    payload = raw[pos:]
    if len(payload) != w * h * 3:
        raise ValidationError(f"{path}: payload is {len(payload)} bytes, expected {w * h * 3}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3), comments


def emit_pattern(p: GainPattern, path, metadata: dict | None = None) -> Path:
    path = Path(path)
    lines = [
        f"# plane: {p.plane}",
        f"# radius_m: {fmt(p.radius)}",
        f"# frequency_hz: {fmt(p.frequency_hz)}",
        f"# far_field: {str(p.far_field).lower()}",
    ]
    if metadata is not None:
        lines.append("# config: " + json.dumps(metadata, sort_keys=True))
    lines.append(PATTERN_HEADER)
    lines.extend(
        f"{fmt(a)},{fmt(i)},{fmt(g)}" for a, i, g in zip(p.angles, p.intensity, p.gain_db)
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_pattern(path) -> GainPattern:
    meta, rows = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line.strip() and line.strip() != PATTERN_HEADER:
            rows.append([float(t) for t in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, 3)
    return GainPattern(
        plane=meta.get("plane", ""),
        angles=data[:, 0],
        intensity=data[:, 1],
        gain_db=data[:, 2],
        radius=float(meta.get("radius_m", "nan")),
        frequency_hz=float(meta.get("frequency_hz", "nan")),
        far_field=meta.get("far_field", "true") == "true",
    )
