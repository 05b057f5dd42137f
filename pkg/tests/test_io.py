import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mearray import fieldcore as fc
from mearray.io import (
    emit_csv,
    emit_heatmap,
    emit_pattern,
    heatmap_indices,
    hot_colormap,
    read_csv,
    read_pattern,
    read_ppm,
)
from mearray.sweeps import GainPattern, IntensityMap, gain_pattern, to_gain_db

values = st.floats(0, 1e300, allow_nan=False, allow_infinity=False)


def grid_map(n1, n2, seed=0):
    r = np.random.default_rng(seed)
    return IntensityMap(np.linspace(-2, 2, n1), np.linspace(-1, 3, n2), r.uniform(0, 256, (n1, n2)))


class TestCsv:
    def test_two_by_two(self, tmp_path):
        path = emit_csv(grid_map(2, 2), tmp_path / "m.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 5 and lines[0] == "k1,k2,value"

    def test_row_major(self, tmp_path):
        m = grid_map(2, 3)
        lines = emit_csv(m, tmp_path / "m.csv").read_text().splitlines()[1:]
        first = [float(t) for t in lines[1].split(",")]
        assert first == [m.k1_axis[0], m.k2_axis[1], m.values[0, 1]]

    def test_large_line_count(self, tmp_path):
        path = emit_csv(grid_map(201, 201), tmp_path / "m.csv")
        assert len(path.read_text().splitlines()) == 40402

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 6), st.integers(2, 6), st.data())
    def test_round_trip_bitwise(self, tmp_path_factory, n1, n2, data):
        v = data.draw(arrays(float, (n1, n2), elements=values))
        k1 = np.sort(data.draw(arrays(float, n1, elements=st.floats(-1e3, 1e3), unique=True)))
        k2 = np.sort(data.draw(arrays(float, n2, elements=st.floats(-1e3, 1e3), unique=True)))
        m = IntensityMap(k1, k2, v)
        path = emit_csv(m, tmp_path_factory.mktemp("csv") / "m.csv")
        back = read_csv(path)
        assert np.array_equal(back.values, m.values)
        assert np.array_equal(back.k1_axis, m.k1_axis) and np.array_equal(back.k2_axis, m.k2_axis)


class TestPpm:
    def test_colormap_table(self):
        t = hot_colormap()
        assert t.shape == (256, 3) and t.dtype == np.uint8
        assert tuple(t[0]) == (0, 0, 0) and tuple(t[255]) == (255, 255, 255)
        assert tuple(t[85]) == (255, 0, 0) and tuple(t[170]) == (255, 255, 0)
        assert np.all(np.diff(t.astype(int).sum(axis=1)) >= 0)

    def test_header_and_payload(self, tmp_path):
        path = emit_heatmap(grid_map(201, 201), tmp_path / "m.ppm")
        raw = path.read_bytes()
        header = b"P6\n201 201 255\n"
        assert raw.startswith(header)
        assert len(raw) == len(header) + 201 * 201 * 3

    def test_non_square_dimensions(self, tmp_path):
        m = grid_map(7, 3)
        pix, comments = read_ppm(emit_heatmap(m, tmp_path / "m.ppm", metadata={"a": 1}))
        assert pix.shape == (3, 7, 3)
        assert json.loads(comments[0]) == {"a": 1}

    def test_unique_brightest(self, tmp_path):
        v = np.zeros((6, 5))
        v[4, 1] = 2.0
        v[2, 3] = 1.999
        pix, _ = read_ppm(emit_heatmap(IntensityMap(np.arange(6.0), np.arange(5.0), v), tmp_path / "m.ppm"))
        bright = np.argwhere(pix.astype(int).sum(axis=2) == 765)
        # column = k1 index, row counts k2 from the top
        assert bright.tolist() == [[3, 4]]

    @pytest.mark.parametrize("scale", ["linear", "log10"])
    def test_constant_uniform(self, tmp_path, scale):
        m = IntensityMap(np.arange(4.0), np.arange(3.0), np.full((4, 3), 7.0))
        pix, _ = read_ppm(emit_heatmap(m, tmp_path / "m.ppm", scale))
        assert len({tuple(p) for p in pix.reshape(-1, 3)}) == 1

    def test_log_clamp(self):
        v = np.array([[1e-12, 1e-6], [1e-3, 1.0]])
        idx = heatmap_indices(IntensityMap(np.arange(2.0), np.arange(2.0), v), "log10")
        assert idx[0, 0] == idx[0, 1] == 0
        assert idx[1, 1] == 255 and idx[1, 0] == int(np.floor(255 * 0.5))


class TestPattern:
    def pattern(self, n=8):
        cfg = fc.ArrayConfig([[0, 0, 0]], [0.0], omega=2 * np.pi * 2.5e9)
        return gain_pattern(cfg, "YZ", 1.5, n)

    def test_eight_rows(self, tmp_path):
        path = emit_pattern(self.pattern(), tmp_path / "p.csv", {"x": 1})
        lines = path.read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data[0] == "angle_rad,intensity,gain_db" and len(data) == 9
        assert any(ln.startswith("# config: ") for ln in lines)
        assert max(float(r.split(",")[2]) for r in data[1:]) == 0.0

    def test_round_trip_bitwise(self, tmp_path):
        p = self.pattern(360)
        q = read_pattern(emit_pattern(p, tmp_path / "p.csv"))
        for a, b in [(p.angles, q.angles), (p.intensity, q.intensity), (p.gain_db, q.gain_db)]:
            assert np.array_equal(a, b)
        assert (q.plane, q.radius, q.frequency_hz, q.far_field) == (p.plane, p.radius, p.frequency_hz, p.far_field)

    @settings(max_examples=25, deadline=None)
    @given(arrays(float, st.integers(8, 20), elements=st.floats(1e-300, 1e300)))
    def test_round_trip_random(self, tmp_path_factory, inten):
        g = to_gain_db(inten)
        p = GainPattern("XY", np.linspace(0, 6, inten.size), inten, g, 0.25, 1e9, False)
        q = read_pattern(emit_pattern(p, tmp_path_factory.mktemp("pat") / "p.csv"))
        assert np.array_equal(q.intensity, p.intensity) and np.array_equal(q.gain_db, p.gain_db)
