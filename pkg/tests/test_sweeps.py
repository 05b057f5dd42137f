import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import maximum_filter

from mearray import fieldcore as fc
from mearray.errors import DegenerateGeometryError, ValidationError
from mearray.geometry import PerturbationSpec, StentLayoutSpec, perturb_layout, planar_grid, stent_layout
from mearray.phases import FAMILY_A, FAMILY_B, FAMILY_C, PhaseFamily, Regime, family_phase, optimal_phases
from mearray.sweeps import (
    IntensityMap,
    SweepSpec,
    _regional_maxima,
    find_peaks,
    gain_pattern,
    plane_basis,
    sweep_k1k2,
    to_gain_db,
    verify_deployment,
)

from .oracles import C0, phasor_sum_power

OMEGA = 2 * np.pi * 2.5e9
RX = (0.0, 0.0, 0.5)
GRID4 = planar_grid(4, 4, 0.006)


def spec(family=FAMILY_A, array=GRID4, steps=41, **kw):
    return SweepSpec((-2.0, 2.0, steps), (-2.0, 2.0, steps), family, array, RX, OMEGA, **kw)


class TestSweep:
    def test_single_element_constant(self, backend):
        m = sweep_k1k2(spec(array=planar_grid(1, 1, 0.01), steps=11))
        np.testing.assert_allclose(m.values, 1.0, rtol=1e-12)

    def test_axes_and_orientation(self):
        s = SweepSpec((-1.0, 1.0, 5), (0.0, 3.0, 7), FAMILY_B, GRID4, RX, OMEGA)
        m = sweep_k1k2(s)
        assert m.values.shape == (5, 7)
        cfg = s.config_at(m.k1_axis[3], m.k2_axis[2])
        assert m.values[3, 2] == pytest.approx(fc.array_factor(cfg, RX), rel=1e-12)

    @pytest.mark.parametrize("family", [FAMILY_A, FAMILY_B, FAMILY_C])
    def test_bounded_by_n_squared(self, family, backend):
        m = sweep_k1k2(spec(family))
        assert m.values.max() <= 256 * (1 + 1e-9)
        assert m.values.min() >= 0

    def test_deterministic_across_workers(self):
        a = sweep_k1k2(spec(FAMILY_C, steps=61))
        b = sweep_k1k2(spec(FAMILY_C, steps=61))
        c = sweep_k1k2(spec(FAMILY_C, steps=61), workers=4)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.values, c.values)

    def test_custom_family_path(self):
        custom = PhaseFamily.custom("2*pi*((l + m)*k1 + l*k2)")
        a = sweep_k1k2(spec(custom, steps=21))
        b = sweep_k1k2(spec(FAMILY_A, steps=21))
        np.testing.assert_allclose(a.values, b.values, rtol=1e-9, atol=1e-9)

    def test_si_units(self):
        s = spec(steps=5, units="si", k_el=2.0)
        m = sweep_k1k2(s)
        cfg = s.config_at(0.0, 0.0)
        assert m.values[2, 2] == pytest.approx(fc.intensity(cfg, RX), rel=1e-12)

    def test_compensation_off(self):
        rx = (0.3, -0.2, 0.05)
        s = SweepSpec((-1.0, 1.0, 5), (-1.0, 1.0, 5), FAMILY_C, GRID4, rx, OMEGA, compensation=False)
        m = sweep_k1k2(s)
        l, mm = GRID4.indices
        d = np.linalg.norm(np.asarray(rx) - GRID4.flat_positions, axis=1)
        ref = phasor_sum_power(family_phase(FAMILY_C, l, mm, 0.5, -1.0) + OMEGA / C0 * d)
        assert m.values[3, 0] == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("rng_", [(-1.0, 1.0, 1), (1.0, -1.0, 5), (0.0, float("inf"), 5)])
    def test_invalid_range(self, rng_):
        with pytest.raises(ValidationError):
            SweepSpec(rng_, (-1.0, 1.0, 5), FAMILY_A, GRID4, RX, OMEGA)

    def test_receiver_on_element(self):
        with pytest.raises(DegenerateGeometryError):
            sweep_k1k2(SweepSpec((-1.0, 1.0, 3), (-1.0, 1.0, 3), FAMILY_A, GRID4, (0.0, 0.0, 0.0), OMEGA))


def gaussian_map(center=(0.31, -0.52), n=41):
    k1 = np.linspace(-2, 2, n)
    k2 = np.linspace(-2, 2, n)
    K1, K2 = np.meshgrid(k1, k2, indexing="ij")
    v = 5.0 * np.exp(-((K1 - center[0]) ** 2 + (K2 - center[1]) ** 2) / 0.5)
    return IntensityMap(k1, k2, v)


class TestPeaks:
    def test_constant_map(self):
        m = IntensityMap(np.linspace(0, 1, 5), np.linspace(0, 1, 4), np.full((5, 4), 3.0))
        assert find_peaks(m) == []

    def test_gaussian_bump(self):
        m = gaussian_map()
        peaks = find_peaks(m)
        assert len(peaks) == 1
        h = m.k1_axis[1] - m.k1_axis[0]
        assert abs(peaks[0].k1 - 0.31) < h and abs(peaks[0].k2 + 0.52) < h
        assert peaks[0].value >= m.values[peaks[0].grid_index]
        assert peaks[0].regime is None

    def test_plateau_counts_once(self):
        v = np.zeros((9, 9))
        v[3:6, 2:7] = 1.0
        m = IntensityMap(np.arange(9.0), np.arange(9.0), v)
        assert _regional_maxima(v) == [(4, 4)]
        assert len(find_peaks(m)) == 1

    def test_prominence_threshold(self):
        k = np.linspace(-2, 2, 81)
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        v = np.exp(-((K1 + 1) ** 2 + K2**2) * 8) + 0.3 * np.exp(-((K1 - 1) ** 2 + K2**2) * 8)
        m = IntensityMap(k, k, v)
        assert len(find_peaks(m, 0.5)) == 1
        assert len(find_peaks(m, 0.2)) == 2
        with pytest.raises(ValidationError):
            find_peaks(m, 0.0)

    def test_family_a_small_grid(self):
        m = sweep_k1k2(spec(steps=41))
        peaks = find_peaks(m)
        assert len(peaks) == 25
        for p in peaks:
            assert p.regime.regime is Regime.FULL
            assert abs(p.k1 - round(p.k1)) < 1e-6 and abs(p.k2 - round(p.k2)) < 1e-6

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31))
    def test_soundness_on_random_maps(self, seed):
        r = np.random.default_rng(seed)
        v = r.uniform(0, 1, (12, 15))
        m = IntensityMap(np.linspace(0, 1, 12), np.linspace(0, 2, 15), v)
        neigh = maximum_filter(v, size=3, mode="constant", cval=-np.inf)
        for p in find_peaks(m, 0.1):
            assert v[p.grid_index] == neigh[p.grid_index]
            assert p.value >= v[p.grid_index]


class TestGainPattern:
    def test_dipole_yz(self):
        cfg = fc.ArrayConfig([[0, 0, 0]], [0.0], omega=OMEGA)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            p = gain_pattern(cfg, "YZ", 1.0, 360)
        theta = p.angles - np.pi / 2  # angle from +z; angles start at +y
        ref = np.sin(theta) ** 2
        np.testing.assert_allclose(p.intensity / p.intensity.max(), ref, atol=1e-9)
        assert p.gain_db.max() == 0.0 and np.all(p.gain_db <= 0)
        assert np.isneginf(p.gain_db[90]) or p.intensity[90] < 1e-30

    def test_dipole_xy_isotropic(self):
        cfg = fc.ArrayConfig([[0, 0, 0]], [0.0], omega=OMEGA)
        p = gain_pattern(cfg, "XY", 2.0, 64)
        assert p.intensity.max() / p.intensity.min() - 1 < 1e-12

    def test_two_elements_match_phasor_oracle(self):
        lam = C0 / (OMEGA / (2 * np.pi))
        cfg = fc.ArrayConfig([[-lam / 4, 0, 0], [lam / 4, 0, 0]], [0.0, 0.0], omega=OMEGA)
        r = 100.0
        p = gain_pattern(cfg, "XY", r, 72)
        k = OMEGA / C0
        pts = r * np.stack([np.cos(p.angles), np.sin(p.angles), 0 * p.angles], axis=1)
        dr = np.linalg.norm(pts - cfg.positions[1], axis=1) - np.linalg.norm(pts - cfg.positions[0], axis=1)
        af = np.abs(1 + np.exp(1j * k * dr)) ** 2
        pref = fc.intensity_prefactor(cfg, pts[0])
        np.testing.assert_allclose(p.intensity, pref * af, rtol=1e-9, atol=1e-12 * p.intensity.max())
        # in phase: maximum broadside (along y), nulls endfire (along x)
        assert p.intensity[18] == pytest.approx(p.intensity.max())
        assert p.intensity[0] < 1e-9 * p.intensity.max()

    def test_near_field_flag(self):
        cfg = fc.ArrayConfig([[0, 0, 0], [0.1, 0, 0]], [0.0, 0.0], omega=OMEGA)
        assert gain_pattern(cfg, "XY", 0.5, 16).far_field is False
        assert gain_pattern(cfg, "XY", 2.0, 16).far_field is True

    def test_arbitrary_normal(self):
        name, u, v = plane_basis([0, 0, 2])
        assert name.startswith("normal:")
        np.testing.assert_allclose(np.cross(u, v), [0, 0, 1], atol=1e-15)
        cfg = fc.ArrayConfig([[0, 0, 0]], [0.0], omega=OMEGA)
        p = gain_pattern(cfg, [0, 0, 1], 1.0, 32)
        assert np.ptp(p.intensity) <= 1e-12 * p.intensity.max()

    def test_errors(self):
        cfg = fc.ArrayConfig([[0, 0, 0]], [0.0], omega=OMEGA)
        with pytest.raises(ValidationError):
            gain_pattern(cfg, "AB")
        with pytest.raises(ValidationError):
            gain_pattern(cfg, "XY", n_samples=4)
        with pytest.raises(DegenerateGeometryError):
            to_gain_db(np.zeros(8))


STENT = stent_layout(StentLayoutSpec(0.002, [0.0, 0.004, 0.008], 6))
STENT_RX = (0.0, 0.5, 0.004)


def stent_nominal():
    pos = STENT.flat_positions
    return fc.ArrayConfig(pos, optimal_phases(pos, STENT_RX, OMEGA), omega=OMEGA)


class TestVerify:
    def test_nominal(self):
        chk = verify_deployment(stent_nominal(), STENT, STENT_RX, pass_fraction=1.0)
        assert chk.af_ratio == pytest.approx(1.0, rel=1e-12)

    def test_one_element_missing(self):
        ring = stent_layout(StentLayoutSpec(0.003, [0.0], 4)).flat_positions
        rx = (0.0, 0.0, 0.4)
        nominal = fc.ArrayConfig(ring, optimal_phases(ring, rx, OMEGA), omega=OMEGA)
        chk = verify_deployment(nominal, ring[:3], rx)
        assert chk.af_ratio == pytest.approx(9 / 16, rel=1e-12)
        assert chk.passed

    def test_radial_expansion_detected(self):
        moved = perturb_layout(STENT, PerturbationSpec(radial_scale=1.05))
        assert verify_deployment(stent_nominal(), moved, STENT_RX).af_ratio < 1.0

    def test_too_many_elements(self):
        nominal = stent_nominal()
        with pytest.raises(ValidationError):
            verify_deployment(nominal, np.vstack([STENT.flat_positions, [[1, 1, 1]]]), STENT_RX)

    def test_ratio_matches_direct(self):
        moved = perturb_layout(STENT, PerturbationSpec(jitter_sigma=1e-3, seed=3))
        nominal = stent_nominal()
        k = OMEGA / C0
        d = np.linalg.norm(np.asarray(STENT_RX) - moved.flat_positions, axis=1)
        ref = phasor_sum_power(nominal.phases + k * d) / 18**2
        assert verify_deployment(nominal, moved, STENT_RX).af_ratio == pytest.approx(ref, rel=1e-9)
