import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ris_iscc.scenario import build_default_scenario
from ris_iscc.sensing import beampattern, max_beampattern, sensing_floor, steering_vector

GRID = np.deg2rad(np.arange(-90, 91))


def test_broadside_is_all_ones():
    np.testing.assert_array_equal(steering_vector(0.0, 16), np.ones(16))


def test_endfire_alternates():
    np.testing.assert_allclose(steering_vector(np.pi / 2, 4), [1, -1, 1, -1], atol=1e-15)


@given(angle=st.floats(-10, 10), n=st.integers(1, 64))
def test_steering_norm(angle, n):
    assert np.linalg.norm(steering_vector(angle, n)) ** 2 == pytest.approx(n, rel=1e-12, abs=0)


def test_steering_rejects_bad_size():
    with pytest.raises(ValueError):
        steering_vector(0.0, 0)


def test_matched_gain():
    w = steering_vector(0.0, 16) / 4.0
    assert beampattern(w, 0.5, 0.0) == pytest.approx(8.0, rel=1e-12, abs=0)


def test_orthogonal_gain_is_zero():
    # a(0) and a(pi/2) are orthogonal for even n
    w = steering_vector(np.pi / 2, 4) / 2.0
    assert beampattern(w, 1.0, 0.0) == pytest.approx(0.0, abs=1e-28)


def test_rejects_unnormalised_or_bad_power():
    with pytest.raises(ValueError):
        beampattern(np.ones(4), 1.0, 0.0)
    with pytest.raises(ValueError):
        beampattern(np.ones(4) / 2, 0.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 32), p=st.floats(1e-3, 10))
def test_gain_bounded_by_p_times_n(seed, n, p):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w /= np.linalg.norm(w)
    g = beampattern(w, p, GRID)
    assert np.all(np.isfinite(g))
    assert g.max() <= p * n * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), phase=st.floats(-10, 10))
def test_global_phase_invariance(seed, phase):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    w /= np.linalg.norm(w)
    np.testing.assert_allclose(beampattern(w * np.exp(1j * phase), 0.5, GRID), beampattern(w, 0.5, GRID),
                               rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("deg", [-60, -17, 0, 25, 80])
def test_matched_beam_peaks_at_its_angle(deg):
    theta0 = np.deg2rad(deg)
    w = steering_vector(theta0, 16) / 4.0
    g = beampattern(w, 0.5, GRID)
    assert GRID[np.argmax(g)] == pytest.approx(theta0)


def test_pattern_is_finite_and_smooth_on_grid():
    w = steering_vector(0.3, 16) / 4.0
    g = beampattern(w, 0.5, GRID)
    assert np.all(np.isfinite(g))
    # derivative bound: |dg/dtheta| <= 2 p n * pi * (n-1) / 2 per radian
    step = np.deg2rad(1.0)
    assert np.max(np.abs(np.diff(g))) <= 0.5 * 16 * np.pi * 15 * step


def test_max_beampattern_and_floor():
    assert max_beampattern(0.5, 16) == 8.0
    assert max_beampattern(1.0, 1) == 1.0
    assert sensing_floor(build_default_scenario(2, 0, 1)) == 4.0
