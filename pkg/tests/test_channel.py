import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ris_iscc.channel import (
    ChannelSet,
    dump_channels_csv,
    effective_channel,
    effective_channels,
    pathloss_db,
    sample_channels,
    wrap_phases,
)
from ris_iscc.scenario import build_default_scenario

from conftest import cn


def test_pathloss_reference_distance():
    assert pathloss_db(1.0, 3.6, -30.0) == -30.0


@pytest.mark.parametrize("exponent, expected", [(3.6, -112.84), (2.2, -80.62)])
def test_pathloss_at_200m(exponent, expected):
    # independent log-distance evaluation, frozen to two decimals above
    oracle = -30.0 - 10.0 * exponent * math.log10(200.0)
    assert abs(oracle - expected) <= 0.01
    assert pathloss_db(200.0, exponent, -30.0) == pytest.approx(oracle, abs=1e-12)


def test_pathloss_rejects_short_distance():
    with pytest.raises(ValueError):
        pathloss_db(0.5, 2.2, -30.0)


def test_shapes_and_no_ris():
    s = build_default_scenario(3, 0, 1)
    c = sample_channels(s, 1)
    assert c.h_direct.shape == (3, 16, 16)
    assert c.g_ris_bs.shape == (16, 0) and c.g_ue_ris.shape == (3, 0, 16)
    assert np.all(c.h_direct != 0)
    for k in range(3):
        np.testing.assert_array_equal(effective_channel(c, np.zeros(0), k), c.h_direct[k])


def test_shapes_with_ris(small_world):
    s, c = small_world
    assert c.g_ris_bs.shape == (16, 8) and c.g_ue_ris.shape == (4, 8, 16)
    assert all(np.all(np.isfinite(a)) for a in (c.h_direct, c.g_ris_bs, c.g_ue_ris))


def test_sampling_is_deterministic(small_world):
    s, c = small_world
    assert sample_channels(s, 3) == c
    assert not sample_channels(s, 4) == c


def test_channels_are_read_only(small_world):
    _, c = small_world
    with pytest.raises(ValueError):
        c.h_direct[0, 0, 0] = 0


def _linear(d, exponent):
    return 10.0 ** ((-30.0 - 10.0 * exponent * math.log10(d)) / 10.0)


def test_fading_power_matches_pathloss():
    # 400 draws x 256 entries > 1e5 samples per link family
    direct, reflect = [], []
    s = build_default_scenario(1, 4, 0)
    (ux, uy), = s.user_positions
    d_direct = math.hypot(ux + 200.0, uy)
    d_ue_ris = math.hypot(ux, uy)
    for seed in range(400):
        c = sample_channels(s, seed)
        direct.append(np.abs(c.h_direct) ** 2 / _linear(d_direct, 3.6))
        reflect.append(np.abs(c.g_ue_ris) ** 2 / _linear(d_ue_ris, 2.2))
    direct = np.concatenate([d.ravel() for d in direct])
    reflect = np.concatenate([r.ravel() for r in reflect])
    assert direct.size >= 1e5
    assert direct.mean() == pytest.approx(1.0, rel=0.03, abs=0)
    # Rician: unit-modulus LoS plus unit-variance scatter keeps unit mean power
    assert reflect.mean() == pytest.approx(1.0, rel=0.03, abs=0)


def test_aligned_phases_sum_magnitudes():
    c = ChannelSet(np.array([[[1 + 0j]]]), np.array([[1 + 0j, 1 + 0j]]),
                   np.array([[[1 + 0j], [0 + 1j]]]))
    H = effective_channel(c, np.array([0.0, -np.pi / 2]), 0)
    assert H.shape == (1, 1)
    assert H[0, 0] == pytest.approx(3 + 0j, abs=1e-15)


def test_matrix_form_matches_elementwise_sum(small_world):
    s, c = small_world
    theta = np.random.default_rng(0).uniform(0, 2 * np.pi, s.m_ris)
    for k in range(s.k_users):
        ref = c.h_direct[k].copy()
        for m in range(s.m_ris):
            ref += np.outer(c.g_ris_bs[:, m], c.g_ue_ris[k, m, :]) * np.exp(1j * theta[m])
        np.testing.assert_allclose(effective_channel(c, theta, k), ref, rtol=0, atol=1e-12 * np.abs(ref).max())


def test_batched_matches_single(small_world):
    s, c = small_world
    thetas = np.random.default_rng(1).uniform(0, 2 * np.pi, (3, s.m_ris))
    H = effective_channels(c, thetas)
    assert H.shape == (3, s.k_users, s.n_bs, s.n_ue)
    for p in range(3):
        for k in range(s.k_users):
            np.testing.assert_allclose(H[p, k], effective_channel(c, thetas[p], k), rtol=1e-13, atol=0)


def test_effective_channel_errors(small_world):
    s, c = small_world
    with pytest.raises(IndexError):
        effective_channel(c, np.zeros(s.m_ris), s.k_users)
    with pytest.raises(ValueError):
        effective_channel(c, np.zeros(s.m_ris + 1), 0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(0, 7), shift=st.integers(-3, 3))
def test_two_pi_shift_invariance(seed, m, shift):
    rng = np.random.default_rng(seed)
    c = ChannelSet(cn(rng, 2, 3, 2), cn(rng, 3, 8), cn(rng, 2, 8, 2))
    theta = rng.uniform(0, 2 * np.pi, 8)
    moved = theta.copy()
    moved[m] += 2 * np.pi * shift
    for k in range(2):
        np.testing.assert_allclose(np.abs(effective_channel(c, moved, k)),
                                   np.abs(effective_channel(c, theta, k)), rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(1, 10))
def test_scalar_triangle_bound(seed, m):
    rng = np.random.default_rng(seed)
    c = ChannelSet(cn(rng, 1, 1, 1), cn(rng, 1, m), cn(rng, 1, m, 1))
    cascade = c.g_ris_bs[0] * c.g_ue_ris[0, :, 0]
    bound = abs(c.h_direct[0, 0, 0]) + np.abs(cascade).sum()
    theta = rng.uniform(0, 2 * np.pi, m)
    assert abs(effective_channel(c, theta, 0)[0, 0]) <= bound * (1 + 1e-12)
    aligned = np.angle(c.h_direct[0, 0, 0]) - np.angle(cascade)
    assert abs(effective_channel(c, aligned, 0)[0, 0]) == pytest.approx(bound, rel=1e-12, abs=0)


def test_wrap_phases():
    out = wrap_phases([-1e-18, 2 * np.pi, 7.0, -np.pi])
    assert np.all((out >= 0) & (out < 2 * np.pi))
    np.testing.assert_allclose(out[1:], [0.0, 7.0 - 2 * np.pi, np.pi])


def test_scaled_scales_every_effective_channel(small_world):
    s, c = small_world
    theta = np.random.default_rng(2).uniform(0, 2 * np.pi, s.m_ris)
    np.testing.assert_allclose(effective_channels(c.scaled(3.0), theta),
                               3.0 * effective_channels(c, theta), rtol=1e-12)


def test_inconsistent_shapes_rejected():
    with pytest.raises(ValueError):
        ChannelSet(np.zeros((2, 3, 4), complex), np.zeros((3, 5), complex), np.zeros((2, 4, 4), complex))
    with pytest.raises(ValueError):
        ChannelSet(np.full((1, 1, 1), np.nan + 0j), np.zeros((1, 0), complex), np.zeros((1, 0, 1), complex))


def test_dump_csv(tmp_path, small_world):
    s, c = small_world
    path = tmp_path / "ch.csv"
    dump_channels_csv(c, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "link,user,row,col,re,im"
    assert len(rows) == 1 + c.h_direct.size + c.g_ris_bs.size + c.g_ue_ris.size
