import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roaddetect.rain import (GuidedFilterParams, RainSynthParams, guided_filter, rain_passes,
                             remove_rain_snow, streak_mask, synthesize_rain)
from roaddetect.raster import to_unit
from roaddetect.synth import make_scene

from oracles import naive_guided_filter
from strategies import rgb_images, unit_planes


@pytest.fixture(scope="module")
def rain_corpus():
    """Ten clean scenes with alpha = 0.7, 200-streak rain."""
    out = []
    for k in range(10):
        clean = make_scene(500 + k).image
        rained, mask = synthesize_rain(clean, RainSynthParams(alpha=0.7, count=200, rng_seed=k))
        out.append((clean, rained, mask))
    return out


def test_alpha_zero_keeps_background(rng):
    bg = rng.integers(0, 256, (40, 40, 3)).astype(np.uint8)
    out, mask = synthesize_rain(bg, RainSynthParams(alpha=0.0, count=20))
    np.testing.assert_array_equal(out, bg)
    assert mask.any()


def test_alpha_one_is_streak_intensity(rng):
    bg = rng.integers(0, 256, (40, 40, 3)).astype(np.uint8)
    out, mask = synthesize_rain(bg, RainSynthParams(alpha=1.0, count=20))
    assert np.all(out[mask] == 255)
    np.testing.assert_array_equal(out[~mask], bg[~mask])


def test_half_alpha_rounds_half_up():
    bg = np.full((30, 30, 3), 100, dtype=np.uint8)
    out, mask = synthesize_rain(bg, RainSynthParams(alpha=0.5, count=5))
    assert np.all(out[mask] == 178)


def test_streaks_are_seeded():
    p = RainSynthParams(count=50, rng_seed=3)
    np.testing.assert_array_equal(streak_mask((64, 64), p), streak_mask((64, 64), p))
    assert not np.array_equal(streak_mask((64, 64), p), streak_mask((64, 64), RainSynthParams(count=50, rng_seed=4)))


def test_params_validation():
    with pytest.raises(ValueError):
        RainSynthParams(alpha=1.5)
    with pytest.raises(ValueError):
        GuidedFilterParams(radius=-1)
    with pytest.raises(ValueError):
        GuidedFilterParams(epsilon=-0.1)


def test_guided_matches_naive_oracle_100_rasters():
    rng = np.random.default_rng(11)
    params = GuidedFilterParams(radius=2, epsilon=0.01)
    for _ in range(100):
        p, guide = rng.random((12, 12)), rng.random((12, 12))
        got = guided_filter(p, guide, params)
        assert np.max(np.abs(got - naive_guided_filter(p, guide, 2, 0.01))) <= 1e-9


def test_self_guidance_with_zero_epsilon(rng):
    p = rng.random((12, 12))
    out = guided_filter(p, p, GuidedFilterParams(radius=2, epsilon=0.0))
    np.testing.assert_allclose(out, p, atol=1e-9, rtol=0)


def test_flat_guide_with_zero_epsilon_uses_window_mean(rng):
    p = rng.random((6, 6))
    out = guided_filter(p, np.full((6, 6), 0.3), GuidedFilterParams(radius=1, epsilon=0.0))
    np.testing.assert_allclose(out, naive_guided_filter(p, np.full((6, 6), 0.3), 1, 0.0), atol=1e-12)


def test_constant_image_unchanged():
    img = np.full((20, 30, 3), (40, 120, 200), dtype=np.uint8)
    np.testing.assert_array_equal(remove_rain_snow(img), img)


def test_mae_gain_on_corpus(rain_corpus):
    for clean, rained, _ in rain_corpus:
        filtered = remove_rain_snow(rained)
        assert filtered.shape == rained.shape and filtered.dtype == np.uint8
        before = np.abs(rained.astype(float) - clean).mean()
        after = np.abs(filtered.astype(float) - clean).mean()
        assert after < before


def test_pass_outputs_stay_near_input_range(rain_corpus):
    for _, rained, _ in rain_corpus:
        planes = to_unit(rained)
        first, _, second = rain_passes(rained)
        for out in (first, second):
            for c in range(3):
                lo, hi = planes[..., c].min(), planes[..., c].max()
                assert out[..., c].min() >= lo - 0.05 and out[..., c].max() <= hi + 0.05


def test_deterministic(rain_corpus):
    _, rained, _ = rain_corpus[0]
    np.testing.assert_array_equal(remove_rain_snow(rained), remove_rain_snow(rained.copy()))


# -- properties --------------------------------------------------------------

@settings(max_examples=400)
@given(unit_planes(), st.floats(0, 1), st.integers(0, 4), st.floats(0, 0.5))
def test_constant_preserved_for_any_guide(guide, c, r, eps):
    out = guided_filter(np.full(guide.shape, c), guide, GuidedFilterParams(r, eps))
    np.testing.assert_allclose(out, c, atol=1e-9, rtol=0)


@settings(max_examples=150)
@given(unit_planes(max_side=7), st.data(), st.integers(0, 3), st.floats(1e-4, 0.2))
def test_guided_property_oracle(p, data, r, eps):
    guide = data.draw(unit_planes(max_side=7).filter(lambda g: g.shape == p.shape)
                      | st.just(p[::-1, ::-1].copy()))
    out = guided_filter(p, guide, GuidedFilterParams(r, eps))
    assert np.max(np.abs(out - naive_guided_filter(p, guide, r, eps))) <= 1e-9


@settings(max_examples=300)
@given(rgb_images(max_side=10))
def test_remove_rain_contract(img):
    out = remove_rain_snow(img, GuidedFilterParams(2, 0.04))
    assert out.shape == img.shape and out.dtype == np.uint8
