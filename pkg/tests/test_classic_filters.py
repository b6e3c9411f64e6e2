import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prfilter import classic_filters as cf

from oracles import erf_integrated_gaussian_1d

ALL_NAMES = tuple(cf.FILTERS)


@pytest.mark.parametrize("name", ALL_NAMES)
def test_constant_image_fixed_point(name):
    img = np.full((9, 9), 0.42)
    out = cf.FILTERS[name](img)
    assert np.allclose(out, img, atol=1e-12)


def test_median_kills_isolated_spike():
    img = np.zeros((3, 3))
    img[1, 1] = 1.0
    assert cf.median_filter(img, 3)[1, 1] == 0.0


def test_adaptive_median_removes_single_salt_pixel():
    img = np.zeros((9, 9))
    img[4, 4] = 1.0
    out = cf.adaptive_median_filter(img, 7)
    assert np.array_equal(out, np.zeros((9, 9)))


def test_adaptive_median_preserves_step_edge():
    """Stage B keeps non-extreme centers: a clean step survives while
    impulse corruption on it is removed."""
    img = np.zeros((9, 9))
    img[:, 5:] = 1.0
    noisy = img.copy()
    noisy[2, 2] = 1.0   # salt in the dark half
    noisy[6, 7] = 0.0   # pepper in the bright half
    out = cf.adaptive_median_filter(noisy, 7)
    assert np.array_equal(out, img)


def test_gaussian_kernel_delta_limit():
    k = cf.gaussian_kernel(0.1, 3)
    assert k[1, 1] > 0.999


def test_gaussian_kernel_symmetry():
    k = cf.gaussian_kernel(2.0, 9)
    assert np.array_equal(k, k.T)
    assert np.array_equal(k, k[::-1, ::-1])
    assert k.sum() == pytest.approx(1.0)


def test_gaussian_kernel_center_matches_integrated_oracle():
    """Point sampling vs pixel-area integration agree to 1e-3 at sigma 2."""
    k = cf.gaussian_kernel(2.0, 9)
    w = erf_integrated_gaussian_1d(2.0, 9)
    center_oracle = w[4] * w[4]
    assert abs(k[4, 4] - center_oracle) < 1e-3


def test_min_max_bracket_input(rng):
    img = rng.uniform(0, 1, size=(12, 12))
    lo = cf.min_filter(img, 3)
    hi = cf.max_filter(img, 3)
    assert np.all(lo <= img + 1e-12)
    assert np.all(img <= hi + 1e-12)
    # idempotent on constants
    c = np.full((6, 6), 0.3)
    assert np.array_equal(cf.min_filter(c, 3), c)
    assert np.array_equal(cf.max_filter(c, 3), c)


@settings(max_examples=30, deadline=None)
@given(
    arrays(float, (5, 5), elements=st.floats(0.0, 1.0, allow_nan=False, width=16)),
    st.floats(0.1, 0.9),
    st.floats(0.05, 0.5),
)
def test_median_commutes_with_monotone_remap(img, gain, offset):
    """Median of a monotone remap equals the remap of the median."""
    remap = lambda x: np.clip(offset + gain * x, 0.0, 1.0)
    a = cf.median_filter(remap(img), 3)
    b = remap(cf.median_filter(img, 3))
    assert np.allclose(a, b, atol=1e-12)


def test_average_and_mean_are_distinct_boxes(rng):
    img = rng.uniform(0, 1, size=(16, 16))
    a = cf.average_filter(img)
    m = cf.mean_filter(img)
    assert not np.allclose(a, m)
    # 3x3 box on an interior cell is the literal window mean
    assert a[8, 8] == pytest.approx(img[7:10, 7:10].mean())
    assert m[8, 8] == pytest.approx(img[6:11, 6:11].mean())


def test_kernel_size_validation(rng):
    img = rng.uniform(0, 1, size=(6, 6))
    with pytest.raises(ValueError):
        cf.median_filter(img, 4)
    with pytest.raises(ValueError):
        cf.median_filter(img, 1)
    with pytest.raises(ValueError):
        cf.median_filter(img, 7)  # larger than the image
    with pytest.raises(ValueError):
        cf.gaussian_filter(img, sigma=-1.0, ksize=3)


def test_filter_kind_apply(rng):
    img = rng.uniform(0, 1, size=(10, 10))
    out = cf.apply(img, cf.FilterKind("gaussian", {"sigma": 2.0, "ksize": 9}))
    assert np.allclose(out, cf.gaussian_filter(img, 2.0, 9))
    with pytest.raises(ValueError):
        cf.FilterKind("sobel")


def test_outputs_clamped():
    # 16x16 so the registry defaults (gaussian ksize 9) fit inside
    img = np.zeros((16, 16))
    img[::2, ::2] = 1.0
    for name in ALL_NAMES:
        out = cf.FILTERS[name](img)
        assert out.min() >= 0.0 and out.max() <= 1.0
