"""Residual profiling: GMM fits, BIC selection, before/after reports."""

from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from prfilter.bench import n_workers
from prfilter.corpus import make_texture_corpus
from prfilter.noise_forge import NoiseSpec, add_noise
from prfilter.noise_profiler import (
    DegenerateSamplesError,
    MixtureFit,
    ProfileReport,
    ProfileRow,
    fit_gmm,
    histogram,
    regularization_report,
    residual,
    write_profile_outputs,
)


# ---------------------------------------------------------------- residual


def test_residual_identity_is_zero():
    img = np.random.default_rng(0).uniform(size=(16, 16))
    assert np.all(residual(img, img) == 0.0)


def test_residual_constant_offset_exact():
    img = np.zeros((16, 16))  # exact: adding 0.1 to 0.0 loses no bits
    assert np.all(residual(img, img + 0.1) == 0.1)
    rnd = np.random.default_rng(1).uniform(size=(16, 16))
    np.testing.assert_allclose(residual(rnd, rnd + 0.1), 0.1, rtol=0, atol=1e-15)


def test_residual_moment_check():
    img = np.full((256, 256), 0.5)
    noisy = add_noise(img, NoiseSpec.gaussian(0.1), seed=4)
    assert abs(residual(img, noisy).std() - 0.1) < 0.005


def test_residual_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        residual(np.zeros((4, 4)), np.zeros((4, 5)))


@settings(max_examples=30, deadline=None)
@given(
    hnp.arrays(np.float64, (5, 7), elements=st.floats(-1, 1)),
    hnp.arrays(np.float64, (5, 7), elements=st.floats(-1, 1)),
)
def test_residual_antisymmetric(a, b):
    assert np.array_equal(residual(a, b), -residual(b, a))


# ---------------------------------------------------------------- fit_gmm


def test_fit_single_gaussian_selects_one_component():
    x = np.random.default_rng(0).normal(0.02, 0.11, 100_000)
    fit = fit_gmm(x, max_k=4, restarts=3, max_iter=150, seed=1)
    assert fit.n_components == 1
    wgt, mean, sig = fit.components[0]
    assert wgt == 1.0
    assert abs(sig - 0.11) / 0.11 < 0.02
    assert abs(mean - 0.02) < 0.005
    assert fit.converged


def test_fit_two_well_separated_components():
    rng = np.random.default_rng(2)
    x = np.concatenate([rng.normal(-0.3, 0.03, 50_000), rng.normal(0.3, 0.03, 50_000)])
    fit = fit_gmm(x, max_k=4, restarts=3, max_iter=150, seed=3)
    assert fit.n_components == 2
    means = [c[1] for c in fit.components]
    assert abs(means[0] - (-0.3)) < 0.01
    assert abs(means[1] - 0.3) < 0.01


def test_fit_k1_reproduces_sample_moments():
    # with one component EM closes after a single M step
    x = np.random.default_rng(5).normal(0.4, 0.07, 10_000)
    fit = fit_gmm(x, max_k=1)
    _, mean, sig = fit.components[0]
    assert abs(mean - x.mean()) < 1e-12
    assert abs(sig - x.std()) < 1e-12


def test_fit_degenerate_and_validation():
    with pytest.raises(DegenerateSamplesError):
        fit_gmm(np.full(500, 0.25))
    with pytest.raises(ValueError, match="100 samples"):
        fit_gmm(np.zeros(50))
    x = np.random.default_rng(6).normal(size=1000)
    with pytest.raises(ValueError, match="max_k"):
        fit_gmm(x, max_k=0)
    with pytest.raises(ValueError, match="max_k"):
        fit_gmm(x, max_k=5)


def test_mixture_fit_invariants_enforced():
    good = [(0.5, -0.1, 0.05), (0.5, 0.1, 0.05)]
    MixtureFit(good, 2, 0.0, 0.0, True)
    with pytest.raises(ValueError, match="sum"):
        MixtureFit([(0.4, 0.0, 0.1)], 1, 0.0, 0.0, True)
    with pytest.raises(ValueError, match="positive"):
        MixtureFit([(1.0, 0.0, 0.0)], 1, 0.0, 0.0, True)
    with pytest.raises(ValueError, match="1..4"):
        MixtureFit(good, 5, 0.0, 0.0, True)


def _bic_trial(trial):
    # capped iterations only lower the k=2 log-likelihood; the BIC margin
    # for true single-Gaussian data is ~3 ln n, far above the crawl gains
    x = np.random.default_rng(5000 + trial).normal(0.0, 0.1, 100_000)
    fit = fit_gmm(x, max_k=2, restarts=2, max_iter=100, seed=trial)
    return fit.n_components == 1


def test_bic_prefers_one_component_on_gaussian_data():
    with ProcessPoolExecutor(max_workers=n_workers()) as pool:
        wins = sum(pool.map(_bic_trial, range(100)))
    assert wins >= 95


# ---------------------------------------------------------------- histogram


def test_histogram_grid():
    counts, centers = histogram(np.array([0.0, 0.0, 0.5, -0.99]))
    assert counts.shape == centers.shape == (101,)
    assert counts.sum() == 4
    assert centers[0] == pytest.approx(-1.0 + 1.0 / 101)
    assert counts[np.argmin(np.abs(centers))] == 2


# ---------------------------------------------------------------- reports


def test_report_gaussian_noise_is_single_component_before():
    imgs = make_texture_corpus(32)
    rep = regularization_report(imgs, NoiseSpec.gaussian(0.05), seed0=0, restarts=5)
    before_one = sum(r.k_before == 1 for r in rep.rows)
    assert before_one >= 9  # >= 90% of 10 images
    assert rep.n_used == 10


def test_report_blind_mixture_regularized_after():
    imgs = make_texture_corpus(32)[:4]
    rep = regularization_report(imgs, NoiseSpec.blind(False, 12.0), seed0=7)
    assert rep.frac_after_one > 0.5
    assert rep.frac_after_le_before > 0.5


def test_report_zero_noise_rows_excluded():
    imgs = make_texture_corpus(32)[:3]
    rep = regularization_report(imgs, NoiseSpec.gaussian(0.0), seed0=0)
    assert all(r.excluded for r in rep.rows)
    assert all("zero variance" in r.note for r in rep.rows)
    assert rep.n_used == 0
    assert rep.counts_before == {} and rep.counts_after == {}
    assert np.isnan(rep.frac_after_one)


def test_report_validation():
    with pytest.raises(ValueError, match="empty"):
        regularization_report([], NoiseSpec.gaussian(0.1))
    with pytest.raises(ValueError, match="boundary_margin"):
        regularization_report([np.zeros((8, 8))], NoiseSpec.gaussian(0.1),
                              boundary_margin=4)


def test_report_counts_mechanics():
    rows = [
        ProfileRow(0, k_before=3, k_after=1),
        ProfileRow(1, k_before=2, k_after=2),
        ProfileRow(2, k_before=1, k_after=None, excluded=True),
    ]
    rep = ProfileReport(rows=rows, spec=NoiseSpec.gaussian(0.1), boundary_margin=3)
    assert rep.n_used == 2
    assert rep.counts_before == {3: 1, 2: 1}
    assert rep.counts_after == {1: 1, 2: 1}
    assert rep.frac_after_one == 0.5
    assert rep.frac_after_le_before == 1.0


def test_write_profile_outputs(tmp_path):
    imgs = make_texture_corpus(32)[:3]
    rep = regularization_report(imgs, NoiseSpec.gaussian(0.0), seed0=0)
    files = write_profile_outputs(str(tmp_path), rep)
    assert len(files) == 4
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("image,k_before,k_after")
    assert len(summary) == 4
    hist = (tmp_path / "hist_00.csv").read_text().splitlines()
    assert hist[0] == "bin_center,before,after"
    assert len(hist) == 1 + 101
