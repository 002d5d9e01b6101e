import math

import numpy as np
import pytest

import shrinkage_lab as sl


@pytest.fixture(scope="module")
def mp_half():
    return sl.build_spectrum(sl.PopulationSpectrum.point_mass(1.0), 0.5, 256)


def test_marchenko_pastur_edges(mp_half):
    (lo, hi), = mp_half.support
    assert lo == pytest.approx((1 - math.sqrt(0.5)) ** 2, rel=1e-8)
    assert hi == pytest.approx((1 + math.sqrt(0.5)) ** 2, rel=1e-8)
    assert mp_half.total_mass() == pytest.approx(1.0, abs=1e-6)
    assert mp_half.x.shape == mp_half.f.shape == mp_half.density.shape
    assert np.all(mp_half.density >= 0)


def test_shrinkers_are_vectorized():
    h = sl.ShrinkageFunction.ridge(0.5)
    x = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(h(x), np.sqrt(x) / (x + 0.5))
    np.testing.assert_allclose(sl.ShrinkageFunction.ridge_inverse(0.5)(x), 1.0 / (x + 0.5))
    assert h(1.0) == pytest.approx(2.0 / 3.0)


def test_null_risk():
    s = sl.build_spectrum(sl.PopulationSpectrum.point_mass(1.0), 0.5, 128)
    r = sl.test_risk(0.0, s, sl.ShrinkageFunction.constant(0.0))
    assert r["risk"] == pytest.approx(1.0)
    curve = sl.learning_curve(1.0, s, 0.1, [0.1, 1.0, 10.0])
    assert np.all(np.diff(curve["train_error"]) <= 1e-12)


def test_lda_and_errors():
    s = sl.build_spectrum(sl.PopulationSpectrum([(1.0, 0.5), (4.0, 0.5)]), 0.5, 256)
    ident = sl.lda_error(1.0, s, sl.ShrinkageFunction.identity())
    best = sl.optimal_shrinkage(1.0, s, 64)
    assert sl.lda_error(1.0, s, best["h"])["error"] <= ident["error"] + 1e-6
    assert sl.estimate_alpha2(3.0, 1.0, 2.0) == pytest.approx(2.5)
    assert sl.estimate_alpha2(0.1, 1.0, 2.0) == 0.0
    with pytest.raises(sl.ConfigError):
        sl.build_spectrum(sl.PopulationSpectrum.point_mass(1.0), 1.0)
    with pytest.raises(sl.Error):
        sl.optimal_shrinkage(1.0, s, 8)


def test_kernel_estimate_runs():
    pop = sl.PopulationSpectrum.point_mass(1.0)
    eig = sl.sample_eigenvalues(pop, 200, 400, seed=3)
    est = sl.kernel_estimate(eig, 0.5)
    assert est["bandwidth"] > 0
    assert len(est["x"]) == len(est["f"]) == len(est["g"])
