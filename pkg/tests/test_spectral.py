import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sst

from rmt_smin import linalg, profile as P, spectral as S
from rmt_smin.sampler import sample

samples = arrays(float, st.integers(1, 40), elements=st.floats(0, 1, allow_nan=False))


@given(samples)
def test_ks_matches_scipy(x):
    ours = S.ks_statistic(x, lambda v: np.clip(v, 0, 1))
    assert ours == pytest.approx(sst.kstest(x, "uniform").statistic, abs=1e-12)


def brute_sup(a, b):
    pts = np.concatenate([a, b])
    return max(abs(np.mean(a <= x) - np.mean(b <= x)) for x in pts)


@given(samples, samples)
def test_nu_distance_brute_force(a, b):
    assert S.nu_distance(a, b) == pytest.approx(brute_sup(a, b), abs=1e-12)


@given(samples, samples)
def test_nu_distance_matches_scipy_two_sample(a, b):
    assert S.nu_distance(a, b) == pytest.approx(sst.ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


def test_nu_distance_bounds():
    assert S.nu_distance([1, 2, 3], [1, 2, 3]) == 0.0
    assert S.nu_distance([0, 0], [1, 1]) == 1.0
    with pytest.raises(ValueError):
        S.nu_distance([], [1])


def test_truncated_logdet_equals_full_when_nothing_cut(rng):
    n, z = 30, 0.7 + 0.2j
    A = rng.standard_normal((n, n)) / math.sqrt(n)
    M = A - z * np.eye(n)
    s = linalg.singular_spectrum(M).values
    full = np.sum(np.log(np.abs(linalg.eigenvalues(A) - z))) / n
    assert S.truncated_logdet(s, s.min() / 2) == pytest.approx(full, abs=1e-10)
    assert S.truncated_logdet(s, s.max() * 2) is None


def test_calibration_scale():
    cal = S.calibrate(400, runs=100, seed=1)
    assert cal["pass"]
    # the Kolmogorov median 0.8276/sqrt(n) sits near 1.41 times sqrt(log 2 / 2n)
    assert cal["modulus_ratio"] == pytest.approx(1.41, abs=0.25)


def test_uniform_disc_points():
    pts = S.uniform_disc(1000, 3)
    assert np.abs(pts).max() <= 1.0
    mk, ak = S.disc_distances(pts)
    assert mk < 0.06 and ak < 0.06


def test_band_esd_shape_and_guard():
    r = S.band_esd(100, 30, 0)
    assert len(r.eigenvalues) == 100 and 0 <= r.modulus_ks <= 1 and 0 <= r.angular_ks <= 1
    with pytest.raises(ValueError):
        S.band_esd(100, 0, 0)
    with pytest.raises(ValueError):
        S.band_esd(100, 51, 0)


def test_band_esd_reproducible():
    assert np.array_equal(S.band_esd(60, 10, 4).eigenvalues, S.band_esd(60, 10, 4).eigenvalues)


def test_nu_comparison_identical_and_independent():
    g = S.gaussian_profile(80)
    same = S.nu_comparison(g, "real_gaussian", 1.0, seed_pair=(5, 5))
    assert same.nu_distance == 0.0 and same.logdet_gap == 0.0
    diff = S.nu_comparison(g, "real_gaussian", 1.0, seed_pair=(5, 6))
    assert 0 < diff.nu_distance <= 1


def test_compare_matrices_same_realization():
    s = sample(P.periodic_band(40, 12).scaled(1 / 5), z=0.8, seed=2)
    out = S.compare_matrices(s.matrix, s.matrix, 0.8, 1e-3)
    assert out.nu_distance == 0.0 and out.logdet_gap == 0.0


def test_nu_comparison_zero_shift_has_no_gap():
    out = S.nu_comparison(S.gaussian_profile(20), "real_gaussian", 0.0, seed_pair=(1, 2))
    assert out.logdet_gap is None and out.truncation is None


def test_nu_comparison_all_truncated_is_undefined():
    g = S.gaussian_profile(10)
    MA = sample(g, z=1.0, seed=1).matrix
    out = S.compare_matrices(MA, MA, 1.0, 1e6)
    assert out.logdet_gap is None


def test_exports(tmp_path):
    r = S.band_esd(50, 10, 1)
    S.write_eigenvalues_csv(tmp_path / "e.csv", r.eigenvalues)
    back = np.loadtxt(tmp_path / "e.csv", delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 0] + 1j * back[:, 1], r.eigenvalues)
    S.write_singular_values_csv(tmp_path / "s.csv", {"A": [3, 2, 1], "G": [1]})
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "index,A,G"
    for name, fn in (("a.svg", S.plot_spectrum_svg), ("b.svg", S.plot_cdf_svg)):
        fn(tmp_path / name, r.eigenvalues, "t")
        first = (tmp_path / name).read_bytes()
        fn(tmp_path / name, r.eigenvalues, "t")
        assert first == (tmp_path / name).read_bytes()
        assert b"<svg" in first
