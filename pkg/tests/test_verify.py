import csv
import io
import json
import math

import numpy as np
import pytest

from rmt_smin import profile as P, verify as V
from rmt_smin.profile import stats


def gauss_ball(t):
    """P{|g| <= t} for a standard real Gaussian."""
    return math.erf(t / math.sqrt(2))


def test_main_theorem_guard_zero_profile():
    with pytest.raises(V.HypothesisError, match="non-zero"):
        V.check_main_theorem(P.VarianceProfile(np.zeros((4, 4))), "real_gaussian", 1.0, 0.1, 1.0, 2, 0)


def test_main_theorem_guard_names_inequality():
    prof = P.periodic_band(50, 5)
    with pytest.raises(V.HypothesisError, match="sigma\\* n"):
        V.check_main_theorem(prof, "real_gaussian", 0.5, 0.1, 1.0, 2, 0)
    # |z| = 2.5 passes n^(2 kappa) = 2.19 but not sigma/R = sqrt(11) with R = 1
    with pytest.raises(V.HypothesisError, match="sigma / R"):
        V.check_main_theorem(prof, "real_gaussian", 2.5, 0.1, 1.0, 2, 0)


def test_main_theorem_diagonal():
    n, kappa = 100, 0.1
    prof = P.diagonal(n)
    z = n ** (2 * kappa)
    rep = V.check_main_theorem(prof, "real_gaussian", z, kappa, 1.0, 30, 3)
    assert rep.violations == 0 and rep.passed
    assert rep.summary["threshold"] == pytest.approx(z * math.exp(-(n ** 1.3) / z ** 2))
    assert rep.summary["single_exponent_eps"] == pytest.approx(0.2)
    assert len(rep.per_trial) == 30


def test_report_reproducible_and_jobs_invariant():
    prof = P.periodic_band(60, 8)
    z = stats(prof).sigma
    a = V.check_main_theorem(prof, "real_gaussian", z, 0.1, 1.0, 6, 11, jobs=1)
    b = V.check_main_theorem(prof, "real_gaussian", z, 0.1, 1.0, 6, 11, jobs=2)
    assert a.to_json() == b.to_json()
    assert a.to_csv() == b.to_csv()
    assert "runtime_seconds" not in json.loads(a.to_json())
    rows = list(csv.DictReader(io.StringIO(a.to_csv())))
    assert len(rows) == 6 and set(rows[0]) >= {"trial", "smin", "threshold", "pass"}
    assert a.violations == sum(not r["pass"] for r in a.per_trial)


def test_optimality_small():
    rep = V.check_optimality_example(16, 4, 40, 5)
    assert rep.summary["z"] == 0.5
    assert rep.summary["threshold"] == pytest.approx(0.0625)
    assert rep.violations == 0
    for r in rep.per_trial:
        if r["growth_event"]:
            assert r["smin"] <= 0.0625 and r["rayleigh"] <= 0.0625


def test_optimality_witness_residual_is_abs_z():
    # only the last block row survives, so ||(A - z)x|| = |z| and the quotient is |z|/||x|| <= |z|/||x_1||
    r = V._optimality_trial(0, 12, 3, 1)
    assert r["rayleigh"] * 2.0 ** r["x1_norm_log2"] <= math.sqrt(3) / 4 * (1 + 1e-9)


def test_optimality_guards():
    with pytest.raises(V.HypothesisError):
        V.check_optimality_example(16, 16, 2, 0)
    with pytest.raises(V.HypothesisError):
        V.check_optimality_example(10, 4, 2, 0)


def test_norm_event_fits_constant():
    rep = V.check_norm_event(P.full(40), "real_gaussian", 3, 10, 0)
    assert 0 < rep.fitted_constant < 1
    assert 0 < rep.summary["C_hat_inf2"]
    assert rep.fitted_constant == max(r["ratio"] for r in rep.per_trial)


def test_norm_event_single_entry_reduction():
    # with a single nonzero entry every pair reduces to |A_ij| / (V_ij log^{5/2} n)
    Vm = np.zeros((5, 5))
    Vm[2, 3] = 2.0
    rep = V.check_norm_event(P.VarianceProfile(Vm), "real_gaussian", 2, 5, 4)
    from rmt_smin.sampler import per_trial_stream, sample_matrix, EntryDistribution
    for r in rep.per_trial:
        A = sample_matrix(P.VarianceProfile(Vm), EntryDistribution(), per_trial_stream(4, r["trial"]))
        assert r["ratio"] == pytest.approx(abs(A[2, 3]) / (2.0 * math.log(5) ** 2.5))


def test_norm_event_zero_rows_ignored():
    Vm = np.ones((8, 8))
    Vm[:4] = 0.0
    rep = V.check_norm_event(P.VarianceProfile(Vm), "real_gaussian", 2, 10, 1)
    assert np.isfinite(rep.fitted_constant) and np.isfinite(rep.summary["C_hat_inf2"])


def test_anticoncentration_gaussian_oracle():
    rep = V.check_anticoncentration("real_gaussian", 1, 1, [0.1, 0.5], 100_000, 9)
    probs = {r["t"]: r["prob"] for r in rep.per_trial}
    assert probs[0.1] == pytest.approx(gauss_ball(0.1), abs=0.005)
    assert probs[0.5] == pytest.approx(gauss_ball(0.5), abs=0.01)


def test_anticoncentration_refuses_zero_t():
    with pytest.raises(V.HypothesisError):
        V.check_anticoncentration("real_gaussian", 1, 1, [0.0, 0.1], 10, 0)


def test_anticoncentration_far_shift_and_scale_invariance():
    from rmt_smin.sampler import EntryDistribution, per_trial_stream
    d = EntryDistribution("complex_gaussian_split")
    X = d.draw(per_trial_stream(0, 0), (20_000, 3))
    y = np.array([1.0, 2.0 - 1j, 0.5j])
    stat = X @ y / np.sqrt(np.sum(np.abs(y) ** 2))
    stat2 = X @ (2 * y) / np.sqrt(np.sum(np.abs(2 * y) ** 2))
    assert np.allclose(stat, stat2)
    assert np.mean(np.abs(stat - 10) <= 0.5) == 0.0


@pytest.mark.parametrize("kind", ["real_gaussian", "real_uniform_centered", "complex_gaussian_split"])
def test_anticoncentration_constant_finite(kind):
    rep = V.check_anticoncentration(kind, 4, 6, [0.05, 0.2, 0.5], 20_000, 1)
    assert 0 < rep.fitted_constant < 10


def test_normal_event_diagonal():
    rep = V.check_normal_event(P.diagonal(20), "real_gaussian", 2.0, 2, 50, 0)
    assert rep.violations == 0


def test_normal_event_zero_column():
    Vm = np.ones((6, 6))
    Vm[:, 2] = 0.0
    rep = V.check_normal_event(P.VarianceProfile(Vm), "real_gaussian", 1.5, 2, 60, 3)
    assert rep.violations == 0 and rep.summary["zero_denominator_cases"] > 0


def test_normal_event_requires_shift():
    with pytest.raises(V.HypothesisError):
        V.check_normal_event(P.full(4), "real_gaussian", 0, 1, 1, 0)


def test_coverage_diagonal_closed_form():
    n, trials = 4, 4000
    cov, rep = V.pseudospectrum_coverage(P.diagonal(n), "real_gaussian", [0], 0.5, trials, 2)
    # min_i |g_i| <= 0.5 fails only if every |g_i| > 0.5
    expected = 1 - (1 - gauss_ball(0.5)) ** n
    assert cov[0j] == pytest.approx(expected, abs=4 * math.sqrt(expected * (1 - expected) / trials))


def test_coverage_far_point_and_monotone():
    prof = P.full(10).scaled(1 / math.sqrt(10))
    cov, rep = V.pseudospectrum_coverage(prof, "real_gaussian", [0.3, 50], 0.05, 50, 1)
    norms = [r["norm"] for r in rep.per_trial]
    assert 50 > max(norms) + 0.05 and cov[50 + 0j] == 0.0
    cov2, _ = V.pseudospectrum_coverage(prof, "real_gaussian", [0.3, 50], 0.2, 50, 1)
    assert cov2[0.3 + 0j] >= cov[0.3 + 0j]
    with pytest.raises(V.HypothesisError):
        V.pseudospectrum_coverage(prof, "real_gaussian", [0.3], 0.0, 5, 1)


def test_default_delta():
    prof = P.periodic_band(20, 2)
    assert V.default_delta(prof, 0.2) == pytest.approx(math.exp(-(20 ** 0.2) * stats(prof).sparsity_ratio ** 2))
