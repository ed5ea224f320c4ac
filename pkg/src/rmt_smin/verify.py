"""Monte-Carlo checks of the probabilistic statements at desk scale.

Every experiment returns a :class:`TrialReport`. Thresholds are taken
verbatim from the statements being checked; the universal constants those
statements leave unspecified are fitted (as the maximum observed ratio over
all trials, never an average) and reported.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import __version__, linalg
from .profile import VarianceProfile, block_shift, stats
from .sampler import EntryDistribution, per_trial_stream, sample, sample_matrix, shift_matrix


class HypothesisError(ValueError):
    """A run was requested outside the hypotheses of the statement it checks."""


@dataclass
class TrialReport:
    experiment: str
    n: int
    trials: int
    params: dict
    violations: int
    per_trial: list
    fitted_constant: float | None = None
    summary: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        allowed = self.summary.get("allowed_violations", 0)
        return self.violations <= allowed

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "experiment": self.experiment,
            "version": __version__,
            "n": self.n,
            "trials": self.trials,
            "params": self.params,
            "violations": self.violations,
            "fitted_constant": self.fitted_constant,
            "summary": self.summary,
            "per_trial": self.per_trial,
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(_jsonable(self.to_dict(include_runtime)), indent=2, sort_keys=False)

    def to_csv(self) -> str:
        rows = [_jsonable(r) for r in self.per_trial]
        if not rows:
            return ""
        keys = list(dict.fromkeys(k for r in rows for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in keys})
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _map(fn, items, jobs: int = 1) -> list:
    """Ordered map; results never depend on ``jobs``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _dist(dist) -> EntryDistribution:
    return dist if isinstance(dist, EntryDistribution) else EntryDistribution(dist)


# --- main theorem -------------------------------------------------------------


def main_theorem_threshold(profile: VarianceProfile, z: complex, kappa: float) -> float:
    """|z| exp(-n^(1+3 kappa) sigma*^2 / |z|^2)."""
    st = stats(profile)
    zabs = abs(z)
    n = profile.n
    return zabs * math.exp(-(n ** (1 + 3 * kappa)) * st.sigma_star ** 2 / zabs ** 2)


def single_exponent_threshold(profile: VarianceProfile, z: complex, eps: float) -> float:
    """|z| exp(-n^eps (sqrt(n) sigma*/sigma)^2), the form with a single exponent."""
    st = stats(profile)
    if st.sparsity_ratio is None:
        return 0.0
    return abs(z) * math.exp(-(profile.n ** eps) * st.sparsity_ratio ** 2)


def check_hypothesis(profile: VarianceProfile, z: complex, kappa: float, R: float) -> None:
    if profile.is_zero():
        raise HypothesisError("the random matrix must be non-zero (profile is identically zero)")
    if not 0 < kappa <= 1:
        raise HypothesisError("kappa must lie in (0, 1]")
    if R < 1:
        raise HypothesisError("R must be at least 1")
    if z == 0:
        raise HypothesisError("z must be non-zero")
    st = stats(profile)
    n = profile.n
    lhs = abs(z)
    a = st.sigma_star * n ** (2 * kappa)
    b = st.sigma / R
    if lhs < a * (1 - 1e-12):
        raise HypothesisError(f"|z| = {lhs:.6g} < sigma* n^(2 kappa) = {a:.6g}")
    if lhs < b * (1 - 1e-12):
        raise HypothesisError(f"|z| = {lhs:.6g} < sigma / R = {b:.6g}")


def _main_trial(t, profile, dist, z, seed, threshold):
    s = sample(profile, dist, z, seed, t)
    sm = s.smin()
    return {"trial": t, "smin": sm, "threshold": threshold, "pass": bool(sm >= threshold)}


def check_main_theorem(profile: VarianceProfile, dist, z: complex, kappa: float, R: float,
                       trials: int, seed: int, jobs: int = 1) -> TrialReport:
    """s_min(A - z Id) >= |z| exp(-n^(1+3 kappa) sigma*^2/|z|^2) across independent trials."""
    t0 = time.perf_counter()
    dist = _dist(dist)
    check_hypothesis(profile, z, kappa, R)
    n = profile.n
    st = stats(profile)
    thr = main_theorem_threshold(profile, z, kappa)
    records = _map(partial(_main_trial, profile=profile, dist=dist, z=z, seed=seed, threshold=thr),
                   range(trials), jobs)
    violations = sum(not r["pass"] for r in records)
    exponent = n ** (1 + 3 * kappa) * st.sigma_star ** 2 / abs(z) ** 2
    smins = np.array([r["smin"] for r in records])
    # smallest c with s_min >= |z| exp(-c * exponent) in every trial
    with np.errstate(divide="ignore"):
        fitted = float(np.max(np.log(abs(z) / smins)) / exponent) if exponent > 0 else None
    eps = 2 * kappa
    summary = {
        "threshold": thr,
        "exponent": exponent,
        "single_exponent_eps": eps,
        "single_exponent_threshold": single_exponent_threshold(profile, z, eps),
        "single_exponent_violations": int(np.sum(smins < single_exponent_threshold(profile, z, eps))),
        "violation_fraction": violations / trials if trials else 0.0,
        "allowed_fraction": 2.0 / n,
        "allowed_violations": math.ceil(trials * 2.0 / n),
        "stated_failure_probability": 2.0 / n ** 2,
        "min_smin": float(smins.min()) if trials else None,
        "median_smin": float(np.median(smins)) if trials else None,
        "sigma_star": st.sigma_star,
        "sigma": st.sigma,
        "sparsity_ratio": st.sparsity_ratio,
    }
    params = {"profile": profile.name, "dist": dist.kind, "z": complex(z), "kappa": kappa, "R": R,
              "seed": seed}
    return TrialReport("main-theorem", n, trials, params, violations, records, fitted, summary,
                       time.perf_counter() - t0)


# --- optimality example ----------------------------------------------------------


def _optimality_trial(t, n, d, seed):
    prof = block_shift(n, d)
    z = math.sqrt(d) / 4
    rng = per_trial_stream(seed, t)
    A = sample_matrix(prof, EntryDistribution("real_gaussian"), rng)
    nb = n // d
    blocks = [A[b * d:(b + 1) * d, (b + 1) * d:(b + 2) * d] for b in range(nb - 1)]
    xs = [None] * nb
    xs[-1] = np.ones(d) / math.sqrt(d)
    step_ok = []
    for ell in range(nb - 2, -1, -1):
        gx = blocks[ell] @ xs[ell + 1]
        step_ok.append(bool(np.linalg.norm(gx) >= math.sqrt(d) * np.linalg.norm(xs[ell + 1]) / 2))
        # z x_l = G_l x_{l+1} makes every block row of (A - z Id)x vanish except the last
        xs[ell] = gx / z
    x = np.concatenate(xs)
    M = shift_matrix(A, z)
    growth = bool(np.linalg.norm(xs[0]) >= 2.0 ** (nb - 1))
    rayleigh = linalg.rayleigh_upper_bound(M, x)
    thr = 2.0 ** (1 - nb) * z
    sm = linalg.smin(M)
    return {
        "trial": t,
        "growth_event": growth,
        "x1_norm_log2": float(math.log2(np.linalg.norm(xs[0]))),
        "rayleigh": rayleigh,
        "smin": sm,
        "threshold": thr,
        "rayleigh_ok": bool(rayleigh <= thr),
        "svd_ok": bool(sm <= thr),
        "pass": bool((not growth) or (sm <= thr and rayleigh <= thr)),
        "step_failures": int(sum(not s for s in step_ok)),
        "steps": len(step_ok),
    }


def check_optimality_example(n: int, d: int, trials: int, seed: int, jobs: int = 1) -> TrialReport:
    """Block-shift profile with z = sqrt(d)/4: on the growth event, s_min <= 2^(1-n/d)|z|."""
    t0 = time.perf_counter()
    if d < 1 or n % d:
        raise HypothesisError(f"d must divide n (n={n}, d={d})")
    if n // d < 2:
        raise HypothesisError("n/d must be at least 2; with one block row the profile is zero")
    z = math.sqrt(d) / 4
    records = _map(partial(_optimality_trial, n=n, d=d, seed=seed), range(trials), jobs)
    violations = sum(not r["pass"] for r in records)
    growth = sum(r["growth_event"] for r in records)
    freq = growth / trials if trials else 0.0
    steps = sum(r["steps"] for r in records)
    step_fail = sum(r["step_failures"] for r in records)
    # per-step failure probability <= 2 exp(-c d); fit c from the observed rate
    if step_fail > 0:
        c_hat = -math.log(step_fail / steps / 2) / d
        c_kind = "point_estimate"
    else:
        c_hat = -math.log(3.0 / steps / 2) / d  # rule of three upper bound on the rate
        c_kind = "lower_bound_rule_of_three"
    summary = {
        "z": z,
        "threshold": 2.0 ** (1 - n // d) * z,
        "growth_event_frequency": freq,
        "growth_events": growth,
        "implication_failures": violations,
        "rayleigh_failures_on_event": sum(r["growth_event"] and not r["rayleigh_ok"] for r in records),
        "step_failures": step_fail,
        "steps": steps,
        "c_hat": c_hat,
        "c_hat_kind": c_kind,
        "predicted_growth_frequency_lower": max(0.0, 1 - 2 * d * math.exp(-c_hat * d)),
        "allowed_violations": 0,
    }
    params = {"n": n, "d": d, "z": z, "seed": seed}
    return TrialReport("optimality", n, trials, params, violations, records, c_hat, summary,
                       time.perf_counter() - t0)


# --- uniform submatrix norms --------------------------------------------------------


def _pair_scales(E: np.ndarray, I: np.ndarray, J: np.ndarray) -> tuple[float, float]:
    sub = E[np.ix_(I, J)]
    rows = sub.sum(axis=1)
    cols = sub.sum(axis=0)
    a = math.sqrt(max(rows.max(), cols.max()))
    b = math.sqrt(rows.max())
    return a, b


def _candidate_pairs(A: np.ndarray, E: np.ndarray, rng, samples: int) -> list:
    n = A.shape[0]
    absA = np.abs(A)
    full = np.arange(n)
    pairs = [("full", full, full)]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(E > 0, absA / np.sqrt(E), 0.0)
    i, j = np.unravel_index(int(np.argmax(z)), z.shape)
    pairs.append(("max_entry", np.array([i]), np.array([j])))
    rn = np.linalg.norm(A, axis=1)
    cn = np.linalg.norm(A, axis=0)
    pairs.append(("heaviest_row", np.array([int(np.argmax(rn))]), full))
    pairs.append(("heaviest_col", full, np.array([int(np.argmax(cn))])))
    ro = np.argsort(-rn, kind="stable")
    co = np.argsort(-cn, kind="stable")
    k = 2
    while k < n:
        pairs.append((f"greedy_rows_{k}", np.sort(ro[:k]), full))
        pairs.append((f"greedy_cols_{k}", full, np.sort(co[:k])))
        pairs.append((f"greedy_both_{k}", np.sort(ro[:k]), np.sort(co[:k])))
        k *= 2
    for s in range(samples):
        ki = int(round(math.exp(rng.uniform(0, math.log(n)))))
        kj = int(round(math.exp(rng.uniform(0, math.log(n)))))
        I = np.sort(rng.choice(n, size=max(1, ki), replace=False))
        J = np.sort(rng.choice(n, size=max(1, kj), replace=False))
        pairs.append((f"random_{s}", I, J))
    return pairs


def _norm_trial(t, profile, dist, seed, samples, inf2_samples):
    rng = per_trial_stream(seed, t)
    A = sample_matrix(profile, dist, rng)
    E = profile.entries ** 2
    n = profile.n
    logn = math.log(n)
    aux = np.random.default_rng(rng.integers(2**63))
    best = (0.0, None)
    best2 = (0.0, None)
    exceed = 0
    for name, I, J in _candidate_pairs(A, E, aux, samples):
        a, b = _pair_scales(E, I, J)
        if a == 0:
            continue  # A_{I,J} vanishes identically
        sub = A[np.ix_(I, J)]
        r = linalg.spectral_norm(sub) / (a * logn ** 2.5)
        if r > 1:
            exceed += 1
        if r > best[0]:
            best = (r, name)
        if b > 0:
            mode = "exact" if len(J) <= 12 else "randomized"
            inf2 = linalg.inf_to_2_norm(sub, mode=mode, samples=inf2_samples, rng=aux)
            r2 = inf2 / (math.sqrt(max(len(I), len(J)) * logn) * b)
            if r2 > best2[0]:
                best2 = (r2, name)
    return {"trial": t, "ratio": best[0], "argmax_pair": best[1], "ratio_inf2": best2[0],
            "argmax_pair_inf2": best2[1], "pairs_exceeding_C1": exceed, "pass": exceed == 0}


def check_norm_event(profile: VarianceProfile, dist, trials: int, submatrix_samples: int, seed: int,
                     inf2_samples: int = 256, jobs: int = 1) -> TrialReport:
    """Fit C in ||A_IJ|| <= C max(row/col expected norms) log^(5/2) n over random and adversarial pairs.

    The second fitted constant is for the infinity-to-two bound
    ||A_IJ||_{inf->2} <= C sqrt(max(|I|,|J|) log n) max_i sqrt(E||row_i||^2),
    evaluated with certified lower bounds of the norm (exact when |J| <= 12).
    """
    t0 = time.perf_counter()
    dist = _dist(dist)
    records = _map(partial(_norm_trial, profile=profile, dist=dist, seed=seed, samples=submatrix_samples,
                           inf2_samples=inf2_samples), range(trials), jobs)
    c_hat = max((r["ratio"] for r in records), default=0.0)
    c_inf2 = max((r["ratio_inf2"] for r in records), default=0.0)
    violations = sum(not r["pass"] for r in records)
    summary = {
        "C_hat": c_hat,
        "C_hat_inf2": c_inf2,
        "log_factor": math.log(profile.n) ** 2.5,
        "trials_where_C1_fails": violations,
        "allowed_violations": trials,  # informational: C is fitted, not asserted
    }
    params = {"profile": profile.name, "dist": dist.kind, "submatrix_samples": submatrix_samples,
              "inf2_samples": inf2_samples, "seed": seed}
    return TrialReport("norm-event", profile.n, trials, params, violations, records, c_hat, summary,
                       time.perf_counter() - t0)


# --- anti-concentration -----------------------------------------------------------


def _anticoncentration_case(k, dist, m, t_grid, trials, seed):
    rng = per_trial_stream(seed, k)
    if k == 0:
        y = np.ones(m)
        s = 0.0 + 0.0j
    elif k % 2 == 1:
        y = rng.standard_normal(m)
        s = complex(rng.normal(0, 0.5), 0.0)
    else:
        y = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        s = complex(rng.normal(0, 0.5), rng.normal(0, 0.5))
    X = dist.draw(rng, (trials, m))
    # E|X_i|^2 = 1 for every kind
    stat = (X @ y) / math.sqrt(float(np.sum(np.abs(y) ** 2)))
    dev = np.abs(stat - s)
    rho0 = dist.density_bound_hint
    out = []
    for t in t_grid:
        p = float(np.mean(dev <= t))
        out.append({"case": k, "y_real": bool(np.isrealobj(y)), "s": complex(s), "t": float(t), "prob": p,
                    "ratio": p / (rho0 * t)})
    return out


def check_anticoncentration(dist, m: int, y_samples: int, t_grid, trials: int, seed: int,
                            jobs: int = 1) -> TrialReport:
    """Estimate P{|<y,X>/sqrt(sum |y_i|^2 E|X_i|^2) - s| <= t} and fit C in C rho0 t.

    Case 0 is always y = (1, ..., 1), s = 0; odd cases draw real y and real s,
    even cases complex y and s.
    """
    t0 = time.perf_counter()
    dist = _dist(dist)
    t_grid = [float(t) for t in t_grid]
    if not t_grid or any(t <= 0 for t in t_grid):
        raise HypothesisError("t grid must be non-empty and strictly positive (the bound is trivial at t = 0)")
    groups = _map(partial(_anticoncentration_case, dist=dist, m=m, t_grid=t_grid, trials=trials, seed=seed),
                  range(y_samples), jobs)
    records = [r for g in groups for r in g]
    c_hat = max(r["ratio"] for r in records)
    summary = {"C_hat": c_hat, "rho0": dist.density_bound_hint, "allowed_violations": 0}
    params = {"dist": dist.kind, "m": m, "y_samples": y_samples, "t_grid": t_grid, "seed": seed}
    return TrialReport("anticoncentration", m, trials, params, 0, records, c_hat, summary,
                       time.perf_counter() - t0)


# --- normal vector good event ----------------------------------------------------------


def _normal_trial(t, profile, dist, z, seed, subset_samples):
    s = sample(profile, dist, z, seed, t)
    n = profile.n
    A = s.A
    V = profile.entries
    aux = np.random.default_rng(per_trial_stream(seed, t).integers(2**63, size=2))
    violations = 0
    zero_den = 0
    worst = 0.0
    for _ in range(subset_samples):
        size = int(aux.integers(2, n + 1))
        J = tuple(sorted(int(x) for x in aux.choice(n, size=size, replace=False)))
        j = J[int(aux.integers(size))]
        pos = J.index(j)
        nv = linalg.normal_vector_of(s.principal(J), pos, subset=J)
        idx = np.asarray(J)
        lhs = abs(linalg.bilinear(nv.components, A[idx, j]))
        den = nv.weighted_norm(V[idx, j])
        if den == 0:
            zero_den += 1
            if lhs > linalg.DEFAULT_TOL * max(1.0, float(np.abs(A[idx, j]).max(initial=0.0))):
                violations += 1
            continue
        ratio = lhs / (n * den)
        worst = max(worst, ratio)
        if ratio > 1:
            violations += 1
    return {"trial": t, "samples": subset_samples, "violations": violations, "zero_denominator": zero_den,
            "worst_ratio": worst, "pass": violations == 0}


def check_normal_event(profile: VarianceProfile, dist, z: complex, trials: int, subset_samples: int, seed: int,
                       jobs: int = 1) -> TrialReport:
    """|<n_{J,j}, col_j(A_J)>| <= n sqrt(sum_k |n_k|^2 V_kj^2) over sampled (J, j)."""
    t0 = time.perf_counter()
    if z == 0:
        raise HypothesisError("z must be non-zero")
    dist = _dist(dist)
    records = _map(partial(_normal_trial, profile=profile, dist=dist, z=z, seed=seed,
                           subset_samples=subset_samples), range(trials), jobs)
    violations = sum(r["violations"] for r in records)
    worst = max((r["worst_ratio"] for r in records), default=0.0)
    summary = {"pairs_checked": trials * subset_samples, "worst_ratio": worst,
               "zero_denominator_cases": sum(r["zero_denominator"] for r in records),
               "allowed_violations": 0}
    params = {"profile": profile.name, "dist": dist.kind, "z": complex(z), "subset_samples": subset_samples,
              "seed": seed}
    return TrialReport("normal-event", profile.n, trials, params, violations, records, worst, summary,
                       time.perf_counter() - t0)


# --- pseudospectrum coverage ---------------------------------------------------------


def default_delta(profile: VarianceProfile, eps: float) -> float:
    """exp(-n^eps (sqrt(n) sigma*/sigma)^2)."""
    st = stats(profile)
    if st.sparsity_ratio is None:
        raise HypothesisError("sparsity ratio undefined for the zero profile")
    return math.exp(-(profile.n ** eps) * st.sparsity_ratio ** 2)


def _coverage_trial(t, profile, dist, grid, seed):
    rng = per_trial_stream(seed, t)
    A = sample_matrix(profile, dist, rng)
    return {"trial": t, "norm": linalg.spectral_norm(A),
            "smin": [linalg.smin(shift_matrix(A, z)) for z in grid]}


def pseudospectrum_coverage(profile: VarianceProfile, dist, grid, delta_n: float, trials: int, seed: int,
                            jobs: int = 1) -> tuple[dict, TrialReport]:
    """Fraction of trials with s_min(A - z Id) <= delta_n, for each z in ``grid``."""
    t0 = time.perf_counter()
    if delta_n <= 0:
        raise HypothesisError("delta_n must be positive")
    grid = [complex(z) for z in grid]
    dist = _dist(dist)
    raw = _map(partial(_coverage_trial, profile=profile, dist=dist, grid=grid, seed=seed), range(trials), jobs)
    S = np.array([r["smin"] for r in raw]).reshape(trials, len(grid))
    cov = (S <= delta_n).mean(axis=0) if trials else np.zeros(len(grid))
    coverage = {z: float(c) for z, c in zip(grid, cov)}
    records = [{"trial": r["trial"], "norm": r["norm"], "min_smin": float(min(r["smin"])), "pass": True} for r in raw]
    summary = {"delta_n": delta_n, "coverage": [{"z": z, "coverage": c} for z, c in coverage.items()],
               "allowed_violations": 0}
    params = {"profile": profile.name, "dist": dist.kind, "grid": grid, "delta_n": delta_n, "seed": seed}
    report = TrialReport("coverage", profile.n, trials, params, 0, records, None, summary,
                         time.perf_counter() - t0)
    report.smin_table = S
    return coverage, report
