"""Empirical spectral distributions of band matrices and singular-value comparisons.

The two-dimensional distance to the uniform disc measure is replaced by two
one-dimensional Kolmogorov distances: of |lambda| against F(r) = min(r^2, 1)
and of arg(lambda) against the uniform law on [0, 2 pi).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .profile import VarianceProfile, full, periodic_band, stats
from .sampler import per_trial_stream, sample


@dataclass
class ESDResult:
    eigenvalues: np.ndarray
    modulus_ks: float
    angular_ks: float
    n: int
    w: int | None

    def to_dict(self) -> dict:
        return {"n": self.n, "w": self.w, "modulus_ks": self.modulus_ks, "angular_ks": self.angular_ks}


@dataclass
class NuComparison:
    z: complex
    nu_distance: float
    logdet_gap: float | None
    truncation: float | None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"z": [self.z.real, self.z.imag], "nu_distance": self.nu_distance,
             "logdet_gap": self.logdet_gap, "truncation": self.truncation}
        d.update(self.extra)
        return d


# --- Kolmogorov distances ------------------------------------------------------------


def ks_statistic(samples, cdf) -> float:
    """Exact one-sample sup |F_n - F| for a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = len(x)
    if m == 0:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - F), np.max(F - (i - 1) / m)))


def disc_modulus_cdf(r):
    return np.minimum(np.asarray(r) ** 2, 1.0)


def angle_cdf(theta):
    return np.clip(np.asarray(theta) / (2 * math.pi), 0.0, 1.0)


def disc_distances(eigs) -> tuple[float, float]:
    """(modulus KS, angular KS) of a point cloud against the uniform unit disc."""
    eigs = np.asarray(eigs, dtype=complex)
    theta = np.mod(np.angle(eigs), 2 * math.pi)
    return ks_statistic(np.abs(eigs), disc_modulus_cdf), ks_statistic(theta, angle_cdf)


def uniform_disc(n: int, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    r = np.sqrt(rng.uniform(0, 1, n))
    theta = rng.uniform(0, 2 * math.pi, n)
    return r * np.exp(1j * theta)


def esd_from_eigenvalues(eigs, w: int | None = None) -> ESDResult:
    eigs = np.asarray(eigs, dtype=complex)
    mk, ak = disc_distances(eigs)
    return ESDResult(eigs, mk, ak, len(eigs), w)


def band_esd(n: int, w: int, seed: int, dist="real_gaussian", trial: int = 0) -> ESDResult:
    """Eigenvalues of B_n / sqrt(2w+1) for the periodic band profile of half-width w."""
    if not 1 <= w <= n / 2:
        raise ValueError(f"need 1 <= w <= n/2, got w={w}, n={n}")
    prof = periodic_band(n, w)
    s = sample(prof, dist, 0.0, seed, trial)
    eigs = linalg.eigenvalues(s.A / math.sqrt(2 * w + 1))
    return esd_from_eigenvalues(eigs, w)


def calibrate(n: int, runs: int = 100, seed: int = 0) -> dict:
    """Null-model calibration of the two distances on exact uniform-disc samples.

    The median of each distance over ``runs`` must sit within [0.5, 1.5] times
    sqrt(log 2 / (2n)).
    """
    scale = math.sqrt(math.log(2) / (2 * n))
    mods, angs = [], []
    for k in range(runs):
        mk, ak = disc_distances(uniform_disc(n, per_trial_stream(seed, k)))
        mods.append(mk)
        angs.append(ak)
    mm, am = float(np.median(mods)), float(np.median(angs))
    return {
        "n": n, "runs": runs, "scale": scale, "median_modulus_ks": mm, "median_angular_ks": am,
        "modulus_ratio": mm / scale, "angular_ratio": am / scale,
        "pass": bool(0.5 <= mm / scale <= 1.5 and 0.5 <= am / scale <= 1.5),
    }


# --- singular value measures -----------------------------------------------------------


def nu_distance(a, b) -> float:
    """sup_x |F_a(x) - F_b(x)| for the empirical CDFs of two samples, evaluated exactly.

    Both step functions only jump at sample points, so the sup is attained on
    the merged sample.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    x = np.concatenate([a, b])
    fa = np.searchsorted(a, x, side="right") / len(a)
    fb = np.searchsorted(b, x, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def truncated_logdet(svals, cut: float, n: int | None = None) -> float | None:
    """(1/n) sum of log s_i over s_i >= cut; None when nothing survives."""
    s = np.asarray(svals, dtype=float)
    n = len(s) if n is None else n
    keep = s[s >= cut]
    if len(keep) == 0:
        return None
    return float(np.sum(np.log(keep)) / n)


def default_truncation(profile: VarianceProfile, z: complex, eps: float) -> float:
    """|z| exp(-n^eps (sqrt(n) sigma*/sigma)^2)."""
    st = stats(profile)
    if st.sparsity_ratio is None:
        raise ValueError("sparsity ratio undefined for the zero profile")
    return abs(z) * math.exp(-(profile.n ** eps) * st.sparsity_ratio ** 2)


def gaussian_profile(n: int) -> VarianceProfile:
    """Profile of the comparison ensemble: i.i.d. entries of variance 1/n."""
    return full(n).scaled(1 / math.sqrt(n))


def compare_matrices(MA, MG, z: complex, truncation: float | None) -> NuComparison:
    """Compare two already-shifted matrices MA = A - z Id and MG = G - z Id."""
    sa = linalg.singular_spectrum(MA).values
    sg = linalg.singular_spectrum(MG).values
    dist = nu_distance(sa ** 2, sg ** 2)
    gap = None
    la = lg = None
    if truncation is not None and z != 0:
        n = len(sa)
        la = truncated_logdet(sa, truncation, n)
        lg = truncated_logdet(sg, truncation, n)
        if la is not None and lg is not None:
            gap = abs(la - lg)
    extra = {"logdet_A": la, "logdet_G": lg, "truncated_A": int(np.sum(sa < truncation)) if truncation else 0,
             "truncated_G": int(np.sum(sg < truncation)) if truncation else 0}
    return NuComparison(complex(z), dist, gap, truncation, extra)


def nu_comparison(profile: VarianceProfile, dist, z: complex, n: int | None = None, seed_pair=(0, 1),
                  eps: float | None = None, kappa: float = 0.1) -> NuComparison:
    """Squared singular values of A - z Id against those of G - z Id.

    G has i.i.d. N(0, 1/n) entries and is drawn with the same sampler, so a
    Gaussian ``profile`` with equal seeds reproduces G exactly. The log-det
    truncation uses eps = 2 kappa unless ``eps`` is given.
    """
    n = profile.n if n is None else n
    if n != profile.n:
        raise ValueError(f"n={n} does not match the profile size {profile.n}")
    seed_a, seed_g = seed_pair
    A = sample(profile, dist, z, seed_a).matrix
    G = sample(gaussian_profile(n), "real_gaussian", z, seed_g).matrix
    eps = 2 * kappa if eps is None else eps
    trunc = default_truncation(profile, z, eps) if z != 0 else None
    out = compare_matrices(A, G, z, trunc)
    out.extra["eps"] = eps
    ratio = stats(profile).sparsity_ratio
    if ratio is not None:
        # right-hand side shape n^eps (sqrt(n) sigma*/sigma)^2 log(n) nu_distance, logged without a constant
        out.extra["gap_shape_rhs"] = n ** eps * ratio ** 2 * math.log(n) * out.nu_distance
    return out


# --- exports ---------------------------------------------------------------------------------


def write_eigenvalues_csv(path, eigs) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"])
        for v in np.asarray(eigs, dtype=complex):
            w.writerow([repr(float(v.real)), repr(float(v.imag))])


def write_singular_values_csv(path, columns: dict) -> None:
    """One column per named list of singular values (descending)."""
    names = list(columns)
    cols = [np.asarray(columns[k], dtype=float) for k in names]
    rows = max(len(c) for c in cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + names)
        for i in range(rows):
            w.writerow([i] + [repr(float(c[i])) if i < len(c) else "" for c in cols])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "rmt-smin"
    return plt


def plot_spectrum_svg(path, eigs, title: str = "") -> None:
    plt = _pyplot()
    eigs = np.asarray(eigs, dtype=complex)
    fig, ax = plt.subplots(figsize=(5, 5))
    t = np.linspace(0, 2 * math.pi, 400)
    ax.plot(np.cos(t), np.sin(t), color="black", lw=1)
    ax.scatter(eigs.real, eigs.imag, s=3, alpha=0.6)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_cdf_svg(path, eigs, title: str = "") -> None:
    """Empirical CDFs of |lambda| and arg(lambda) overlaid on the disc laws."""
    plt = _pyplot()
    eigs = np.asarray(eigs, dtype=complex)
    r = np.sort(np.abs(eigs))
    th = np.sort(np.mod(np.angle(eigs), 2 * math.pi))
    y = np.arange(1, len(r) + 1) / len(r)
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 4))
    a1.step(r, y, where="post", label="empirical")
    grid = np.linspace(0, max(1.0, r[-1]), 200)
    a1.plot(grid, disc_modulus_cdf(grid), "--", label="min(r^2, 1)")
    a1.set_xlabel("|lambda|")
    a1.legend()
    a2.step(th, y, where="post", label="empirical")
    a2.plot([0, 2 * math.pi], [0, 1], "--", label="uniform")
    a2.set_xlabel("arg lambda")
    a2.legend()
    if title:
        fig.suptitle(title)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
