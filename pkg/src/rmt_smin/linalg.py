"""Dense spectral primitives.

Everything here is a thin, checked layer over LAPACK (via scipy.linalg), plus
two things LAPACK does not provide: the real infinity-to-two norm and the
bilinear normal vector of a principal submatrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

DEFAULT_TOL = 1e-10
EXACT_INF2_MAX_COLS = 20


class SolverError(RuntimeError):
    """Raised when an SVD or eigenvalue solver fails to converge."""


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    solver_tolerance: float = DEFAULT_TOL

    @property
    def smin(self) -> float:
        return float(self.values[-1]) if len(self.values) else float("inf")

    @property
    def smax(self) -> float:
        return float(self.values[0]) if len(self.values) else 0.0

    def __len__(self):
        return len(self.values)


def _check(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def singular_spectrum(M, tol: float = DEFAULT_TOL) -> SingularSpectrum:
    """All singular values in descending order (full SVD, no iteration)."""
    M = _check(M)
    if M.size == 0:
        return SingularSpectrum(np.zeros(0), tol)
    try:
        s = sla.svdvals(M, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        # gesdd occasionally fails where the slower gesvd succeeds
        try:
            s = sla.svd(M, compute_uv=False, lapack_driver="gesvd", check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            raise SolverError(f"SVD did not converge on a {M.shape} matrix") from exc
    return SingularSpectrum(np.asarray(s, dtype=float), tol)


def smin(M) -> float:
    """Smallest singular value; +inf for the empty matrix."""
    M = np.asarray(M)
    if M.size == 0:
        return float("inf")
    return singular_spectrum(M).smin


def spectral_norm(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return singular_spectrum(M).smax


def eigenvalues(M) -> np.ndarray:
    M = _check(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("eigenvalues need a square matrix")
    try:
        return sla.eigvals(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigenvalue solver did not converge on a {M.shape} matrix") from exc


def log_abs_det(M) -> float:
    """log|det M| via LU; -inf when singular."""
    sign, logdet = np.linalg.slogdet(np.asarray(M))
    return float(logdet) if sign != 0 else float("-inf")


def _sign_batches(ncols: int, batch: int = 1 << 15):
    """All sign vectors with first coordinate +1, as (batch, ncols) arrays."""
    if ncols == 0:
        yield np.zeros((1, 0))
        return
    total = 1 << (ncols - 1)
    shifts = np.arange(ncols - 1, dtype=np.int64)
    for start in range(0, total, batch):
        codes = np.arange(start, min(start + batch, total), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        signs = np.empty((len(codes), ncols))
        signs[:, 0] = 1.0
        signs[:, 1:] = 1.0 - 2.0 * bits
        yield signs


def inf_to_2_norm(M, mode: str = "exact", samples: int = 4096, rng=None) -> float:
    """sup ||Mx||_2 over real x with ||x||_inf <= 1.

    The supremum of a convex function over the cube sits at a vertex, so
    ``exact`` enumerates sign vectors (up to global sign). ``randomized``
    returns the max over ``samples`` random sign vectors followed by a greedy
    coordinate ascent, which is a certified lower bound. For complex M the
    supremum over complex unimodular x can exceed this by a factor up to 4/pi.
    """
    M = _check(M)
    m, c = M.shape
    if c == 0 or m == 0:
        return 0.0
    if mode == "exact":
        if c > EXACT_INF2_MAX_COLS:
            raise ValueError(f"exact mode enumerates 2^{c} sign vectors; at most {EXACT_INF2_MAX_COLS} columns allowed")
        best = 0.0
        for signs in _sign_batches(c):
            vals = np.linalg.norm(signs @ M.T, axis=1)
            best = max(best, float(vals.max()))
        return best
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(rng)
    S = rng.choice([-1.0, 1.0], size=(samples, c))
    vals = np.linalg.norm(S @ M.T, axis=1)
    x = S[int(np.argmax(vals))].copy()
    best = float(vals.max())
    # sign-flip ascent; every accepted step is a real vertex, so the value stays a lower bound
    G = M.conj().T @ M
    improved = True
    while improved:
        improved = False
        Gx = G @ x
        for i in range(c):
            # ||M(x - 2 x_i e_i)||^2 - ||Mx||^2 = -4 x_i Re(Gx)_i + 4 G_ii
            gain = -4.0 * x[i] * Gx[i].real + 4.0 * G[i, i].real
            if gain > 1e-12 * max(1.0, best * best):
                Gx = Gx - 2.0 * x[i] * G[:, i]
                x[i] = -x[i]
                improved = True
        best = max(best, float(np.linalg.norm(M @ x)))
    return best


def bilinear(x, y) -> complex:
    """sum_i x_i y_i, with no complex conjugation."""
    return complex(np.sum(np.asarray(x) * np.asarray(y)))


@dataclass(frozen=True)
class NormalVector:
    subset: tuple
    excluded: int
    components: np.ndarray
    residual: float  # max_k |<n, col_k>| over the annihilated columns

    def pairing(self, v) -> complex:
        return bilinear(self.components, v)

    def weighted_norm(self, weights) -> float:
        """sqrt(sum_k |n_k|^2 w_k^2)."""
        w = np.asarray(weights, dtype=float)
        return float(np.sqrt(np.sum(np.abs(self.components) ** 2 * w * w)))


def annihilator(C) -> np.ndarray:
    """Unit u with C^T u = 0 (bilinear), taken from the smallest singular direction of C^T.

    C is m x (m-1), so a non-trivial solution always exists. The phase is
    fixed so that the largest-modulus component is real and positive.
    """
    C = np.asarray(C)
    m = C.shape[0]
    if C.shape[1] == 0:
        u = np.zeros(m, dtype=C.dtype)
        u[0] = 1.0
        return u
    try:
        _, _, vh = sla.svd(C.T, full_matrices=True, check_finite=False)
    except np.linalg.LinAlgError:
        _, _, vh = sla.svd(C.T, full_matrices=True, lapack_driver="gesvd", check_finite=False)
    u = vh[-1].conj()
    k = int(np.argmax(np.abs(u)))
    u = u * (abs(u[k]) / u[k])
    if not np.iscomplexobj(C):
        u = u.real
    return u / np.linalg.norm(u)


def normal_vector_of(M, j: int, subset=None) -> NormalVector:
    """Normal vector for column position ``j`` of a square matrix M (positions are 0-based)."""
    M = np.asarray(M)
    m = M.shape[0]
    if m < 2:
        raise ValueError("normal vectors need a submatrix of size at least 2")
    if not 0 <= j < m:
        raise ValueError(f"column position {j} outside 0..{m - 1}")
    others = np.delete(M, j, axis=1)
    u = annihilator(others)
    residual = float(np.max(np.abs(u @ others))) if others.shape[1] else 0.0
    subset = tuple(range(m)) if subset is None else tuple(subset)
    return NormalVector(subset, subset[j], u, residual)


def normal_vector(sample, J, j: int) -> NormalVector:
    """Unit vector in C^J annihilating col_k(A_J - z Id) for all k in J except j."""
    J = tuple(sorted(int(x) for x in J))
    if len(J) < 2:
        raise ValueError("|J| must be at least 2")
    if j not in J:
        raise ValueError(f"index {j} is not in J")
    M = sample.principal(J)
    return normal_vector_of(M, J.index(j), subset=J)


def rayleigh_upper_bound(M, x) -> float:
    """||Mx|| / ||x||, an upper bound on s_min(M) for any nonzero x."""
    x = np.asarray(x)
    return float(np.linalg.norm(np.asarray(M) @ x) / np.linalg.norm(x))


__all__ = [
    "SingularSpectrum", "NormalVector", "SolverError", "singular_spectrum", "smin", "spectral_norm",
    "eigenvalues", "log_abs_det", "inf_to_2_norm", "bilinear", "annihilator", "normal_vector",
    "normal_vector_of", "rayleigh_upper_bound",
]
