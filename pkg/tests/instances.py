"""Random instance generators shared by the certificate tests and the acceptance run."""

import numpy as np

from rmt_smin.certify import BlockPartition


def _scaled_block(rng, rows, cols, norm, complex_=False):
    B = rng.standard_normal((rows, cols))
    if complex_:
        B = B + 1j * rng.standard_normal((rows, cols))
    s = np.linalg.norm(B, 2)
    return B * (norm / s) if s > 0 else B


def gershgorin_instance(rng, permute=False):
    """(T, partition, eps, R) satisfying every premise of the identity-diagonal certificate."""
    k = int(rng.integers(1, 5))
    sizes = [int(s) for s in rng.integers(1, 6, size=k)]
    R = float(rng.uniform(1, 3))
    eps = float(rng.uniform(0.05, 1.0)) * 0.5 / ((4 * R) ** k * k)
    m = sum(sizes)
    off = np.cumsum([0] + sizes)
    X = np.zeros((m, m))
    for i in range(k):
        for j in range(k):
            si, sj = slice(off[i], off[i + 1]), slice(off[j], off[j + 1])
            if i == j:
                X[si, sj] = np.eye(sizes[i])
            elif j > i:
                X[si, sj] = _scaled_block(rng, sizes[i], sizes[j], R * rng.uniform(0, 1))
            else:
                X[si, sj] = _scaled_block(rng, sizes[i], sizes[j], eps * rng.uniform(0, 1))
    perm = rng.permutation(m) if permute else np.arange(m)
    T = np.empty_like(X)
    T[np.ix_(perm, perm)] = X
    return T, BlockPartition(tuple(sizes), tuple(int(p) for p in perm)), eps, R


def corollary_instance(rng):
    """(X, partition, z, eps, R) satisfying the shifted premises."""
    k = int(rng.integers(1, 5))
    sizes = [int(s) for s in rng.integers(1, 6, size=k)]
    R = float(rng.uniform(1, 3))
    eps = float(rng.uniform(0.05, 1.0)) * 0.5 / (2 * (8 * R) ** k * k)
    z = complex(rng.standard_normal(), rng.standard_normal()) * rng.uniform(0.5, 5)
    za = abs(z)
    m = sum(sizes)
    off = np.cumsum([0] + sizes)
    X = np.zeros((m, m), dtype=complex)
    for i in range(k):
        for j in range(k):
            lim = eps * za if j <= i else R * za
            X[off[i]:off[i + 1], off[j]:off[j + 1]] = _scaled_block(rng, sizes[i], sizes[j], lim * rng.uniform(0, 1), True)
    return X, BlockPartition.from_sizes(sizes), z, eps, R


def decomposition_instance(rng, n, kappa):
    """Nonnegative m x m matrix with every column sum at most n^(-2 kappa) |z|^2."""
    z_abs = float(rng.uniform(0.5, 3))
    m = int(rng.integers(1, n + 1))
    a = np.exp(rng.normal(0, 2.5, m))  # heavy-tailed row weights create several pruning levels
    b = rng.uniform(0, 1, m)
    B = np.outer(a, b) * (rng.uniform(size=(m, m)) < rng.uniform(0.05, 1))
    cap = n ** (-2 * kappa) * z_abs ** 2
    cs = B.sum(axis=0)
    scale = np.where(cs > 0, cap * rng.uniform(0.2, 1.0, m) / np.where(cs > 0, cs, 1), 0.0)
    return B * scale, z_abs


def admissible_violation(rng):
    """A Gershgorin instance with one premise broken; returns (T, partition, eps, R)."""
    T, part, eps, R = gershgorin_instance(rng)
    mode = int(rng.integers(0, 3))
    if mode == 0 and part.k > 1:
        # inflate a lower block beyond eps
        off = part.offsets()
        T = T.copy()
        T[off[1]:off[2], off[0]:off[1]] += 10 * eps + 1
    elif mode == 1:
        T = T.copy()
        T[0, 0] = 2.0
    else:
        eps = 1.0  # breaks (4R)^k eps k <= 1/2
    return T, part, eps, R


__all__ = ["gershgorin_instance", "corollary_instance", "decomposition_instance", "admissible_violation"]
