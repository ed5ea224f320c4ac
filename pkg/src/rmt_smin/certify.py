"""Computable lower bounds on smallest singular values of block matrices.

Three certificate kinds:

* ``gershgorin``: identity diagonal blocks, upper blocks of norm <= R, lower
  blocks of norm <= eps, and (4R)^k eps k <= 1/2 give s_min(T) >= eps k.
* ``corollary_shifted``: blocks of X with ||X_ij|| <= eps|z| on and below the
  diagonal, <= R|z| above, and 2(8R)^k eps k <= 1/2 give
  s_min(X - z Id) >= eps k |z|.
* ``terminal``: the shifted certificate applied to a non-empty terminal A_J
  after the row-pruning block decomposition, with eps and R measured from the
  realization.

Each premise is checked numerically with the spectral norms of the actual
blocks; a failed premise yields ``precondition_ok=False`` and a zero bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg


@dataclass(frozen=True)
class BlockPartition:
    sizes: tuple
    permutation: tuple  # position -> original index

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        perm = tuple(int(p) for p in self.permutation)
        if not sizes or any(s <= 0 for s in sizes):
            raise ValueError("block sizes must be positive and non-empty")
        if sum(sizes) != len(perm) or sorted(perm) != list(range(len(perm))):
            raise ValueError("permutation must be a bijection on range(sum(sizes))")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "permutation", perm)

    @classmethod
    def trivial(cls, m: int) -> BlockPartition:
        return cls((m,), tuple(range(m)))

    @classmethod
    def from_sizes(cls, sizes) -> BlockPartition:
        return cls(tuple(sizes), tuple(range(sum(sizes))))

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def m(self) -> int:
        return len(self.permutation)

    def offsets(self) -> list:
        return [0] + list(np.cumsum(self.sizes))

    def block_slices(self) -> list:
        o = self.offsets()
        return [slice(o[i], o[i + 1]) for i in range(self.k)]

    def block_members(self, i: int) -> tuple:
        """Original indices in block i."""
        sl = self.block_slices()[i]
        return self.permutation[sl]

    def permute(self, M) -> np.ndarray:
        p = np.asarray(self.permutation)
        return np.asarray(M)[np.ix_(p, p)]


@dataclass
class Certificate:
    kind: str
    lower_bound: float
    eps: float
    R: float
    k: int
    z_abs: float | None
    precondition_ok: bool
    failed_block: tuple | None = None
    reason: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind, "bound": self.lower_bound, "eps": self.eps, "R": self.R, "k": self.k,
            "zAbs": self.z_abs, "preconditionOk": self.precondition_ok,
        }
        if self.failed_block is not None:
            d["failedBlock"] = list(self.failed_block)
        if self.reason:
            d["reason"] = self.reason
        if self.extra:
            d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def block_norms(M, partition: BlockPartition) -> np.ndarray:
    """k x k array of spectral norms of the blocks of the permuted matrix."""
    X = partition.permute(M)
    sl = partition.block_slices()
    k = partition.k
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            out[i, j] = linalg.spectral_norm(X[sl[i], sl[j]])
    return out


def _refuse(kind, eps, R, k, z_abs, reason, block=None) -> Certificate:
    return Certificate(kind, 0.0, eps, R, k, z_abs, False, block, reason)


def gershgorin_certificate(T, partition: BlockPartition, eps: float, R: float) -> Certificate:
    """s_min(T) >= eps k for identity diagonal blocks and dominated off-diagonal blocks."""
    kind = "gershgorin"
    k = partition.k
    T = np.asarray(T)
    if T.shape != (partition.m, partition.m):
        raise ValueError(f"matrix shape {T.shape} does not match partition of size {partition.m}")
    if not (R >= 1 and 0 < eps <= 1):
        return _refuse(kind, eps, R, k, None, "requires R >= 1 and eps in (0, 1]")
    if (4 * R) ** k * eps * k > 0.5:
        return _refuse(kind, eps, R, k, None, "(4R)^k eps k > 1/2")
    X = partition.permute(T)
    sl = partition.block_slices()
    for i in range(k):
        block = X[sl[i], sl[i]]
        if not np.array_equal(block, np.eye(block.shape[0])):
            return _refuse(kind, eps, R, k, None, "diagonal block is not the identity", (i, i))
    norms = block_norms(T, partition)
    for i in range(k):
        for j in range(k):
            if j > i and norms[i, j] > R:
                return _refuse(kind, eps, R, k, None, f"||T_ij|| = {norms[i, j]:.6g} > R", (i, j))
            if j < i and norms[i, j] > eps:
                return _refuse(kind, eps, R, k, None, f"||T_ij|| = {norms[i, j]:.6g} > eps", (i, j))
    return Certificate(kind, eps * k, eps, R, k, None, True)


def corollary_certificate(X, partition: BlockPartition, z: complex, eps: float, R: float) -> Certificate:
    """s_min(X - z Id) >= eps k |z| under the shifted block premises."""
    kind = "corollary_shifted"
    k = partition.k
    X = np.asarray(X)
    if X.shape != (partition.m, partition.m):
        raise ValueError(f"matrix shape {X.shape} does not match partition of size {partition.m}")
    if z == 0:
        return _refuse(kind, eps, R, k, 0.0, "z must be non-zero")
    zabs = abs(z)
    if not (R >= 1 and 0 < eps <= 1):
        return _refuse(kind, eps, R, k, zabs, "requires R >= 1 and eps in (0, 1]")
    if 2 * (8 * R) ** k * eps * k > 0.5:
        return _refuse(kind, eps, R, k, zabs, "2(8R)^k eps k > 1/2")
    norms = block_norms(X, partition)
    for i in range(k):
        for j in range(k):
            limit = eps * zabs if j <= i else R * zabs
            if norms[i, j] > limit:
                return _refuse(kind, eps, R, k, zabs, f"||X_ij|| = {norms[i, j]:.6g} > {limit:.6g}", (i, j))
    return Certificate(kind, eps * k * zabs, eps, R, k, zabs, True)


# --- block decomposition -----------------------------------------------------


@dataclass
class Decomposition:
    partition: BlockPartition
    pruning_sets: list  # I_0 ⊃ I_1 ⊃ ... ⊃ I_k = ∅, as sorted tuples

    @property
    def k(self) -> int:
        return self.partition.k


def block_decompose(B, n: int, kappa: float, z_abs: float, full: bool = False):
    """Iterative row pruning on a matrix of expected squared entries.

    I_0 = all rows; I_l = rows of the I_{l-1} x I_{l-1} submatrix with
    expected squared norm >= n^(-kappa) |z|^2; stop at the first empty set.
    The last non-empty set goes first in the permutation, then each
    I_{l-1} minus I_l in decreasing l, so that block k holds I_0 minus I_1.
    """
    B = np.asarray(B, dtype=float)
    m = B.shape[0]
    if B.ndim != 2 or B.shape != (m, m) or m == 0:
        raise ValueError("B must be a non-empty square matrix")
    if np.any(B < 0):
        raise ValueError("B holds expected squared entries and must be nonnegative")
    col_cap = n ** (-2 * kappa) * z_abs ** 2
    colsums = B.sum(axis=0)
    if np.any(colsums > col_cap * (1 + 1e-12)):
        bad = int(np.argmax(colsums))
        raise ValueError(f"column {bad} has expected squared norm {colsums[bad]:.6g} > n^(-2 kappa)|z|^2 = {col_cap:.6g}")
    row_cut = n ** (-kappa) * z_abs ** 2
    sets = [tuple(range(m))]
    while sets[-1]:
        cur = np.asarray(sets[-1])
        rows = B[np.ix_(cur, cur)].sum(axis=1)
        sets.append(tuple(int(i) for i in cur[rows >= row_cut]))
    k = len(sets) - 1
    order = []
    sizes = []
    for level in range(k - 1, -1, -1):
        block = sorted(set(sets[level]) - set(sets[level + 1]))
        order.extend(block)
        sizes.append(len(block))
    part = BlockPartition(tuple(sizes), tuple(order))
    if full:
        return Decomposition(part, sets)
    return part


def check_decomposition(B, partition: BlockPartition, n: int, kappa: float, z_abs: float) -> dict:
    """Post-hoc checks: block count and the lower-left row-norm condition."""
    X = partition.permute(np.asarray(B, dtype=float))
    sl = partition.block_slices()
    k = partition.k
    cut = n ** (-kappa) * z_abs ** 2
    lower_ok = True
    for i in range(k):
        for j in range(i + 1):
            if np.any(X[sl[i], sl[j]].sum(axis=1) > cut * (1 + 1e-12)):
                lower_ok = False
    return {"k_bound": k <= math.floor(1 / kappa) + 1, "lower_left_rows": lower_ok}


# --- terminals ----------------------------------------------------------------


def certify_terminal(sample, J, kappa: float) -> Certificate:
    """Certificate for s_min(A_J - z Id) on a non-empty terminal J.

    The bound is the larger of two sound routes: the shifted block certificate
    with eps and R measured from the realized blocks, and the perturbation
    bound |z| - ||A_J||.
    """
    kind = "terminal"
    z = sample.shift
    if z == 0:
        raise ValueError("the shift z must be non-zero")
    J = tuple(sorted(int(x) for x in J))
    if not J:
        raise ValueError("J must be non-empty")
    n = sample.n
    zabs = abs(z)
    L2 = (n ** (-kappa) * zabs) ** 2
    Vj = sample.profile.entries[np.ix_(J, J)]
    B = Vj ** 2
    if np.any(B.sum(axis=0) > L2 * (1 + 1e-12)):
        raise ValueError("J is not a non-empty terminal: a column of V_J has squared norm above L^2")
    part = block_decompose(B, n, kappa, zabs)
    AJ = sample.A[np.ix_(J, J)]
    norms = block_norms(AJ, part) / zabs
    k = part.k
    eps_hat = float(max(norms[i, j] for i in range(k) for j in range(i + 1)))
    R_hat = float(norms.max())
    R_used = max(R_hat, 1.0)
    corollary_ok = 0 < eps_hat <= 1 and 2 * (8 * R_used) ** k * eps_hat * k <= 0.5
    corollary_bound = eps_hat * k * zabs if corollary_ok else 0.0
    norm_AJ = linalg.spectral_norm(AJ)
    # backward error of the computed norm is a few ulps times m ||A_J||; stay below the true value
    resolvent_bound = max(0.0, zabs - norm_AJ * (1 + 4 * len(J) * np.finfo(float).eps))
    bound = max(corollary_bound, resolvent_bound)
    target = n ** (-kappa / 2) * zabs
    route = "corollary" if corollary_bound >= resolvent_bound and corollary_ok else "resolvent"
    ok = corollary_ok or resolvent_bound > 0
    extra = {
        "route": route,
        "corollaryOk": corollary_ok,
        "corollaryBound": corollary_bound,
        "resolventBound": resolvent_bound,
        "target": target,
        "meetsTarget": bound >= target,
        "partition": {"sizes": list(part.sizes), "permutation": [J[p] for p in part.permutation]},
    }
    reason = None if ok else "block premises fail and ||A_J|| >= |z| on this realization"
    return Certificate(kind, bound if ok else 0.0, eps_hat, R_used, k, zabs, ok, None, reason, extra)


__all__ = [
    "BlockPartition", "Certificate", "Decomposition", "block_norms", "gershgorin_certificate",
    "corollary_certificate", "block_decompose", "check_decomposition", "certify_terminal",
]
