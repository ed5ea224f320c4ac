"""Variance profiles: the deterministic matrix V of entry standard deviations.

A random matrix in this package is always ``A = V * W`` (entrywise), where
``W`` has independent centered entries of unit absolute second moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FAMILIES = ("full", "diagonal", "periodic_band", "lower_triangular", "masked", "block_shift")
_ALIASES = {"band": "periodic_band", "ones": "full", "identity": "diagonal", "lower": "lower_triangular"}


@dataclass(frozen=True)
class VarianceProfile:
    entries: np.ndarray
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"profile must be a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("profile entries must be finite")
        if np.any(arr < 0):
            raise ValueError("profile entries must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VarianceProfile):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.n, self.entries.tobytes()))

    def scaled(self, factor: float) -> VarianceProfile:
        return VarianceProfile(self.entries * factor, name=f"{self.name}*{factor:g}")

    def submatrix(self, J) -> np.ndarray:
        J = np.asarray(sorted(J), dtype=int)
        return self.entries[np.ix_(J, J)]

    def is_zero(self) -> bool:
        return not np.any(self.entries)


@dataclass(frozen=True)
class ProfileStats:
    sigma_star: float
    sigma: float
    sparsity_ratio: float | None  # None when sigma == 0

    @property
    def ratio_defined(self) -> bool:
        return self.sparsity_ratio is not None


def stats(profile: VarianceProfile) -> ProfileStats:
    """Max entry, max row/column Euclidean norm, and sqrt(n)*sigma_star/sigma."""
    V = profile.entries
    sigma_star = float(V.max())
    sq = V * V
    sigma = math.sqrt(max(sq.sum(axis=0).max(), sq.sum(axis=1).max()))
    ratio = math.sqrt(profile.n) * sigma_star / sigma if sigma > 0 else None
    return ProfileStats(sigma_star, sigma, ratio)


@dataclass(frozen=True)
class ThresholdedProfile:
    base: VarianceProfile
    delta: float
    entries: np.ndarray

    def support(self, j: int, rows=None) -> np.ndarray:
        """Row indices i (restricted to ``rows`` if given) with a nonzero thresholded entry in column j."""
        col = self.entries[:, j]
        if rows is None:
            return np.flatnonzero(col)
        rows = np.asarray(rows, dtype=int)
        return rows[col[rows] != 0]


def threshold(profile: VarianceProfile, delta: float) -> ThresholdedProfile:
    """Zero out every entry that is not strictly larger than ``delta``."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    V = profile.entries
    out = np.where(V > delta, V, 0.0)
    out.setflags(write=False)
    return ThresholdedProfile(profile, float(delta), out)


# --- generators -----------------------------------------------------------


def full(n: int) -> VarianceProfile:
    return VarianceProfile(np.ones((n, n)), name=f"full(n={n})")


def diagonal(n: int) -> VarianceProfile:
    return VarianceProfile(np.eye(n), name=f"diagonal(n={n})")


def periodic_band(n: int, w: int) -> VarianceProfile:
    if w < 0 or 2 * w > n:
        raise ValueError(f"bandwidth must satisfy 0 <= w <= n/2, got w={w}, n={n}")
    i, j = np.indices((n, n))
    mask = ((i - j) % n <= w) | ((j - i) % n <= w)
    return VarianceProfile(mask.astype(float), name=f"periodic_band(n={n},w={w})")


def lower_triangular(n: int) -> VarianceProfile:
    return VarianceProfile(np.tril(np.ones((n, n))), name=f"lower_triangular(n={n})")


def masked(mask, d: int | None = None) -> VarianceProfile:
    """0/1 mask scaled by 1/sqrt(d); every row and column must have at most d ones."""
    mask = np.asarray(mask, dtype=float)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise ValueError("mask must be square")
    if not np.all((mask == 0) | (mask == 1)):
        raise ValueError("mask must be a 0/1 matrix")
    degree = int(max(mask.sum(axis=0).max(), mask.sum(axis=1).max()))
    if d is None:
        d = degree
    if d < 1:
        raise ValueError("d must be positive")
    if degree > d:
        raise ValueError(f"mask has a row or column with {degree} > d={d} ones")
    return VarianceProfile(mask / math.sqrt(d), name=f"masked(n={mask.shape[0]},d={d})")


def block_shift(n: int, d: int) -> VarianceProfile:
    """All-ones d x d blocks on the block superdiagonal, zeros elsewhere."""
    if d < 1 or n % d:
        raise ValueError(f"block_shift requires d | n, got n={n}, d={d}")
    V = np.zeros((n, n))
    for b in range(n // d - 1):
        V[b * d:(b + 1) * d, (b + 1) * d:(b + 2) * d] = 1.0
    return VarianceProfile(V, name=f"block_shift(n={n},d={d})")


def make_profile(family: str, **params) -> VarianceProfile:
    """Build a profile from a family name and its integer parameters.

    >>> make_profile("periodic_band", n=6, w=1).entries.sum(axis=0)
    array([3., 3., 3., 3., 3., 3.])
    """
    family = _ALIASES.get(family, family)
    scale = params.pop("scale", None)
    need = {"full": ("n",), "diagonal": ("n",), "periodic_band": ("n", "w"), "lower_triangular": ("n",),
            "block_shift": ("n", "d"), "masked": ("mask",)}.get(family, ())
    missing = [k for k in need if k not in params]
    if missing:
        raise ValueError(f"profile family {family!r} needs parameter(s) {', '.join(missing)}")
    if family == "full":
        prof = full(int(params["n"]))
    elif family == "diagonal":
        prof = diagonal(int(params["n"]))
    elif family == "periodic_band":
        prof = periodic_band(int(params["n"]), int(params["w"]))
    elif family == "lower_triangular":
        prof = lower_triangular(int(params["n"]))
    elif family == "block_shift":
        prof = block_shift(int(params["n"]), int(params["d"]))
    elif family == "masked":
        prof = masked(params["mask"], params.get("d"))
    else:
        raise ValueError(f"unknown profile family {family!r}; expected one of {FAMILIES}")
    if scale is not None:
        prof = VarianceProfile(prof.entries * _parse_scale(scale, prof), name=f"{prof.name}*{scale}")
    return prof


def _parse_scale(scale, prof: VarianceProfile) -> float:
    # "band_norm" divides by sqrt(2w+1)-style row norm so that sigma == 1
    if isinstance(scale, str):
        if scale in ("unit_sigma", "band_norm"):
            return 1.0 / stats(prof).sigma
        if scale == "inv_sqrt_n":
            return 1.0 / math.sqrt(prof.n)
        return float(scale)
    return float(scale)


def parse_profile_spec(spec: str) -> VarianceProfile:
    """Parse ``family:name,k=v,...`` or a path to a profile text file."""
    if spec.startswith("family:"):
        body = spec[len("family:"):]
        name, _, rest = body.partition(",")
        params = {}
        for item in filter(None, rest.split(",")):
            key, _, value = item.partition("=")
            if not _:
                raise ValueError(f"malformed profile parameter {item!r}")
            key = key.strip()
            params[key] = value.strip() if key == "scale" else int(value)
        if name in ("masked",):
            raise ValueError("masked profiles must be loaded from a file")
        return make_profile(name.strip(), **params)
    return load_profile(spec)


# --- text format ----------------------------------------------------------


def _format_complex(x: complex) -> str:
    return f"{x.real!r}{x.imag:+.17g}i"


def _parse_number(token: str):
    if token.endswith("i"):
        return complex(token[:-1] + "j")
    return float(token)


def dumps_matrix(M) -> str:
    """First line ``n``, then n whitespace-separated rows; complex entries as ``re+imi``."""
    M = np.asarray(M)
    n = M.shape[0]
    lines = [str(n)]
    cplx = np.iscomplexobj(M)
    for row in M:
        if cplx:
            lines.append(" ".join(_format_complex(complex(x)) for x in row))
        else:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    n = int(lines[0])
    rows = [[_parse_number(t) for t in ln.split()] for ln in lines[1:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"expected {n} rows of {n} entries")
    cplx = any(isinstance(x, complex) for r in rows for x in r)
    return np.array(rows, dtype=complex if cplx else float)


def save_profile(profile: VarianceProfile, path) -> None:
    Path(path).write_text(dumps_matrix(profile.entries))


def load_profile(path) -> VarianceProfile:
    arr = loads_matrix(Path(path).read_text())
    if np.iscomplexobj(arr):
        raise ValueError("a variance profile must be real")
    return VarianceProfile(arr, name=Path(path).name)
