"""Sampling A = V * W and the shifted matrix A - z Id with reproducible seeding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .profile import VarianceProfile

KINDS = ("real_gaussian", "real_uniform_centered", "complex_gaussian_split")

# Sup of the density of the normalized entry (real part for the complex kind).
_RHO0 = {
    "real_gaussian": 1.0 / math.sqrt(2.0 * math.pi),
    "real_uniform_centered": 1.0 / (2.0 * math.sqrt(3.0)),
    "complex_gaussian_split": 1.0 / math.sqrt(math.pi),
}
# psi_2 norms: exact for the Gaussian kinds; the uniform value uses |x| <= sqrt(3).
_K = {
    "real_gaussian": math.sqrt(8.0 / 3.0),
    "real_uniform_centered": math.sqrt(3.0 / math.log(2.0)),
    "complex_gaussian_split": math.sqrt(2.0),
}


@dataclass(frozen=True)
class EntryDistribution:
    kind: str = "real_gaussian"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution {self.kind!r}; expected one of {KINDS}")

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex_gaussian_split"

    @property
    def subgaussian_norm_hint(self) -> float:
        return _K[self.kind]

    @property
    def density_bound_hint(self) -> float:
        return _RHO0[self.kind]

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        """Centered draws with E|x|^2 = 1."""
        if self.kind == "real_gaussian":
            return rng.standard_normal(size)
        if self.kind == "real_uniform_centered":
            s3 = math.sqrt(3.0)
            return rng.uniform(-s3, s3, size)
        re = rng.standard_normal(size)
        im = rng.standard_normal(size)
        return (re + 1j * im) * math.sqrt(0.5)


def per_trial_stream(seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial, derived from (seed, trial_index) only."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class SpectralSample:
    profile: VarianceProfile
    shift: complex
    matrix: np.ndarray  # A - z Id
    seed: int
    trial: int = 0
    dist: EntryDistribution = field(default_factory=EntryDistribution)
    cached_singular_values: np.ndarray | None = None
    cached_eigenvalues: np.ndarray | None = None
    unshifted: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def A(self) -> np.ndarray:
        """The unshifted realization V * W."""
        if self.unshifted is not None:
            return self.unshifted
        return shift_matrix(self.matrix, -self.shift)

    def shifted(self, z: complex) -> SpectralSample:
        """Same realization of A with a different shift."""
        A = self.A
        return SpectralSample(self.profile, complex(z), shift_matrix(A, z), self.seed, self.trial,
                              self.dist, unshifted=A)

    def singular_values(self) -> np.ndarray:
        if self.cached_singular_values is None:
            from .linalg import singular_spectrum
            self.cached_singular_values = singular_spectrum(self.matrix).values
        return self.cached_singular_values

    def smin(self) -> float:
        return float(self.singular_values()[-1])

    def principal(self, J) -> np.ndarray:
        """(A - z Id)_J for an index collection J."""
        J = np.asarray(sorted(J), dtype=int)
        return self.matrix[np.ix_(J, J)]


def shift_matrix(A: np.ndarray, z: complex) -> np.ndarray:
    """A - z Id, keeping a real dtype when both A and z are real."""
    z = complex(z)
    dtype = A.dtype if (z.imag == 0 and not np.iscomplexobj(A)) else complex
    M = np.array(A, dtype=dtype, copy=True)
    M[np.diag_indices_from(M)] -= z if dtype == complex else z.real
    return M


def sample_matrix(profile: VarianceProfile, dist: EntryDistribution, rng: np.random.Generator) -> np.ndarray:
    n = profile.n
    W = dist.draw(rng, (n, n))
    return profile.entries * W


def sample(profile: VarianceProfile, dist: EntryDistribution | str = "real_gaussian",
           z: complex = 0.0, seed: int = 0, trial: int = 0) -> SpectralSample:
    """Draw A = V * W from the (seed, trial) stream and return A - z Id."""
    if isinstance(dist, str):
        dist = EntryDistribution(dist)
    rng = per_trial_stream(seed, trial)
    A = sample_matrix(profile, dist, rng)
    return SpectralSample(profile, complex(z), shift_matrix(A, z), int(seed), int(trial), dist,
                          unshifted=A)


def parse_z(text: str) -> complex:
    """``"re,im"`` or ``"re"`` to a complex number."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"cannot parse shift {text!r}; expected 're,im'")
