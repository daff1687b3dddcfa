"""The exact velocity-component law of an isolated N-particle system.

A single component of an N-particle velocity vector confined to the
fixed-energy sphere (total kinetic energy normalised to N) follows a
compactly supported law on [-sqrt(N), sqrt(N)] with density proportional
to (1 - x^2/N)^((N-3)/2). It has zero mean and unit variance for every
N > 3 and converges to the standard normal as N grows.

This module provides density/CDF/quantile evaluation, exact samplers for
the law and for its Gaussian alternative, likelihoods, the closed-form
Kullback-Leibler divergence to the standard normal, and the
large-deviation power proxy 1 - exp(-n * KL).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

from . import specfun
from .errors import DomainError

__all__ = ["FiniteNLaw"]


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _validate_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("evaluation points must be finite")
    return arr


@dataclass(frozen=True)
class FiniteNLaw:
    """Velocity-component law for effective particle number N > 3.

    Derived attributes are fixed at construction: the shape exponent
    ``alpha = (N - 3) / 2``, the support half-width ``sqrt(N)``, and the
    log normalising constant ``log_norm``.
    """

    N: float
    alpha: float = field(init=False)
    support_bound: float = field(init=False)
    log_norm: float = field(init=False)

    def __post_init__(self):
        N = float(self.N)
        if not math.isfinite(N) or N <= 3.0:
            raise DomainError(f"N must be a finite real > 3, got {self.N!r}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "alpha", (N - 3.0) / 2.0)
        object.__setattr__(self, "support_bound", math.sqrt(N))
        log_norm = (
            specfun.log_gamma(N / 2.0)
            - 0.5 * math.log(N * math.pi)
            - specfun.log_gamma((N - 1.0) / 2.0)
        )
        object.__setattr__(self, "log_norm", log_norm)

    # Shape parameter of the symmetric Beta obtained by y = (1 + x/sqrt(N))/2.
    @property
    def _beta_shape(self) -> float:
        return (self.N - 1.0) / 2.0

    def log_density(self, x):
        """Log density at x; -inf outside the open support."""
        arr = _validate_points(x)
        inside = 1.0 - (arr * arr) / self.N
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(
                inside > 0.0,
                self.log_norm + self.alpha * np.log(np.maximum(inside, 1e-300)),
                -np.inf,
            )
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out

    def density(self, x):
        """Density at x; zero outside the support."""
        return np.exp(self.log_density(x))

    def cdf(self, x):
        """Distribution function, clamped to 0 / 1 outside the support."""
        arr = _validate_points(x)
        z = np.clip((1.0 + arr / self.support_bound) / 2.0, 0.0, 1.0)
        a = self._beta_shape
        out = _sp.betainc(a, a, z)
        # Pin the centre exactly; betainc is symmetric only to rounding.
        out = np.where(arr == 0.0, 0.5, out)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out

    def quantile(self, p: float) -> float:
        """Inverse CDF on (0, 1); odd-symmetric about p = 0.5."""
        p = float(p)
        if not math.isfinite(p) or not 0.0 < p < 1.0:
            raise DomainError(f"quantile requires 0 < p < 1, got {p!r}")
        if p == 0.5:
            return 0.0
        if p > 0.5:
            return -self.quantile(1.0 - p)
        a = self._beta_shape
        z = float(_sp.betaincinv(a, a, p))
        return self.support_bound * (2.0 * z - 1.0)

    def sample(self, n: int, seed) -> np.ndarray:
        """Draw n i.i.d. values via the exact symmetric-Beta construction.

        B ~ Beta((N-1)/2, (N-1)/2) mapped affinely onto the support;
        rejection-free and valid for every N > 3. Deterministic given the
        seed (an int, SeedSequence, or Generator).
        """
        n = self._validate_count(n)
        rng = _as_rng(seed)
        a = self._beta_shape
        b = rng.beta(a, a, size=n)
        return self.support_bound * (2.0 * b - 1.0)

    def sample_gaussian_alternative(self, n: int, seed) -> np.ndarray:
        """Draw n i.i.d. standard normal values (the infinite-N alternative).

        Returned in the same unrescaled units as :meth:`sample`, so the
        shared rescaling y = x / sqrt(N) applies uniformly; values may
        exceed sqrt(N).
        """
        n = self._validate_count(n)
        return _as_rng(seed).standard_normal(n)

    @staticmethod
    def _validate_count(n: int) -> int:
        if int(n) != n or n < 1:
            raise DomainError(f"sample size must be a positive integer, got {n!r}")
        return int(n)

    def log_likelihood(self, values) -> float:
        """Joint log likelihood of an i.i.d. sample; -inf if any point is
        outside the open support."""
        arr = _validate_points(values)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("log_likelihood requires a nonempty 1-D sample")
        inside = 1.0 - (arr * arr) / self.N
        if np.any(inside <= 0.0):
            return -math.inf
        return float(arr.size * self.log_norm + self.alpha * np.log(inside).sum())

    def kl_to_gaussian(self) -> float:
        """Exact Kullback-Leibler divergence to the standard normal.

        Closed form: log_norm + (1 + log 2*pi)/2 + alpha * (psi((N-1)/2)
        - psi(N/2)). Strictly positive, decreasing toward 0 as N grows.
        """
        half = self.N / 2.0
        dpsi = specfun.digamma(half - 0.5) - specfun.digamma(half)
        return self.log_norm + 0.5 * (1.0 + math.log(2.0 * math.pi)) + self.alpha * dpsi

    def typical_likelihood_ratio(self, n: int) -> float:
        """Likelihood ratio in favour of the Gaussian on a typical sample
        of size n, equal to exp(-n * KL)."""
        n = self._validate_reps(n)
        return math.exp(-n * self.kl_to_gaussian())

    def log_typical_ratio_per_obs(self) -> float:
        """Per-observation log of the typical likelihood ratio, from the
        explicit Gamma/digamma bracket (an independent route that must
        equal -KL)."""
        half = self.N / 2.0
        dpsi = specfun.digamma(half - 0.5) - specfun.digamma(half)
        return (
            0.5 * math.log(self.N / (2.0 * math.e))
            + specfun.log_gamma(half - 0.5)
            - specfun.log_gamma(half)
            - self.alpha * dpsi
        )

    def sanov_power_proxy(self, n: int) -> float:
        """Large-deviation benchmark for achievable test power at sample
        size n: 1 - exp(-n * KL). Increasing in n, decreasing in N."""
        n = self._validate_reps(n)
        return -math.expm1(-n * self.kl_to_gaussian())

    @staticmethod
    def _validate_reps(n: int) -> int:
        if int(n) != n or n < 0:
            raise DomainError(f"sample size must be a nonnegative integer, got {n!r}")
        return int(n)
