"""Binomial population model for the true count of a counting query.

When each of ``n`` records satisfies the query predicate independently with
probability ``p``, the true count is Binomial(n, p).  That distribution is
the prior the posterior-mean corrector starts from, and its spread relative
to the injected noise is what decides whether publishing (n, p) leaks
anything about a single answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .mechanism import PrivacyLevel

__all__ = [
    "BinomialPrior",
    "log_mass",
    "log_mass_vector",
    "sample_true_count",
    "uncertainty_widths",
]


@dataclass(frozen=True)
class BinomialPrior:
    """Binomial(n, p): n records, each matching independently with probability p."""

    n: int
    p: float

    def __post_init__(self) -> None:
        size = int(self.n)
        if size != self.n or size < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        prob = float(self.p)
        if math.isnan(prob) or not 0.0 <= prob <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "n", size)
        object.__setattr__(self, "p", prob)


@lru_cache(maxsize=128)
def _log_pmf(n: int, p: float) -> np.ndarray:
    # Cached per (n, p); read-only so callers can share the array safely.
    k = np.arange(n + 1, dtype=np.float64)
    if p == 0.0:
        out = np.full(n + 1, -np.inf)
        out[0] = 0.0
    elif p == 1.0:
        out = np.full(n + 1, -np.inf)
        out[n] = 0.0
    else:
        out = (
            gammaln(n + 1.0)
            - gammaln(k + 1.0)
            - gammaln(n - k + 1.0)
            + k * math.log(p)
            + (n - k) * math.log1p(-p)
        )
    out.flags.writeable = False
    return out


def log_mass_vector(prior: BinomialPrior) -> np.ndarray:
    """Log-probability of every count 0..n as a read-only length-(n+1) array.

    Degenerate priors are honest point masses: ``p = 0`` puts all mass at 0
    and ``p = 1`` at ``n``, with log-mass ``-inf`` elsewhere.
    """
    return _log_pmf(prior.n, prior.p)


def log_mass(prior: BinomialPrior, k: int) -> float:
    """Log-probability that exactly ``k`` of the ``n`` records match.

    Computed through log-gamma, so it stays finite (for non-degenerate
    ``p``) at any ``n`` the caller can afford to enumerate.

    Raises:
        ValueError: if ``k`` lies outside ``[0, n]``.
    """
    count = int(k)
    if count != k or not 0 <= count <= prior.n:
        raise ValueError(f"k must be an integer in [0, {prior.n}], got {k!r}")
    return float(log_mass_vector(prior)[count])


def sample_true_count(prior: BinomialPrior, rng) -> int:
    """Draw one true count as ``n`` independent Bernoulli(p) trials.

    Consumes exactly ``n`` uniforms from ``rng`` in record order, which
    keeps the draw reproducible across platforms for a given stream.

    Args:
        prior: population model.
        rng: numpy ``Generator`` (or anything whose ``random(n)`` returns
            ``n`` uniforms in [0, 1)).
    """
    return int((rng.random(prior.n) < prior.p).sum())


def uncertainty_widths(prior: BinomialPrior, level: PrivacyLevel) -> tuple[float, float]:
    """One-sigma interval widths of the prior count and of the injected noise.

    Returns ``(2*sqrt(n*p*(1-p)), 2*sqrt(2)/epsilon)``.  When the first
    number dwarfs the second, knowing the population model still leaves far
    more uncertainty about the true count than the noise adds, so releasing
    (n, p) is not what breaks privacy.
    """
    binomial_width = 2.0 * math.sqrt(prior.n * prior.p * (1.0 - prior.p))
    laplace_width = 2.0 * math.sqrt(2.0) / level.epsilon
    return binomial_width, laplace_width
