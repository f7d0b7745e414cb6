"""Reproducible random streams and the distribution samplers used by the ensembles.

A stream is identified by a (seed, stream_id) pair. Identical pairs give
bit-identical draw sequences; distinct stream_id values give statistically
independent streams backed by the same master seed, so replicas can run in
any order (or concurrently) without changing results.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

DEFAULT_SEED = 0xC0FFEE

# below this gamma shape, draws are taken in the log domain to avoid
# underflowing to exactly 0.0 (shape = c/N gets this small in practice)
_LOG_DOMAIN_SHAPE = 0.1


@dataclass
class RandomStream:
    """A named, reproducible pseudo-random substream.

    Parameters
    ----------
    seed : int
        Master seed (any non-negative integer; 64-bit values are typical).
    stream_id : int
        Substream index. Streams with different ids are independent.
    """

    seed: int = DEFAULT_SEED
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        if self.stream_id < 0:
            raise ParameterError("stream_id must be non-negative")
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.default_rng(ss)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, stream_id: int) -> "RandomStream":
        """A sibling stream with the same seed and a different id."""
        return RandomStream(self.seed, stream_id)


def sample_normal(stream: RandomStream, mean: float, variance: float, size=None):
    """Normal draws; variance = 0 returns the mean exactly."""
    if variance < 0:
        raise ParameterError("variance must be >= 0")
    if variance == 0.0:
        return np.full(size, float(mean)) if size is not None else float(mean)
    return stream.generator.normal(mean, np.sqrt(variance), size=size)


def sample_gamma(stream: RandomStream, shape, scale=1.0, size=None):
    """Gamma(shape, scale) draws, valid for arbitrarily small positive shape.

    shape and scale may be arrays (drawn elementwise). numpy's generator
    already uses the boost representation X = G * U^(1/shape) with
    G ~ Gamma(shape+1) for shape < 1, so small shapes are exact; draws may
    underflow to 0.0 when the true value is below the smallest subnormal.
    """
    if np.any(np.asarray(shape) <= 0):
        raise ParameterError("gamma shape must be > 0")
    if np.any(np.asarray(scale) <= 0):
        raise ParameterError("gamma scale must be > 0")
    return stream.generator.gamma(shape, scale, size=size)


def sample_chi_tilde_sq(stream: RandomStream, degrees, size=None):
    """Squared scaled-chi draws: chi_k/sqrt(2) squared is Gamma(k/2, 1)."""
    if np.any(np.asarray(degrees) <= 0):
        raise ParameterError("degrees must be > 0")
    return sample_gamma(stream, np.asarray(degrees, dtype=float) / 2.0, 1.0, size=size)


def sample_beta(stream: RandomStream, p, q, size=None):
    """Beta(p, q) draws; p and q may be arrays (drawn elementwise)."""
    if np.any(np.asarray(p) <= 0) or np.any(np.asarray(q) <= 0):
        raise ParameterError("beta parameters must be > 0")
    return stream.generator.beta(p, q, size=size)


def _log_gamma_draws(gen: np.random.Generator, shape: float, n: int) -> np.ndarray:
    # boost representation in the log domain: log X = log G + log(U)/shape
    g = gen.gamma(shape + 1.0, 1.0, size=n)
    u = gen.uniform(size=n)
    # U in [0, 1): a zero would give -inf, which softmax handles; G > 0 a.s.
    with np.errstate(divide="ignore"):
        return np.log(g) + np.log(u) / shape


def sample_dirichlet(stream: RandomStream, concentrations) -> np.ndarray:
    """One draw from Dirichlet(concentrations), via normalized gamma draws."""
    tau = np.asarray(concentrations, dtype=float)
    if tau.ndim != 1 or tau.size == 0:
        raise ParameterError("concentrations must be a non-empty 1-d array")
    if np.any(tau <= 0):
        raise ParameterError("concentrations must be > 0")
    gen = stream.generator
    if np.all(tau >= _LOG_DOMAIN_SHAPE):
        w = gen.gamma(tau, 1.0)
        total = w.sum()
        if total > 0:
            w /= total
            w /= w.sum()  # renormalize to kill round-off
            return w
    # log-domain route: same construction, softmax-normalized
    logs = np.empty(tau.size)
    for i, a in enumerate(tau):
        logs[i] = _log_gamma_draws(gen, float(a), 1)[0]
    logs -= logs.max()
    w = np.exp(logs)
    w /= w.sum()
    return w


def sample_dirichlet_symmetric(stream: RandomStream, n: int, parameter: float) -> np.ndarray:
    """One draw of n symmetric Dirichlet weights with common concentration."""
    if n <= 0:
        raise ParameterError("n must be >= 1")
    if parameter <= 0:
        raise ParameterError("parameter must be > 0")
    if n == 1:
        return np.ones(1)
    gen = stream.generator
    if parameter >= _LOG_DOMAIN_SHAPE:
        w = gen.gamma(parameter, 1.0, size=n)
        total = w.sum()
        if total > 0:
            w /= total
            w /= w.sum()
            return w
    logs = _log_gamma_draws(gen, parameter, n)
    logs -= logs.max()
    w = np.exp(logs)
    w /= w.sum()
    return w
