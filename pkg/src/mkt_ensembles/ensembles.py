"""Tridiagonal random-matrix models for the three classical ensembles.

Each model is parametrized by (N, c) with inverse temperature beta = 2c/N,
plus shape parameters: alpha for the Laguerre model, (a, b) for the Jacobi
model. chi-tilde variables are chi_k / sqrt(2), i.e. chi_tilde_k^2 is
Gamma(k/2, 1); beta-distributed entries follow the bidiagonal-square
construction, so every model is symmetric tridiagonal with strictly
positive off-diagonal and the spectral weights v_k(1)^2 are the squared
first eigenvector components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng import RandomStream, sample_beta, sample_chi_tilde_sq, sample_normal
from .tridiagonal import TridiagonalMatrix

_MODELS = ("gaussian", "laguerre", "jacobi")

# floor for off-diagonal entries: exact chi-tilde draws at shape c/N underflow
# to 0.0 with visible probability; the floor keeps the Jacobi-matrix condition
# without resolvable spectral effect
_OFFDIAG_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to draw, at which size and coupling.

    beta = 2c/N is the (high-temperature) inverse temperature; c > 0 is fixed
    as N grows. alpha > 0 applies to the Laguerre model; a, b > -1 to the
    Jacobi model.
    """

    model: str
    n: int
    c: float
    alpha: float | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self) -> None:
        if self.model not in _MODELS:
            raise ParameterError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if not (self.c > 0):
            raise ParameterError("c must be > 0")
        if self.model == "laguerre":
            if self.alpha is None or not (self.alpha > 0):
                raise ParameterError("laguerre model needs alpha > 0")
        if self.model == "jacobi":
            if self.a is None or self.b is None or self.a <= -1 or self.b <= -1:
                raise ParameterError("jacobi model needs a > -1 and b > -1")

    @property
    def beta(self) -> float:
        return 2.0 * self.c / self.n


def _floor_offdiag(e: np.ndarray) -> np.ndarray:
    return np.maximum(e, _OFFDIAG_FLOOR)


def build_gaussian(spec: EnsembleSpec, stream: RandomStream) -> TridiagonalMatrix:
    """Gaussian model: N(0,1) diagonal, chi-tilde_{(N-i) beta} off-diagonal."""
    if spec.model != "gaussian":
        raise ParameterError("spec.model must be 'gaussian'")
    n, beta = spec.n, spec.beta
    diag = np.atleast_1d(sample_normal(stream, 0.0, 1.0, size=n))
    if n == 1:
        return TridiagonalMatrix(diag, np.empty(0))
    degrees = beta * np.arange(n - 1, 0, -1).astype(float)
    off_sq = sample_chi_tilde_sq(stream, degrees)
    return TridiagonalMatrix(diag, _floor_offdiag(np.sqrt(off_sq)))


def build_laguerre(spec: EnsembleSpec, stream: RandomStream) -> TridiagonalMatrix:
    """Laguerre model B B^T from the chi-tilde bidiagonal B.

    diag entries x_i ~ chi-tilde_{2 alpha + beta (N-i)}, sub-diagonal entries
    y_i ~ chi-tilde_{beta (N-i)}; then diag_1 = x_1^2,
    diag_i = x_i^2 + y_{i-1}^2 and offdiag_i = x_i y_i.
    """
    if spec.model != "laguerre":
        raise ParameterError("spec.model must be 'laguerre'")
    n, beta, alpha = spec.n, spec.beta, float(spec.alpha)
    rows = np.arange(1, n + 1, dtype=float)
    x_sq = np.atleast_1d(sample_chi_tilde_sq(stream, 2.0 * alpha + beta * (n - rows)))
    diag = x_sq.copy()
    if n == 1:
        return TridiagonalMatrix(diag, np.empty(0))
    y_sq = sample_chi_tilde_sq(stream, beta * (n - rows[:-1]))
    diag[1:] += y_sq
    offdiag = np.sqrt(x_sq[:-1] * y_sq)
    return TridiagonalMatrix(diag, _floor_offdiag(offdiag))


def build_jacobi(spec: EnsembleSpec, stream: RandomStream) -> TridiagonalMatrix:
    """Jacobi model L L^T from interlaced beta variables.

    p_n ~ Beta((N-n) beta/2 + a + 1, (N-n) beta/2 + b + 1) for n = 1..N and
    q_n ~ Beta((N-n) beta/2, (N-n-1) beta/2 + a + b + 2) for n = 1..N-1;
    with s_n = p_n (1 - q_{n-1}) and t_n = q_n (1 - p_n) the matrix has
    diag_n = s_n + t_{n-1} and offdiag_n = sqrt(s_n t_n). All eigenvalues
    lie in [0, 1].
    """
    if spec.model != "jacobi":
        raise ParameterError("spec.model must be 'jacobi'")
    n, beta = spec.n, spec.beta
    a, b = float(spec.a), float(spec.b)
    rows = np.arange(1, n + 1, dtype=float)
    half = (n - rows) * beta / 2.0
    p = np.atleast_1d(sample_beta(stream, half + a + 1.0, half + b + 1.0))
    if n == 1:
        return TridiagonalMatrix(p, np.empty(0))
    q = sample_beta(stream, half[:-1], half[1:] + a + b + 2.0)
    one_minus_q_prev = np.concatenate(([1.0], 1.0 - q))  # q_0 = 0
    s = p * one_minus_q_prev
    t = q * (1.0 - p[:-1])
    diag = s.copy()
    diag[1:] += t
    offdiag = np.sqrt(s[:-1] * t)
    return TridiagonalMatrix(diag, _floor_offdiag(offdiag))


def build_ensemble(spec: EnsembleSpec, stream: RandomStream) -> TridiagonalMatrix:
    """Dispatch on spec.model."""
    if spec.model == "gaussian":
        return build_gaussian(spec, stream)
    if spec.model == "laguerre":
        return build_laguerre(spec, stream)
    return build_jacobi(spec, stream)
