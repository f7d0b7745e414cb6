"""Symmetric tridiagonal matrices and their spectral decomposition.

The eigensolver is implicit-shift QL with Wilkinson shifts. Only the first
row of the accumulated rotation product is carried, which is exactly the
data needed for spectral weights w_k = v_k(1)^2: the work is O(N^2) with
O(N) storage instead of full eigenvector accumulation. Deflation uses a
machine-epsilon-scaled off-diagonal test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError
from .measures import AtomicMeasure

DEFAULT_MAX_SWEEPS = 50


def _ql_first_row(d, e, w, max_sweeps):
    """Implicit-shift QL on (d, e), accumulating row 1 of the rotations in w.

    d : (n,) diagonal, overwritten with eigenvalues (unsorted).
    e : (n,) off-diagonal in e[0..n-2], workspace; e[n-1] must be 0.
    w : (n,) first-row accumulator, initialized to (1, 0, ..., 0).
    Returns -1 on success, else the index that failed to converge.
    """
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return l
            # Wilkinson shift from the leading 2x2 of the active block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # rotation annihilated; retry the sweep on the shrunk block
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = w[i + 1]
                w[i + 1] = s * w[i] + c * f
                w[i] = c * w[i] - s * f
            if not underflow:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return -1


try:  # compile the kernel when numba is present; the source above stays the fallback
    from numba import njit

    _ql_kernel = njit(cache=True, nogil=True)(_ql_first_row)
except ImportError:  # pragma: no cover - numba is an install-time dependency
    _ql_kernel = _ql_first_row


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Symmetric Jacobi matrix: real diagonal, strictly positive off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ParameterError("diag must be a non-empty 1-d array")
        if e.ndim != 1 or e.size != d.size - 1:
            raise ParameterError("offdiag must have length len(diag) - 1")
        if not (np.isfinite(d).all() and np.isfinite(e).all()):
            raise ParameterError("matrix entries must be finite")
        if e.size and np.any(e <= 0):
            raise ParameterError("off-diagonal entries must be strictly positive")
        d = d.copy()
        e = e.copy()
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        a[idx, idx + 1] = self.offdiag
        a[idx + 1, idx] = self.offdiag
        return a


def tridiag_eigen(matrix: TridiagonalMatrix, max_sweeps: int = DEFAULT_MAX_SWEEPS):
    """Eigenvalues (ascending) and squared first eigenvector components.

    Returns (eigenvalues, first_components_sq); the second array sums to 1
    (renormalized to kill round-off).
    """
    n = matrix.n
    d = matrix.diag.astype(float).copy()
    e = np.zeros(n)
    e[: n - 1] = matrix.offdiag
    w = np.zeros(n)
    w[0] = 1.0
    if n > 1:
        failed = _ql_kernel(d, e, w, max_sweeps)
        if failed >= 0:
            raise NumericalError(
                f"QL iteration did not converge for eigenvalue index {failed} "
                f"after {max_sweeps} sweeps (n = {n})"
            )
    order = np.argsort(d, kind="stable")
    weights = w[order] ** 2
    weights /= weights.sum()
    return d[order], weights


def spectral_measure(matrix: TridiagonalMatrix, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> AtomicMeasure:
    """The measure sum_k v_k(1)^2 delta_{lambda_k} attached to the matrix."""
    eigs, weights = tridiag_eigen(matrix, max_sweeps=max_sweeps)
    return AtomicMeasure.from_points(eigs, weights)
