"""Atomic measures, moment sequences, and their complex-analytic transforms.

All complex logs and powers use the principal branch on the plane cut along
the negative real axis: for z = r e^{i theta} with -pi < theta < pi,
log z = log r + i theta and z^a = exp(a log z). Evaluation points are
required to satisfy Im z != 0 so arguments never touch the cut.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

# relative tie tolerance for merging atoms at coincident locations
_MERGE_RTOL = 1e-12
_WEIGHT_SUM_TOL = 1e-10


@dataclass(frozen=True)
class MomentSequence:
    """Moments (m_0, m_1, ..., m_n) of a (signed, normalized) measure; m_0 = 1."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ParameterError("moment values must form a non-empty 1-d array")
        if not np.isfinite(v).all():
            raise ParameterError("moment values must be finite")
        if abs(v[0] - 1.0) > 1e-9:
            raise ParameterError(f"m_0 must equal 1, got {v[0]!r}")
        v = v.copy()
        v[0] = 1.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, n):
        return self.values[n]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def truncated(self, n_max: int) -> "MomentSequence":
        if n_max < 0 or n_max > self.n_max:
            raise ParameterError("truncation order out of range")
        return MomentSequence(self.values[: n_max + 1])


def as_moment_array(moments) -> np.ndarray:
    """Coerce a MomentSequence or array-like to a validated float array."""
    if isinstance(moments, MomentSequence):
        return moments.values
    return MomentSequence(np.asarray(moments, dtype=float)).values


@dataclass(frozen=True)
class AtomicMeasure:
    """A finitely supported probability measure sum_i w_i delta_{a_i}.

    Locations are strictly increasing; weights are non-negative and sum to 1.
    """

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        loc = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if loc.ndim != 1 or w.ndim != 1 or loc.size != w.size or loc.size == 0:
            raise ParameterError("locations and weights must be matching non-empty 1-d arrays")
        if not (np.isfinite(loc).all() and np.isfinite(w).all()):
            raise ParameterError("locations and weights must be finite")
        if np.any(np.diff(loc) <= 0):
            raise ParameterError("locations must be strictly increasing (use from_points to sort/merge)")
        if np.any(w < -1e-15):
            raise ParameterError("weights must be non-negative")
        total = w.sum()
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ParameterError(f"weights must sum to 1 within {_WEIGHT_SUM_TOL}, got {total!r}")
        w = np.clip(w, 0.0, None) / total
        loc = loc.copy()
        loc.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_points(cls, locations, weights=None) -> "AtomicMeasure":
        """Build a measure from unsorted points, merging coincident atoms.

        Ties closer than a relative tolerance of 1e-12 are merged by weight
        addition. weights = None means uniform.
        """
        loc = np.asarray(locations, dtype=float)
        if loc.ndim != 1 or loc.size == 0:
            raise ParameterError("locations must be a non-empty 1-d array")
        if weights is None:
            w = np.full(loc.size, 1.0 / loc.size)
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != loc.shape:
                raise ParameterError("weights must match locations in shape")
        order = np.argsort(loc, kind="stable")
        loc, w = loc[order], w[order]
        out_loc = [loc[0]]
        out_w = [w[0]]
        for x, wx in zip(loc[1:], w[1:]):
            if x - out_loc[-1] <= _MERGE_RTOL * (1.0 + abs(x)):
                out_w[-1] += wx
            else:
                out_loc.append(x)
                out_w.append(wx)
        return cls(np.array(out_loc), np.array(out_w))

    @property
    def n_atoms(self) -> int:
        return self.locations.size


def empirical_measure(points) -> AtomicMeasure:
    """Uniform-weight atomic measure on the given points (ties merged)."""
    return AtomicMeasure.from_points(points)


def moments_of_measure(measure: AtomicMeasure, n_max: int) -> MomentSequence:
    """Moments m_n = sum_i w_i a_i^n for n = 0..n_max."""
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    out = np.empty(n_max + 1)
    out[0] = 1.0
    power = np.ones_like(measure.locations)
    for n in range(1, n_max + 1):
        power = power * measure.locations
        out[n] = float(measure.weights @ power)
    return MomentSequence(out)


def _require_off_axis(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0.0:
        raise DomainError("evaluation point must satisfy Im z != 0")
    return z


def gen_stieltjes(measure: AtomicMeasure, z: complex, c: float) -> complex:
    """Generalized Stieltjes transform sum_i w_i (z - a_i)^(-c), principal branch."""
    if c <= 0:
        raise ParameterError("c must be > 0")
    z = _require_off_axis(z)
    terms = np.exp(-c * np.log(z - measure.locations.astype(complex)))
    return complex(measure.weights @ terms)


def log_potential(measure: AtomicMeasure, z: complex) -> complex:
    """Logarithmic integral sum_i w_i log(z - a_i), principal branch."""
    z = _require_off_axis(z)
    return complex(measure.weights @ np.log(z - measure.locations.astype(complex)))


def hankel_min_det(moments, shifted: bool = False) -> float:
    """Smallest consecutive 2x2 Hankel determinant of a moment sequence.

    With shifted=False the windows are det [[m_n, m_{n+1}], [m_{n+1}, m_{n+2}]];
    with shifted=True the index is offset by one (sensitive to support in
    [0, inf)). Values well below 0 flag a sequence that cannot come from a
    positive measure (on the half-line, for the shifted variant).
    """
    m = as_moment_array(moments)
    s = 1 if shifted else 0
    if m.size < 3 + s:
        raise ParameterError("need at least order 2 + shift moments")
    dets = [
        m[n + s] * m[n + s + 2] - m[n + s + 1] ** 2
        for n in range(0, m.size - 2 - s)
    ]
    return float(min(dets))
