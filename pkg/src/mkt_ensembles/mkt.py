"""Moment-level Markov-Krein transform, its inverse, and related calculus.

The transform M_c maps the moments p = (p_n) of a base measure to the
moments h = (h_n) of its transformed law through the triangular recurrence

    (c)_n h_n = c * sum_{i=0}^{n-1} [(n-1)!/i!] (c)_i h_i p_{n-i},  h_0 = 1,

where (c)_n is the rising factorial. The recurrence is solved with
ratio-form coefficients (products of k/(c+k) factors), which stay bounded
for any order, and runs over exact rationals whenever the inputs are exact,
so round trips and flow intertwining checks can be made with zero residual.

An independent closed form (sum over integer compositions) is kept as a
second route for cross-validation and is never collapsed into the
recurrence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import CapabilityError, DomainError, ParameterError
from .measures import MomentSequence, as_moment_array

# float factorial/pochhammer products stay exact or near-exact up to here;
# larger orders switch to the log-gamma route
_DIRECT_PRODUCT_MAX = 20

_CLOSED_FORM_MAX = 16


def pochhammer(c, m: int):
    """Rising factorial (c)_m = c (c+1) ... (c+m-1); (c)_0 = 1.

    Exact for Fraction/int inputs. For float inputs with m > 20 and c > 0
    the log-gamma route is used to avoid long product round-off.
    """
    if m < 0:
        raise ParameterError("m must be >= 0")
    if m == 0:
        return Fraction(1) if isinstance(c, Rational) else 1.0
    if isinstance(c, Rational):
        out = Fraction(1)
        for k in range(m):
            out *= c + k
        return out
    c = float(c)
    if m <= _DIRECT_PRODUCT_MAX or c <= 0:
        out = 1.0
        for k in range(m):
            out *= c + k
        return out
    return math.exp(math.lgamma(c + m) - math.lgamma(c))


def _coef(c, n: int, i: int):
    """c * (n-1)!/i! * (c)_i / (c)_n, in ratio form (bounded for all n)."""
    num = c
    for k in range(i + 1, n):
        num = num * k
    den = c * 0 + 1
    for k in range(i, n):
        den = den * (c + k)
    return num / den


def _to_exact_c(c):
    if isinstance(c, Rational):
        if c <= 0:
            raise ParameterError("c must be > 0")
        return Fraction(c)
    c = float(c)
    if not (c > 0):
        raise ParameterError("c must be > 0")
    return Fraction(c)


def _mkt_list(p: list, c) -> list:
    h = [p[0] * 0 + 1]
    for n in range(1, len(p)):
        acc = p[0] * 0
        for i in range(n):
            acc = acc + _coef(c, n, i) * h[i] * p[n - i]
        h.append(acc)
    return h


def _imkt_list(h: list, c) -> list:
    p = [h[0] * 0 + 1]
    for n in range(1, len(h)):
        acc = h[n]
        for i in range(1, n):
            acc = acc - _coef(c, n, i) * h[i] * p[n - i]
        p.append(acc / _coef(c, n, 0))
    return p


def mkt_moments(p, c) -> MomentSequence:
    """Transformed moments h = M_c(p) via the triangular recurrence.

    Runs in floating point; the ratio-form coefficients are bounded, so the
    recurrence loses only a few ulp per order. Use mkt_exact for rational
    inputs when a zero-residual identity is required.
    """
    arr = as_moment_array(p)
    cf = float(_to_exact_c(c))
    h = _mkt_list([float(v) for v in arr], cf)
    return MomentSequence(np.array(h))


def imkt_moments(h, c) -> MomentSequence:
    """Base moments p = M_c^{-1}(h); inverse of mkt_moments.

    The leading coefficient c (n-1)!/(c)_n never vanishes for c > 0, so the
    triangular solve is always well posed. Floating point, like mkt_moments;
    imkt_exact is the rational counterpart.
    """
    arr = as_moment_array(h)
    cf = float(_to_exact_c(c))
    p = _imkt_list([float(v) for v in arr], cf)
    return MomentSequence(np.array(p))


def mkt_exact(p_values: list, c: Fraction) -> list:
    """Exact-arithmetic transform on a list of Fractions (or any ring elements
    supporting + * /, e.g. polynomials with Fraction coefficients)."""
    if isinstance(c, Rational) and c <= 0:
        raise ParameterError("c must be > 0")
    return _mkt_list(list(p_values), c)


def imkt_exact(h_values: list, c: Fraction) -> list:
    """Exact-arithmetic inverse transform (same conventions as mkt_exact)."""
    if isinstance(c, Rational) and c <= 0:
        raise ParameterError("c must be > 0")
    return _imkt_list(list(h_values), c)


def _compositions(total: int, parts: int):
    """All tuples of `parts` positive integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# composition tuples for (total, parts), frozen as index arrays so repeated
# closed-form calls do not re-enumerate
_COMP_INDEX: dict = {}


def _comp_index(total: int, parts: int) -> np.ndarray:
    key = (total, parts)
    if key not in _COMP_INDEX:
        _COMP_INDEX[key] = np.array(list(_compositions(total, parts)), dtype=np.intp)
    return _COMP_INDEX[key]


def mkt_moments_closed(p, c) -> MomentSequence:
    """Transformed moments via the composition-sum closed form.

    h_m = (m!/(c)_m) * sum_{k=1}^{m} (c^k/k!) *
          sum_{a_1+..+a_k=m, a_i>=1} prod_i p_{a_i}/a_i.

    Independent of the recurrence route; enumeration is exponential in m,
    so orders above 16 are refused. Evaluates in floating point (the
    round-off at these orders sits far below the agreement tolerances the
    two routes are compared at).
    """
    arr = as_moment_array(p)
    if arr.size - 1 > _CLOSED_FORM_MAX:
        raise CapabilityError(f"closed form supports n_max <= {_CLOSED_FORM_MAX}")
    cc = _to_exact_c(c)
    cf = float(cc)
    ratio = np.zeros(arr.size)
    ratio[1:] = arr[1:] / np.arange(1, arr.size)
    out = [1.0]
    for m in range(1, arr.size):
        total = 0.0
        for k in range(1, m + 1):
            idx = _comp_index(m, k)
            inner = float(ratio[idx].prod(axis=1).sum())
            total += cf**k / math.factorial(k) * inner
        out.append(math.factorial(m) / float(pochhammer(cc, m)) * total)
    return MomentSequence(np.array(out))


def convolve_moments(h1, h2) -> MomentSequence:
    """Moments of the classical convolution (sum of independent variables):
    out_n = sum_k C(n, k) h1_k h2_{n-k}."""
    a1 = as_moment_array(h1)
    a2 = as_moment_array(h2)
    n_max = min(a1.size, a2.size) - 1
    v1 = [Fraction(float(x)) for x in a1[: n_max + 1]]
    v2 = [Fraction(float(x)) for x in a2[: n_max + 1]]
    out = []
    for n in range(n_max + 1):
        acc = Fraction(0)
        for k in range(n + 1):
            acc += math.comb(n, k) * v1[k] * v2[n - k]
        out.append(acc)
    return MomentSequence(np.array([float(v) for v in out]))


def c_convolve(p1, p2, c) -> MomentSequence:
    """Moment sequence of the c-dependent convolution:
    imkt(convolve(mkt(p1), mkt(p2))). Whether the result is always a moment
    sequence of a positive measure is not claimed; use Hankel diagnostics."""
    h = convolve_moments(mkt_moments(p1, c), mkt_moments(p2, c))
    return imkt_moments(h, c)


def reference_moments(kind: str, n_max: int, **params) -> MomentSequence:
    """Moments of the three reference laws.

    kind = 'gaussian' (params: t > 0, variance): m_{2k} = (2k-1)!! t^k;
    kind = 'gamma' (params: theta > 0, t_scale > 0): m_n = t_scale^n (theta)_n;
    kind = 'beta' (params: p > 0, q > 0): m_n = (p)_n / (p+q)_n.
    """
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    if kind == "gaussian":
        t = params.pop("t", 1.0)
        if params:
            raise ParameterError(f"unexpected parameters {sorted(params)}")
        if not (t >= 0):
            raise ParameterError("t must be >= 0")
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        for n in range(2, n_max + 1, 2):
            out[n] = out[n - 2] * (n - 1) * t
        return MomentSequence(out)
    if kind == "gamma":
        theta = params.pop("theta")
        t_scale = params.pop("t_scale", 1.0)
        if params:
            raise ParameterError(f"unexpected parameters {sorted(params)}")
        if not (theta > 0) or not (t_scale > 0):
            raise ParameterError("gamma law needs theta > 0 and t_scale > 0")
        out = np.empty(n_max + 1)
        out[0] = 1.0
        for n in range(1, n_max + 1):
            out[n] = out[n - 1] * t_scale * (theta + n - 1)
        return MomentSequence(out)
    if kind == "beta":
        p = params.pop("p")
        q = params.pop("q")
        if params:
            raise ParameterError(f"unexpected parameters {sorted(params)}")
        if not (p > 0) or not (q > 0):
            raise ParameterError("beta law needs p > 0 and q > 0")
        out = np.empty(n_max + 1)
        out[0] = 1.0
        for n in range(1, n_max + 1):
            out[n] = out[n - 1] * (p + n - 1) / (p + q + n - 1)
        return MomentSequence(out)
    raise ParameterError(f"unknown reference law {kind!r}")


def growth_constant(seq) -> float:
    """Smallest M with |m_n| <= (M n)^n for all stored n >= 1,
    i.e. max_n |m_n|^(1/n) / n."""
    arr = as_moment_array(seq)
    if arr.size < 2:
        raise ParameterError("need at least one moment beyond m_0")
    best = 0.0
    for n in range(1, arr.size):
        v = abs(float(arr[n])) ** (1.0 / n) / n
        best = max(best, v)
    return best


@dataclass(frozen=True)
class GrowthBoundReport:
    """Fitted envelope constants for a base/transformed moment pair."""

    lambda_fit: float
    m_fit: float

    def __post_init__(self) -> None:
        if self.lambda_fit < 0 or self.m_fit < 0:
            raise ParameterError("fitted constants must be >= 0")


def growth_bound_fit(p, h) -> GrowthBoundReport:
    """Envelope constants for base moments p and transformed moments h.

    The transform inequality guarantees m_fit <= max(c, 2) * lambda_fit
    whenever h = M_c(p)."""
    return GrowthBoundReport(growth_constant(p), growth_constant(h))


def series_pair_check(p, h, c: float, z: complex, n_trunc: int | None = None) -> float:
    """Residual |phi_z + c phi psi| of the series identity linking p and h.

    phi(z) = sum (c)_n/n! h_n z^(-c-n), psi(z) = sum p_n z^(-n-1), and
    phi_z is the term-by-term derivative. Requires Im z > 0 and |z| large
    enough that the truncated tails are below the target tolerance
    (|z| >= 4 * support radius is a safe choice). Growing terms signal a
    divergent truncation and raise DomainError.
    """
    pa = as_moment_array(p)
    ha = as_moment_array(h)
    if not (c > 0):
        raise ParameterError("c must be > 0")
    z = complex(z)
    if not (z.imag > 0):
        raise DomainError("series check requires Im z > 0")
    n = min(pa.size, ha.size) - 1 if n_trunc is None else int(n_trunc)
    if n < 1 or n >= min(pa.size, ha.size):
        raise ParameterError("n_trunc out of range for the given sequences")
    z_pow_minus_c = np.exp(-c * np.log(z))
    phi = 0.0 + 0.0j
    phi_z = 0.0 + 0.0j
    phi_terms = []
    for k in range(n + 1):
        w = pochhammer(c, k) / math.factorial(k) * ha[k] * z_pow_minus_c * z ** (-k)
        phi += w
        phi_z += -(c + k) * w / z
        phi_terms.append(abs(w))
    psi = sum(pa[k] * z ** (-k - 1) for k in range(n + 1))
    if n >= 3 and phi_terms[-1] > phi_terms[-2] > phi_terms[-3] and phi_terms[-1] > 1.0:
        raise DomainError("series terms are growing; |z| too small for this truncation")
    return float(abs(phi_z + c * phi * psi))
