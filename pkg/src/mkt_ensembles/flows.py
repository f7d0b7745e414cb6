"""Deterministic moment flows of the mean-field eigenvalue processes.

Gaussian and Laguerre moment hierarchies close triangularly and every m_n(t)
is a polynomial in t; both are built here with exact rational coefficients
(every float parameter is an exact binary rational), so the intertwining
with the moment transform can be verified with zero residual. The Jacobi
hierarchy is not polynomial; it is integrated with fixed-step RK4 on a
stored grid. Companion flows (the transformed side) are polynomial for
Gaussian/Laguerre and an exact exponential sum for Jacobi.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError, NumericalError, ParameterError
from .measures import as_moment_array
from .mkt import mkt_exact, mkt_moments

FLOW_N_MAX = 12
_MODELS = ("gaussian", "laguerre", "jacobi")

# admissible band for Jacobi moment values during integration
_JACOBI_BAND = 1e-6


def _frac(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(float(x))


class Poly:
    """Polynomial in t with exact Fraction coefficients (ascending order)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [_frac(v) for v in coeffs] or [Fraction(0)]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        out = [Fraction(0)] * n
        for i, v in enumerate(self.coeffs):
            out[i] += v
        for i, v in enumerate(other.coeffs):
            out[i] += v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-v for v in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else Poly([other]).__neg__())

    def __rsub__(self, other):
        return Poly([other]) + (-self)

    def __mul__(self, other):
        if isinstance(other, Poly):
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, u in enumerate(self.coeffs):
                if u == 0:
                    continue
                for j, v in enumerate(other.coeffs):
                    out[i + j] += u * v
            return Poly(out)
        f = _frac(other)
        return Poly([v * f for v in self.coeffs])

    __rmul__ = __mul__

    def __truediv__(self, other):
        f = _frac(other)
        if f == 0:
            raise ZeroDivisionError("division of Poly by zero scalar")
        return Poly([v / f for v in self.coeffs])

    def integral(self) -> "Poly":
        """Antiderivative with zero constant term."""
        return Poly([Fraction(0)] + [v / (i + 1) for i, v in enumerate(self.coeffs)])

    def __call__(self, t):
        if isinstance(t, Rational):
            acc = Fraction(0)
            for v in reversed(self.coeffs):
                acc = acc * t + v
            return acc
        acc = 0.0
        tf = float(t)
        for v in reversed(self.coeffs):
            acc = acc * tf + float(v)
        return acc

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"


@dataclass(frozen=True)
class FlowSpec:
    """Parameters of a moment flow: which model, coupling c, noise scale,
    model shape parameters, initial moments, order cap, and time horizon."""

    model: str
    c: float
    init: object
    n_max: int
    horizon: float
    sigma: float = 1.0
    alpha: float | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self) -> None:
        if self.model not in _MODELS:
            raise ParameterError(f"model must be one of {_MODELS}")
        if not (self.c > 0):
            raise ParameterError("c must be > 0")
        if not (1 <= self.n_max <= FLOW_N_MAX):
            raise ParameterError(f"n_max must be in [1, {FLOW_N_MAX}]")
        if not (self.horizon > 0):
            raise ParameterError("horizon must be > 0")
        if self.model == "jacobi":
            if self.sigma != 1.0:
                raise ParameterError("the jacobi flow has no sigma parameter")
            if self.a is None or self.b is None or self.a <= -1 or self.b <= -1:
                raise ParameterError("jacobi flow needs a > -1 and b > -1")
        else:
            if not (self.sigma > 0):
                raise ParameterError("sigma must be > 0")
        if self.model == "laguerre" and (self.alpha is None or not (self.alpha > 0)):
            raise ParameterError("laguerre flow needs alpha > 0")
        arr = as_moment_array(self.init)
        if arr.size < self.n_max + 1:
            raise ParameterError("init must provide moments up to n_max")

    def init_values(self) -> np.ndarray:
        return as_moment_array(self.init)[: self.n_max + 1]


class MomentFlow:
    """Common evaluation interface: moments(t) -> array of m_0..m_n_max."""

    n_max: int
    horizon: float

    def moments(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def table(self, ts) -> np.ndarray:
        return np.array([self.moments(t) for t in np.asarray(ts, dtype=float)])


class PolyFlow(MomentFlow):
    """Flow whose moments are exact polynomials in t."""

    def __init__(self, polys: list[Poly], horizon: float):
        self.polys = list(polys)
        self.n_max = len(self.polys) - 1
        self.horizon = float(horizon)

    def _check_t(self, t: float) -> None:
        if not (0.0 <= float(t) <= self.horizon * (1 + 1e-12)):
            raise DomainError(f"t must lie in [0, {self.horizon}]")

    def moments(self, t: float) -> np.ndarray:
        self._check_t(t)
        return np.array([p(float(t)) for p in self.polys])

    def moments_exact(self, t) -> list[Fraction]:
        self._check_t(float(t))
        tf = _frac(t)
        return [p(tf) for p in self.polys]


class GridFlow(MomentFlow):
    """Flow stored on a fixed time grid (linear interpolation off-grid)."""

    def __init__(self, times: np.ndarray, values: np.ndarray):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.values.shape[0] != self.times.size:
            raise ParameterError("times and values must align")
        self.n_max = self.values.shape[1] - 1
        self.horizon = float(self.times[-1])

    def moments(self, t: float) -> np.ndarray:
        t = float(t)
        if not (self.times[0] - 1e-12 <= t <= self.horizon + 1e-12):
            raise DomainError(f"t must lie in [{self.times[0]}, {self.horizon}]")
        i = int(np.searchsorted(self.times, t))
        for j in (i - 1, i, i + 1):
            if 0 <= j < self.times.size and abs(self.times[j] - t) <= 1e-9:
                return self.values[j].copy()
        i = min(max(i, 1), self.times.size - 1)
        t0, t1 = self.times[i - 1], self.times[i]
        w = (t - t0) / (t1 - t0)
        return (1 - w) * self.values[i - 1] + w * self.values[i]


class ExpFlow(MomentFlow):
    """Flow of the form h_n(t) = sum_k coefs[n, k] exp(-rates[k] t)."""

    def __init__(self, rates: np.ndarray, coefs: np.ndarray, horizon: float):
        self.rates = np.asarray(rates, dtype=float)
        self.coefs = np.asarray(coefs, dtype=float)
        self.n_max = self.coefs.shape[0] - 1
        self.horizon = float(horizon)

    def moments(self, t: float) -> np.ndarray:
        t = float(t)
        if not (0.0 <= t <= self.horizon * (1 + 1e-12)):
            raise DomainError(f"t must lie in [0, {self.horizon}]")
        return self.coefs @ np.exp(-self.rates * t)


def gaussian_flow(spec: FlowSpec) -> PolyFlow:
    """Closed triangular Gaussian hierarchy, exact in t:

    m_n(t) = a_n + sigma^2 (c n / 2) sum_{j=0}^{n-2} int_0^t m_j m_{n-2-j}
                 + sigma^2 (n (n-1) / 2) int_0^t m_{n-2}.
    """
    if spec.model != "gaussian":
        raise ParameterError("spec.model must be 'gaussian'")
    a = [_frac(v) for v in spec.init_values()]
    c = _frac(spec.c)
    s2 = _frac(spec.sigma) ** 2
    m: list[Poly] = [Poly([1])]
    for n in range(1, spec.n_max + 1):
        pn = Poly([a[n]])
        if n >= 2:
            inter = Poly([0])
            for j in range(0, n - 1):
                inter = inter + m[j] * m[n - 2 - j]
            pn = pn + s2 * Fraction(n, 2) * c * inter.integral()
            pn = pn + s2 * Fraction(n * (n - 1), 2) * m[n - 2].integral()
        m.append(pn)
    return PolyFlow(m, spec.horizon)


def laguerre_flow(spec: FlowSpec) -> PolyFlow:
    """Closed triangular Laguerre hierarchy, exact in t:

    m_n(t) = a_n + sigma n (n + alpha - 1) int_0^t m_{n-1}
                 + sigma c n sum_{j=0}^{n-1} int_0^t m_j m_{n-1-j}.
    """
    if spec.model != "laguerre":
        raise ParameterError("spec.model must be 'laguerre'")
    a = [_frac(v) for v in spec.init_values()]
    c = _frac(spec.c)
    s = _frac(spec.sigma)
    alpha = _frac(spec.alpha)
    m: list[Poly] = [Poly([1])]
    for n in range(1, spec.n_max + 1):
        inter = Poly([0])
        for j in range(0, n):
            inter = inter + m[j] * m[n - 1 - j]
        pn = Poly([a[n]])
        pn = pn + s * n * (alpha + n - 1) * m[n - 1].integral()
        pn = pn + s * c * n * inter.integral()
        m.append(pn)
    return PolyFlow(m, spec.horizon)


def _jacobi_rhs(m: np.ndarray, c: float, a: float, b: float) -> np.ndarray:
    full = np.convolve(m, m)
    n = np.arange(1, m.size, dtype=float)
    conv1 = full[0 : m.size - 1]
    conv2 = full[1 : m.size] - 2.0 * m[1:]
    out = np.zeros_like(m)
    out[1:] = n * (
        -(2.0 * c + a + b + n + 1.0) * m[1:]
        + (a + n) * m[:-1]
        + c * (conv1 - conv2)
    )
    return out


def jacobi_flow(spec: FlowSpec, dt_grid: float = 1e-3) -> GridFlow:
    """Jacobi moment hierarchy integrated with fixed-step RK4.

    Any state component leaving [-1e-6, 1 + 1e-6] aborts the integration:
    the hierarchy preserves [0, 1] moments, so an excursion signals too
    coarse a step.
    """
    if spec.model != "jacobi":
        raise ParameterError("spec.model must be 'jacobi'")
    if not (0 < dt_grid <= spec.horizon):
        raise ParameterError("dt_grid must be in (0, horizon]")
    c, a, b = float(spec.c), float(spec.a), float(spec.b)
    m = spec.init_values().astype(float).copy()
    if np.any(m < -_JACOBI_BAND) or np.any(m > 1 + _JACOBI_BAND):
        raise ParameterError("jacobi init moments must lie in [0, 1]")
    n_steps = int(round(spec.horizon / dt_grid))
    times = np.linspace(0.0, n_steps * dt_grid, n_steps + 1)
    values = np.empty((n_steps + 1, m.size))
    values[0] = m
    dt = dt_grid
    for k in range(n_steps):
        k1 = _jacobi_rhs(m, c, a, b)
        k2 = _jacobi_rhs(m + 0.5 * dt * k1, c, a, b)
        k3 = _jacobi_rhs(m + 0.5 * dt * k2, c, a, b)
        k4 = _jacobi_rhs(m + dt * k3, c, a, b)
        m = m + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m[0] = 1.0
        if np.any(m < -_JACOBI_BAND) or np.any(m > 1 + _JACOBI_BAND):
            raise NumericalError(
                f"jacobi flow left [0, 1] at t = {times[k + 1]:.6g}; reduce dt_grid"
            )
        values[k + 1] = m
    return GridFlow(times, values)


def model_flow(spec: FlowSpec, dt_grid: float = 1e-3) -> MomentFlow:
    """Dispatch on spec.model."""
    if spec.model == "gaussian":
        return gaussian_flow(spec)
    if spec.model == "laguerre":
        return laguerre_flow(spec)
    return jacobi_flow(spec, dt_grid=dt_grid)


def _companion_init(init_h, n_max: int) -> list[Fraction]:
    if isinstance(init_h, (list, tuple)) and all(isinstance(v, Rational) for v in init_h):
        vals = [Fraction(v) for v in init_h]
        if len(vals) < n_max + 1:
            raise ParameterError("init_h must provide moments up to n_max")
        if vals[0] != 1:
            raise ParameterError("init_h[0] must equal 1")
        return vals[: n_max + 1]
    arr = as_moment_array(init_h)
    if arr.size < n_max + 1:
        raise ParameterError("init_h must provide moments up to n_max")
    return [_frac(v) for v in arr[: n_max + 1]]


def companion_flow(
    model: str,
    init_h,
    n_max: int,
    horizon: float,
    *,
    c: float,
    sigma: float = 1.0,
    alpha: float | None = None,
    a: float | None = None,
    b: float | None = None,
) -> MomentFlow:
    """Moment flow of the transformed (companion) one-dimensional process.

    gaussian: h_n' = (sigma^2/2) n (n-1) h_{n-2}            (polynomial in t)
    laguerre: h_n' = sigma n (alpha + c + n - 1) h_{n-1}    (polynomial in t)
    jacobi:   h_n' = n (a+c+n) h_{n-1} - n (a+b+2c+n+1) h_n (exponential sum)

    init_h may be float moments or exact Fractions (the latter keep the
    polynomial flows exact end to end).
    """
    if model not in _MODELS:
        raise ParameterError(f"model must be one of {_MODELS}")
    if not (c > 0):
        raise ParameterError("c must be > 0")
    if not (1 <= n_max <= FLOW_N_MAX):
        raise ParameterError(f"n_max must be in [1, {FLOW_N_MAX}]")
    if not (horizon > 0):
        raise ParameterError("horizon must be > 0")
    h0 = _companion_init(init_h, n_max)
    if model == "gaussian":
        if not (sigma > 0):
            raise ParameterError("sigma must be > 0")
        s2 = _frac(sigma) ** 2
        polys: list[Poly] = [Poly([1])]
        for n in range(1, n_max + 1):
            pn = Poly([h0[n]])
            if n >= 2:
                pn = pn + s2 * Fraction(n * (n - 1), 2) * polys[n - 2].integral()
            polys.append(pn)
        return PolyFlow(polys, horizon)
    if model == "laguerre":
        if alpha is None or not (alpha > 0):
            raise ParameterError("laguerre companion needs alpha > 0")
        if not (sigma > 0):
            raise ParameterError("sigma must be > 0")
        s = _frac(sigma)
        ac = _frac(alpha) + _frac(c)
        polys = [Poly([1])]
        for n in range(1, n_max + 1):
            pn = Poly([h0[n]]) + s * n * (ac + n - 1) * polys[n - 1].integral()
            polys.append(pn)
        return PolyFlow(polys, horizon)
    # jacobi: exact exponential-sum solution of the lower-triangular linear ODE
    if a is None or b is None or a <= -1 or b <= -1:
        raise ParameterError("jacobi companion needs a > -1 and b > -1")
    if sigma != 1.0:
        raise ParameterError("the jacobi companion has no sigma parameter")
    af, bf, cf = _frac(a), _frac(b), _frac(c)
    rates = [Fraction(k) * (af + bf + 2 * cf + k + 1) for k in range(n_max + 1)]
    coefs = [[Fraction(0)] * (n_max + 1) for _ in range(n_max + 1)]
    coefs[0][0] = Fraction(1)
    for n in range(1, n_max + 1):
        drive = Fraction(n) * (af + cf + n)
        acc = Fraction(0)
        for k in range(n):
            if coefs[n - 1][k] != 0:
                coefs[n][k] = drive * coefs[n - 1][k] / (rates[n] - rates[k])
                acc += coefs[n][k]
        coefs[n][n] = h0[n] - acc
    return ExpFlow(
        np.array([float(r) for r in rates]),
        np.array([[float(v) for v in row] for row in coefs]),
        horizon,
    )


@dataclass(frozen=True)
class FlowMktReport:
    """Per-(t, n) intertwining residuals |mkt(m(t))_n - h_n(t)|."""

    model: str
    c: float
    t_grid: np.ndarray
    residuals: np.ndarray
    tol: float
    passed: bool

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


def flow_mkt_check(
    spec: FlowSpec,
    t_grid,
    tol: float | None = None,
    dt_grid: float = 1e-3,
) -> FlowMktReport:
    """Verify that the transform intertwines the model flow with its companion.

    The companion is started from the transformed initial moments. For the
    polynomial flows both sides are evaluated in exact rational arithmetic,
    so the residual is exactly zero when the identity holds; the Jacobi
    route is float (RK4 on the model side) and uses the looser default
    tolerance.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ParameterError("t_grid must be a non-empty 1-d array")
    if np.any(ts < 0) or np.any(ts > spec.horizon * (1 + 1e-12)):
        raise ParameterError("t_grid must lie within [0, horizon]")
    if tol is None:
        tol = 1e-5 if spec.model == "jacobi" else 1e-9
    c_frac = _frac(spec.c)
    init_frac = [_frac(v) for v in spec.init_values()]
    h0 = mkt_exact(init_frac, c_frac)
    comp = companion_flow(
        spec.model,
        h0,
        spec.n_max,
        spec.horizon,
        c=spec.c,
        sigma=spec.sigma,
        alpha=spec.alpha,
        a=spec.a,
        b=spec.b,
    )
    residuals = np.empty((ts.size, spec.n_max + 1))
    if spec.model in ("gaussian", "laguerre"):
        flow = gaussian_flow(spec) if spec.model == "gaussian" else laguerre_flow(spec)
        assert isinstance(comp, PolyFlow)
        for i, t in enumerate(ts):
            tf = _frac(float(t))
            m_vals = flow.moments_exact(tf)
            h_model = mkt_exact(m_vals, c_frac)
            h_comp = comp.moments_exact(tf)
            residuals[i] = [abs(float(x - y)) for x, y in zip(h_model, h_comp)]
    else:
        flow = jacobi_flow(spec, dt_grid=dt_grid)
        for i, t in enumerate(ts):
            m_vals = flow.moments(float(t))
            h_model = mkt_moments(m_vals, spec.c).values
            h_comp = comp.moments(float(t))
            residuals[i] = np.abs(h_model - h_comp)
    return FlowMktReport(
        model=spec.model,
        c=float(spec.c),
        t_grid=ts,
        residuals=residuals,
        tol=float(tol),
        passed=bool(residuals.max() <= tol),
    )


def growth_envelope_check(flow: MomentFlow, lam: float, n_time: int = 513) -> float:
    """max over n >= 1 and a dense t-grid of |m_n(t)|^(1/n) / n.

    lam must be a valid envelope constant for the initial moments
    (|m_n(0)| <= (lam n)^n); for the Gaussian flow the result is bounded by
    K = sqrt(max(sigma^2 (c+1) T, 2 lam^2)).
    """
    if not (lam >= 0):
        raise ParameterError("lam must be >= 0")
    init = flow.moments(0.0)
    for n in range(1, init.size):
        if abs(init[n]) > (lam * n) ** n * (1 + 1e-12):
            raise ParameterError(f"initial moment {n} violates the (lam n)^n envelope")
    ts = np.linspace(0.0, flow.horizon, n_time)
    best = 0.0
    for t in ts:
        m = flow.moments(float(t))
        for n in range(1, m.size):
            best = max(best, abs(float(m[n])) ** (1.0 / n) / n)
    return best


def gaussian_envelope_constant(spec: FlowSpec, lam: float) -> float:
    """K = sqrt(max(sigma^2 (c+1) T, 2 lam^2)) for the Gaussian flow."""
    if spec.model != "gaussian":
        raise ParameterError("envelope constant applies to the gaussian flow")
    return float(np.sqrt(max(spec.sigma**2 * (spec.c + 1.0) * spec.horizon, 2.0 * lam**2)))
