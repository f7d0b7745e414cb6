"""Interacting-particle SDE simulation for the three eigenvalue processes.

Scheme: tamed Euler-Maruyama (drift D becomes D/(1 + dt |D|) componentwise)
with a pairwise-distance floor delta_min inside the singular denominators,
post-step sorting, and hard-boundary reflection (|x| at 0; mirror at 1 for
the Jacobi model). Coincident particles exert no force on each other (the
antisymmetric principal-value choice); noise separates them immediately.

A documented stability heuristic relates the floor to the step size
(dt <= delta_min^2 / (4 c sigma^2)); it is intentionally not enforced,
since taming plus the floor is what actually controls stability at the
default dt = 1e-3.

Replicas use independent substreams of one master seed and aggregate in a
fixed order, so results are independent of execution interleaving.
Companion (one-dimensional) processes are simulated as a single vectorized
batch of paths from one stream.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError, ParameterError
from .measures import AtomicMeasure
from .rng import RandomStream

_BLOWUP = 1e6
_REFLECT_WARN_FRACTION = 0.01

SDE_MODELS = ("dyson", "laguerre", "jacobi")
COMPANION_MODELS = ("gaussian", "laguerre", "jacobi")


@dataclass(frozen=True)
class SimConfig:
    """Particle-system simulation parameters.

    n particles, coupling c (beta = 2c/n), Euler-Maruyama step dt, time
    horizon, replica count, master seed. sigma scales the Gaussian/Laguerre
    noise; alpha (> 1/2) and (a, b > -1/2) are the drift parameters of the
    Laguerre and Jacobi models. init is None (model default), a scalar, an
    array of positions, or an AtomicMeasure (deterministic largest-remainder
    placement). store_stride overrides the default storage stride
    max(1, floor(0.01/dt)).
    """

    n: int
    c: float
    dt: float
    horizon: float
    reps: int = 1
    seed: int = 0xC0FFEE
    sigma: float = 1.0
    alpha: float | None = None
    a: float | None = None
    b: float | None = None
    delta_min: float = 1e-8
    init: object = None
    store_stride: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if not (self.c > 0):
            raise ParameterError("c must be > 0")
        if not (0 < self.dt <= self.horizon):
            raise ParameterError("dt must be in (0, horizon]")
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        if not (self.sigma > 0):
            raise ParameterError("sigma must be > 0")
        if not (self.delta_min > 0):
            raise ParameterError("delta_min must be > 0")
        if self.store_stride is not None and self.store_stride < 1:
            raise ParameterError("store_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))

    @property
    def stride(self) -> int:
        if self.store_stride is not None:
            return self.store_stride
        return max(1, int(np.floor(0.01 / self.dt)))


@dataclass(frozen=True)
class ParticlePath:
    """Sorted particle positions on the stored time grid."""

    model: str
    times: np.ndarray
    positions: np.ndarray
    reflected_fraction: float

    def __post_init__(self) -> None:
        if self.positions.shape[0] != self.times.size:
            raise ParameterError("times and positions must align")

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise ParameterError(f"time {t} not on the stored grid")
        return self.positions[i]


def resolve_init(cfg: SimConfig, model: str) -> np.ndarray:
    """Initial positions: sorted, model-range-checked."""
    init = cfg.init
    if init is None:
        base = 0.5 if model == "jacobi" else 0.0
        x = np.full(cfg.n, base)
    elif isinstance(init, AtomicMeasure):
        counts = np.floor(init.weights * cfg.n).astype(int)
        remainders = init.weights * cfg.n - counts
        deficit = cfg.n - int(counts.sum())
        order = np.argsort(-remainders, kind="stable")
        counts[order[:deficit]] += 1
        x = np.repeat(init.locations, counts)
    elif np.isscalar(init):
        x = np.full(cfg.n, float(init))
    else:
        x = np.sort(np.asarray(init, dtype=float))
        if x.size != cfg.n:
            raise ParameterError("init positions must have length n")
    if model == "laguerre" and np.any(x < 0):
        raise ParameterError("laguerre init must be >= 0")
    if model == "jacobi" and (np.any(x < 0) or np.any(x > 1)):
        raise ParameterError("jacobi init must lie in [0, 1]")
    return np.sort(x)


def _inv_gap_sum(x: np.ndarray, delta_min: float) -> np.ndarray:
    """sum_j sign(x_i - x_j)/max(|x_i - x_j|, delta_min), zero for coincident pairs."""
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    out = np.sign(diff) / np.maximum(np.abs(diff), delta_min)
    return out.sum(axis=1)


def _tame(drift: np.ndarray, dt: float) -> np.ndarray:
    return drift / (1.0 + dt * np.abs(drift))


def _check_blowup(x: np.ndarray, model: str, t: float) -> None:
    if np.any(np.abs(x) > _BLOWUP):
        raise NumericalError(f"{model} simulation blew up (|x| > {_BLOWUP:g}) at t = {t:.6g}")


def _simulate_particles(model: str, cfg: SimConfig, stream: RandomStream) -> ParticlePath:
    gen = stream.generator
    n, dt = cfg.n, cfg.dt
    c_over_n = cfg.c / n
    sigma = cfg.sigma
    x = resolve_init(cfg, model)
    n_steps, stride = cfg.n_steps, cfg.stride
    store_idx = sorted(set(range(0, n_steps + 1, stride)) | {n_steps})
    times = np.array([k * dt for k in store_idx])
    positions = np.empty((len(store_idx), n))
    slot = {k: i for i, k in enumerate(store_idx)}
    positions[0] = x
    reflections = 0
    sqrt_dt = np.sqrt(dt)
    for k in range(1, n_steps + 1):
        noise = gen.standard_normal(n)
        if model == "dyson":
            drift = sigma**2 * c_over_n * _inv_gap_sum(x, cfg.delta_min)
            diff_coef = sigma
        elif model == "laguerre":
            xp = np.maximum(x, 0.0)
            drift = sigma * cfg.alpha + sigma * c_over_n * 2.0 * x * _inv_gap_sum(x, cfg.delta_min)
            diff_coef = np.sqrt(2.0 * sigma * xp)
        else:  # jacobi
            xp = np.clip(x, 0.0, 1.0)
            drift = (
                (cfg.a + 1.0)
                - (cfg.a + cfg.b + 2.0) * x
                + c_over_n * 2.0 * x * (1.0 - x) * _inv_gap_sum(x, cfg.delta_min)
            )
            diff_coef = np.sqrt(2.0 * xp * (1.0 - xp))
        x = x + _tame(drift, dt) * dt + diff_coef * sqrt_dt * noise
        if model == "laguerre":
            neg = x < 0.0
            reflections += int(np.count_nonzero(neg))
            x = np.abs(x)
        elif model == "jacobi":
            neg = x < 0.0
            over = x > 1.0
            reflections += int(np.count_nonzero(neg)) + int(np.count_nonzero(over))
            x = np.abs(x)
            x = 1.0 - np.abs(1.0 - x)
            x = np.clip(x, 0.0, 1.0)
        x = np.sort(x)
        _check_blowup(x, model, k * dt)
        if k in slot:
            positions[slot[k]] = x
    fraction = reflections / float(n_steps * n)
    if fraction > _REFLECT_WARN_FRACTION:
        warnings.warn(
            f"{model}: {100 * fraction:.2f}% of particle-steps reflected; consider a smaller dt",
            RuntimeWarning,
            stacklevel=3,
        )
    return ParticlePath(model=model, times=times, positions=positions, reflected_fraction=fraction)


def simulate_dyson(cfg: SimConfig, stream: RandomStream | None = None) -> ParticlePath:
    """One replica of the Gaussian (Dyson-type) particle system."""
    stream = stream or RandomStream(cfg.seed, 0)
    return _simulate_particles("dyson", cfg, stream)


def simulate_laguerre(cfg: SimConfig, stream: RandomStream | None = None) -> ParticlePath:
    """One replica of the Laguerre particle system (alpha > 1/2)."""
    if cfg.alpha is None or not (cfg.alpha > 0.5):
        raise ParameterError("laguerre SDE needs alpha > 1/2")
    stream = stream or RandomStream(cfg.seed, 0)
    return _simulate_particles("laguerre", cfg, stream)


def simulate_jacobi(cfg: SimConfig, stream: RandomStream | None = None) -> ParticlePath:
    """One replica of the Jacobi particle system (a, b > -1/2)."""
    if cfg.a is None or cfg.b is None or cfg.a <= -0.5 or cfg.b <= -0.5:
        raise ParameterError("jacobi SDE needs a > -1/2 and b > -1/2")
    if cfg.sigma != 1.0:
        raise ParameterError("the jacobi SDE has no sigma parameter")
    stream = stream or RandomStream(cfg.seed, 0)
    return _simulate_particles("jacobi", cfg, stream)


_SIMULATORS = {
    "dyson": simulate_dyson,
    "laguerre": simulate_laguerre,
    "jacobi": simulate_jacobi,
}


def empirical_moment_paths(path: ParticlePath, n_max: int) -> np.ndarray:
    """S_n(t) = (1/N) sum_i x_i(t)^n on the stored grid; shape (times, n_max+1)."""
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    out = np.empty((path.times.size, n_max + 1))
    out[:, 0] = 1.0
    power = np.ones_like(path.positions)
    for n in range(1, n_max + 1):
        power = power * path.positions
        out[:, n] = power.mean(axis=1)
    return out


@dataclass(frozen=True)
class MomentEstimate:
    """Replica-averaged empirical moment paths with standard errors."""

    model: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    reps: int
    reflected_fraction: float

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise ParameterError(f"time {t} not on the stored grid")
        return self.mean[i], self.stderr[i]


def replicate_moments(model: str, cfg: SimConfig, n_max: int, threads: int = 1) -> MomentEstimate:
    """Run cfg.reps independent replicas (substream = replica index) and
    average the empirical moment paths. Aggregation order is fixed by the
    replica index, so thread count does not change results."""
    if model not in _SIMULATORS:
        raise ParameterError(f"model must be one of {SDE_MODELS}")
    sim = _SIMULATORS[model]

    def one(rep: int) -> tuple[np.ndarray, np.ndarray, float]:
        path = sim(cfg, RandomStream(cfg.seed, rep))
        return path.times, empirical_moment_paths(path, n_max), path.reflected_fraction

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(cfg.reps)))
    else:
        results = [one(rep) for rep in range(cfg.reps)]
    times = results[0][0]
    stack = np.stack([r[1] for r in results])
    mean = stack.mean(axis=0)
    if cfg.reps > 1:
        stderr = stack.std(axis=0, ddof=1) / np.sqrt(cfg.reps)
    else:
        stderr = np.full_like(mean, np.nan)
    frac = float(np.mean([r[2] for r in results]))
    return MomentEstimate(
        model=model, times=times, mean=mean, stderr=stderr, reps=cfg.reps, reflected_fraction=frac
    )


def _companion_initial_positions(init_law, n_paths: int) -> np.ndarray:
    if np.isscalar(init_law):
        return np.full(n_paths, float(init_law))
    if isinstance(init_law, AtomicMeasure):
        counts = np.floor(init_law.weights * n_paths).astype(int)
        remainders = init_law.weights * n_paths - counts
        deficit = n_paths - int(counts.sum())
        order = np.argsort(-remainders, kind="stable")
        counts[order[:deficit]] += 1
        return np.repeat(init_law.locations, counts)
    raise ParameterError("init_law must be a scalar or an AtomicMeasure")


@dataclass(frozen=True)
class CompanionEstimate:
    """MC moment estimates E[Y_t^n] of a companion diffusion."""

    model: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_paths: int
    reflected_fraction: float

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise ParameterError(f"time {t} not on the stored grid")
        return self.mean[i], self.stderr[i]


def simulate_companion(
    model: str,
    cfg: SimConfig,
    init_law,
    n_max: int,
    stream: RandomStream | None = None,
) -> CompanionEstimate:
    """Vectorized Euler-Maruyama batch of cfg.reps companion paths.

    gaussian: dY = sigma dB;
    laguerre: dY = sqrt(2 sigma Y) dB + sigma (alpha + c) dt, reflected at 0;
    jacobi:   dY = sqrt(2 Y (1-Y)) dB + [(a+c+1) - (a+b+2c+2) Y] dt,
              reflected at both ends.

    The drift is globally bounded on the admissible region, so no taming is
    applied (taming would bias the constant drift by O(dt)).
    """
    if model not in COMPANION_MODELS:
        raise ParameterError(f"model must be one of {COMPANION_MODELS}")
    if model == "laguerre" and (cfg.alpha is None or not (cfg.alpha > 0)):
        raise ParameterError("laguerre companion needs alpha > 0")
    if model == "jacobi":
        if cfg.a is None or cfg.b is None or cfg.a <= -1 or cfg.b <= -1:
            raise ParameterError("jacobi companion needs a > -1 and b > -1")
        if cfg.sigma != 1.0:
            raise ParameterError("the jacobi companion has no sigma parameter")
    stream = stream or RandomStream(cfg.seed, 0)
    gen = stream.generator
    n_paths = cfg.reps
    dt, sigma, c = cfg.dt, cfg.sigma, cfg.c
    y = _companion_initial_positions(init_law, n_paths).astype(float)
    if model == "laguerre" and np.any(y < 0):
        raise ParameterError("laguerre companion init must be >= 0")
    if model == "jacobi" and (np.any(y < 0) or np.any(y > 1)):
        raise ParameterError("jacobi companion init must lie in [0, 1]")
    n_steps, stride = cfg.n_steps, cfg.stride
    store_idx = sorted(set(range(0, n_steps + 1, stride)) | {n_steps})
    times = np.array([k * dt for k in store_idx])
    slot = {k: i for i, k in enumerate(store_idx)}
    mean = np.empty((len(store_idx), n_max + 1))
    stderr = np.empty((len(store_idx), n_max + 1))

    def record(i: int, vals: np.ndarray) -> None:
        mean[i, 0] = 1.0
        stderr[i, 0] = 0.0
        power = np.ones_like(vals)
        for n in range(1, n_max + 1):
            power = power * vals
            mean[i, n] = power.mean()
            stderr[i, n] = power.std(ddof=1) / np.sqrt(n_paths) if n_paths > 1 else np.nan

    record(0, y)
    reflections = 0
    sqrt_dt = np.sqrt(dt)
    for k in range(1, n_steps + 1):
        noise = gen.standard_normal(n_paths)
        if model == "gaussian":
            y = y + sigma * sqrt_dt * noise
        elif model == "laguerre":
            yp = np.maximum(y, 0.0)
            y = y + sigma * (cfg.alpha + c) * dt + np.sqrt(2.0 * sigma * yp) * sqrt_dt * noise
            neg = y < 0.0
            reflections += int(np.count_nonzero(neg))
            y = np.abs(y)
        else:
            yp = np.clip(y, 0.0, 1.0)
            drift = (cfg.a + c + 1.0) - (cfg.a + cfg.b + 2.0 * c + 2.0) * y
            y = y + drift * dt + np.sqrt(2.0 * yp * (1.0 - yp)) * sqrt_dt * noise
            reflections += int(np.count_nonzero(y < 0.0)) + int(np.count_nonzero(y > 1.0))
            y = np.abs(y)
            y = 1.0 - np.abs(1.0 - y)
            y = np.clip(y, 0.0, 1.0)
        if k in slot:
            record(slot[k], y)
    fraction = reflections / float(n_steps * n_paths)
    return CompanionEstimate(
        model=model,
        times=times,
        mean=mean,
        stderr=stderr,
        n_paths=n_paths,
        reflected_fraction=fraction,
    )


@dataclass(frozen=True)
class ScalingSpec:
    """Affine space-time window x(t) = gamma (lambda(t/tau) - E)."""

    gamma: float
    tau: float
    e: float

    def __post_init__(self) -> None:
        if not (self.gamma > 0) or not (self.tau > 0):
            raise ParameterError("gamma and tau must be > 0")


def simulate_local_scaling(
    base_model: str,
    scaling: ScalingSpec,
    cfg: SimConfig,
    regime: str | None = None,
    stream: RandomStream | None = None,
) -> ParticlePath:
    """Simulate the base process at native scale and return the transformed path.

    cfg is expressed in transformed time/space: the base process runs on
    [0, horizon/tau] with step dt/tau, started from lambda = x/gamma + E
    where x is cfg.init (default: all zeros), and with the pairwise floor
    delta_min/gamma so the floor keeps its meaning in window units.
    regime ('gaussian' or 'laguerre') is advisory metadata; grossly
    inconsistent scalings only warn, so identity windows remain usable.
    """
    if base_model not in ("laguerre", "jacobi"):
        raise ParameterError("base_model must be 'laguerre' or 'jacobi'")
    if regime not in (None, "gaussian", "laguerre"):
        raise ParameterError("regime must be None, 'gaussian' or 'laguerre'")
    if regime == "laguerre" and scaling.e != 0.0:
        warnings.warn("laguerre-regime windows are anchored at E = 0", RuntimeWarning, stacklevel=2)
    if regime == "gaussian" and scaling.gamma / scaling.tau > 0.5:
        warnings.warn(
            "gaussian-regime window has gamma/tau > 0.5; the limit is unlikely to be visible",
            RuntimeWarning,
            stacklevel=2,
        )
    if cfg.init is None:
        x0 = np.zeros(cfg.n)
    else:
        x0 = resolve_init(replace(cfg, init=cfg.init), "dyson")
    lam0 = x0 / scaling.gamma + scaling.e
    base_cfg = replace(
        cfg,
        dt=cfg.dt / scaling.tau,
        horizon=cfg.horizon / scaling.tau,
        init=lam0,
        delta_min=cfg.delta_min / scaling.gamma,
        store_stride=cfg.stride,
    )
    sim = simulate_laguerre if base_model == "laguerre" else simulate_jacobi
    base = sim(base_cfg, stream or RandomStream(cfg.seed, 0))
    return ParticlePath(
        model=f"{base_model}-window",
        times=base.times * scaling.tau,
        positions=scaling.gamma * (base.positions - scaling.e),
        reflected_fraction=base.reflected_fraction,
    )
