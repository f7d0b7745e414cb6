"""Interacting-particle simulations, companions, and the zoomed-in window."""
import numpy as np
import pytest

from mkt_ensembles.errors import NumericalError, ParameterError
from mkt_ensembles.flows import companion_flow
from mkt_ensembles.measures import AtomicMeasure
from mkt_ensembles.rng import RandomStream
from mkt_ensembles.sde import (
    ScalingSpec,
    SimConfig,
    empirical_moment_paths,
    replicate_moments,
    resolve_init,
    simulate_companion,
    simulate_dyson,
    simulate_jacobi,
    simulate_laguerre,
    simulate_local_scaling,
)


def test_config_validation():
    with pytest.raises(ParameterError):
        SimConfig(n=0, c=1.0, dt=1e-2, horizon=1.0)
    with pytest.raises(ParameterError):
        SimConfig(n=4, c=1.0, dt=0.0, horizon=1.0)
    with pytest.raises(ParameterError):
        SimConfig(n=4, c=-1.0, dt=1e-2, horizon=1.0)
    with pytest.raises(ParameterError):
        SimConfig(n=4, c=1.0, dt=1e-2, horizon=1.0, reps=0)
    with pytest.raises(ParameterError):
        SimConfig(n=4, c=1.0, dt=1e-2, horizon=1.0, delta_min=0.0)


def test_model_specific_validation():
    with pytest.raises(ParameterError):
        simulate_laguerre(SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1))  # missing alpha
    with pytest.raises(ParameterError):
        simulate_laguerre(SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, alpha=0.4))
    with pytest.raises(ParameterError):
        simulate_jacobi(SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, a=0.0, b=0.0, sigma=2.0))
    with pytest.raises(ParameterError):
        simulate_jacobi(SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, a=-0.6, b=0.0))
    with pytest.raises(ParameterError):
        simulate_laguerre(
            SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, alpha=2.0, init=np.array([-1.0, 0, 1, 2]))
        )
    with pytest.raises(ParameterError):
        simulate_dyson(SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, init=np.zeros(5)))


def test_resolve_init_defaults_and_measures():
    cfg = SimConfig(n=6, c=1.0, dt=1e-2, horizon=0.1)
    np.testing.assert_array_equal(resolve_init(cfg, "dyson"), np.zeros(6))
    np.testing.assert_array_equal(resolve_init(cfg, "jacobi"), np.full(6, 0.5))
    cfg = SimConfig(n=6, c=1.0, dt=1e-2, horizon=0.1, init=2.5)
    np.testing.assert_array_equal(resolve_init(cfg, "laguerre"), np.full(6, 2.5))
    # atomic weights place particles by largest remainder
    m = AtomicMeasure(np.array([0.0, 1.0, 2.0]), np.array([0.5, 0.3, 0.2]))
    cfg = SimConfig(n=10, c=1.0, dt=1e-2, horizon=0.1, init=m)
    out = resolve_init(cfg, "dyson")
    np.testing.assert_array_equal(out, [0, 0, 0, 0, 0, 1, 1, 1, 2, 2])


def test_empirical_moment_paths_hand_values():
    path = simulate_dyson(SimConfig(n=2, c=1.0, dt=1e-2, horizon=0.02, seed=1))
    fake = path.__class__(
        model="dyson",
        times=np.array([0.0, 1.0]),
        positions=np.array([[-1.0, 1.0], [-2.0, 2.0]]),
        reflected_fraction=0.0,
    )
    table = empirical_moment_paths(fake, 2)
    np.testing.assert_allclose(table[:, 0], [1.0, 1.0])
    np.testing.assert_allclose(table[:, 1], [0.0, 0.0])
    np.testing.assert_allclose(table[:, 2], [1.0, 4.0])


def test_stored_times_respect_stride_and_endpoint():
    cfg = SimConfig(n=4, c=1.0, dt=0.01, horizon=0.1, store_stride=3)
    path = simulate_dyson(cfg)
    np.testing.assert_allclose(path.times, [0.0, 0.03, 0.06, 0.09, 0.1])
    assert path.positions.shape == (5, 4)
    np.testing.assert_array_equal(path.at(0.06), path.positions[2])
    with pytest.raises(ParameterError):
        path.at(0.05)


def test_positions_stay_sorted():
    for model, kwargs in [
        ("dyson", {}),
        ("laguerre", {"alpha": 2.0, "init": 3.0}),
        ("jacobi", {"a": 0.0, "b": 0.0}),
    ]:
        cfg = SimConfig(n=8, c=1.0, dt=1e-3, horizon=0.2, seed=3, delta_min=3e-4, **kwargs)
        sim = {"dyson": simulate_dyson, "laguerre": simulate_laguerre, "jacobi": simulate_jacobi}
        path = sim[model](cfg)
        assert np.all(np.diff(path.positions, axis=1) >= 0)


def test_laguerre_stays_nonnegative_jacobi_stays_in_unit_interval():
    # starting on the boundary with small alpha forces reflections; the
    # warning about them is expected and the support must still hold
    cfg = SimConfig(n=8, c=1.0, dt=1e-3, horizon=0.3, seed=4, alpha=0.6, delta_min=3e-4)
    with pytest.warns(RuntimeWarning):
        assert simulate_laguerre(cfg).positions.min() >= 0.0
    cfg = SimConfig(n=8, c=1.0, dt=1e-3, horizon=0.3, seed=4, a=0.0, b=0.0, delta_min=3e-4)
    pos = simulate_jacobi(cfg).positions
    assert pos.min() >= 0.0 and pos.max() <= 1.0


def test_dyson_never_reflects():
    cfg = SimConfig(n=8, c=1.0, dt=1e-3, horizon=0.2, seed=5, delta_min=3e-4)
    assert simulate_dyson(cfg).reflected_fraction == 0.0


def test_heavy_reflection_warns():
    cfg = SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.5, seed=6, a=0.0, b=0.0, init=0.005)
    with pytest.warns(RuntimeWarning):
        simulate_jacobi(cfg)


def test_blow_up_raises():
    cfg = SimConfig(n=2, c=1.0, dt=1e-2, horizon=0.05, init=np.array([-2e6, 2e6]))
    with pytest.raises(NumericalError):
        simulate_dyson(cfg)


def test_symmetric_init_keeps_zero_mean():
    # pairwise drift cancels in the mean and the init is symmetric, so
    # S_1 is centered at every time
    cfg = SimConfig(
        n=6, c=1.0, dt=2e-3, horizon=0.3, reps=300, seed=7,
        init=np.linspace(-1, 1, 6), delta_min=3e-4,
    )
    est = replicate_moments("dyson", cfg, 2)
    i = -1
    assert abs(est.mean[i, 1]) < 4 * est.stderr[i, 1] + 1e-3


def test_laguerre_mean_drift_identity():
    # summing the drift over particles gives the exact finite-size identity
    # E[S_1(t)] = S_1(0) + sigma (alpha + c - c/N) t
    n, c, alpha, sigma, t = 3, 1.0, 2.0, 0.7, 0.4
    cfg = SimConfig(
        n=n, c=c, dt=1e-3, horizon=t, reps=400, seed=8, sigma=sigma, alpha=alpha,
        init=np.linspace(1, 3, n), delta_min=3e-4,
    )
    est = replicate_moments("laguerre", cfg, 1)
    target = 2.0 + sigma * (alpha + c - c / n) * t
    dev = abs(est.mean[-1, 1] - target)
    assert dev < 4 * est.stderr[-1, 1] + 5e-3


def test_dyson_second_moment_deterministic_drift():
    # E[S_2(t)] = S_2(0) + sigma^2 (1 + c (N-1)/N) t
    n, c, sigma, t = 6, 1.0, 1.0, 0.3
    init = np.linspace(-1, 1, n)
    cfg = SimConfig(
        n=n, c=c, dt=1e-3, horizon=t, reps=400, seed=9, sigma=sigma,
        init=init, delta_min=3e-4,
    )
    est = replicate_moments("dyson", cfg, 2)
    target = np.mean(init**2) + sigma**2 * (1 + c * (n - 1) / n) * t
    dev = abs(est.mean[-1, 2] - target)
    assert dev < 4 * est.stderr[-1, 2] + 1e-2


def test_coincident_start_matches_flow_with_raised_gap_floor():
    # all particles at one point is the hardest start for the tamed scheme:
    # with the stability floor delta_min=1e-8 the first steps overshoot and
    # bias S_2 upward, while the bias-optimal floor for dt=1e-3 restores the
    # exact mean growth E[S_2(t)] = sigma^2 (1 + c (N-1)/N) t within MC error
    # plus the discretization budget
    n, t = 40, 0.5
    cfg = SimConfig(n=n, c=1.0, dt=1e-3, horizon=t, reps=100, seed=11, delta_min=3e-4)
    est = replicate_moments("dyson", cfg, 2)
    i = int(np.argmin(np.abs(est.times - t)))
    target = (1 + (n - 1) / n) * t
    assert abs(est.mean[i, 2] - target) <= 4 * est.stderr[i, 2] + 0.05


def test_single_particle_dyson_is_brownian():
    cfg = SimConfig(n=1, c=1.0, dt=2.5e-3, horizon=0.25, reps=1000, seed=10, sigma=1.3)
    est = replicate_moments("dyson", cfg, 2)
    # E[x(t)^2] = sigma^2 t, no drift at all for one particle
    assert abs(est.mean[-1, 1]) < 4 * est.stderr[-1, 1]
    assert abs(est.mean[-1, 2] - 1.3**2 * 0.25) < 4 * est.stderr[-1, 2]


def test_fluctuations_shrink_with_system_size():
    # Var S_1(t) scales like 1/N: between N=50 and N=200 the ratio must
    # sit in [2, 8] (it is 4 up to sampling noise)
    out = {}
    for n in [50, 200]:
        cfg = SimConfig(n=n, c=1.0, dt=2e-3, horizon=0.1, reps=150, seed=11, delta_min=3e-4)
        est = replicate_moments("dyson", cfg, 1)
        out[n] = est.stderr[-1, 1] ** 2 * cfg.reps
    ratio = out[50] / out[200]
    assert 2.0 < ratio < 8.0


def test_replicas_are_permutation_of_init_invariant():
    base = np.array([0.5, 2.0, 1.0, 3.0])
    cfg_a = SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, seed=12, alpha=2.0, init=base)
    cfg_b = SimConfig(n=4, c=1.0, dt=1e-2, horizon=0.1, seed=12, alpha=2.0, init=np.sort(base))
    pa = simulate_laguerre(cfg_a)
    pb = simulate_laguerre(cfg_b)
    np.testing.assert_array_equal(pa.positions, pb.positions)


def test_thread_count_does_not_change_results():
    cfg = SimConfig(n=6, c=1.0, dt=5e-3, horizon=0.1, reps=8, seed=13, delta_min=3e-4)
    a = replicate_moments("dyson", cfg, 3, threads=1)
    b = replicate_moments("dyson", cfg, 3, threads=3)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.stderr, b.stderr)


def test_identity_window_reproduces_the_base_path():
    # gamma = tau = 1 with centre 0 is the base simulation, path for path
    cfg = SimConfig(
        n=5, c=1.0, dt=1e-2, horizon=0.2, seed=14, alpha=2.0, init=np.linspace(1, 3, 5)
    )
    base = simulate_laguerre(cfg, stream=RandomStream(14, 0))
    window = simulate_local_scaling(
        "laguerre", ScalingSpec(gamma=1.0, tau=1.0, e=0.0), cfg, stream=RandomStream(14, 0)
    )
    np.testing.assert_allclose(window.times, base.times, atol=1e-12)
    np.testing.assert_allclose(window.positions, base.positions, atol=1e-12)


def test_window_rejects_gaussian_base():
    cfg = SimConfig(n=5, c=1.0, dt=1e-2, horizon=0.1)
    with pytest.raises(ParameterError):
        simulate_local_scaling("dyson", ScalingSpec(gamma=2.0, tau=1.0, e=0.0), cfg)


def test_scaling_spec_validation():
    with pytest.raises(ParameterError):
        ScalingSpec(gamma=0.0, tau=1.0, e=0.0)
    with pytest.raises(ParameterError):
        ScalingSpec(gamma=1.0, tau=-1.0, e=0.0)


def test_companion_gaussian_moments():
    cfg = SimConfig(n=1, c=1.0, dt=1e-3, horizon=0.5, reps=20_000, seed=15, sigma=0.9)
    est = simulate_companion("gaussian", cfg, 0.0, 2)
    v = 0.9**2 * 0.5
    assert abs(est.mean[-1, 1]) < 4 * est.stderr[-1, 1]
    assert abs(est.mean[-1, 2] - v) < 4 * est.stderr[-1, 2]


def test_companion_laguerre_linear_growth():
    # alpha + c = 3 with sigma = 1: the first moment is exactly 3t,
    # matching the derived flow
    cfg = SimConfig(n=1, c=1.0, dt=1e-3, horizon=0.5, reps=20_000, seed=16, alpha=2.0)
    est = simulate_companion("laguerre", cfg, 0.0, 1)
    assert abs(est.mean[-1, 1] - 1.5) < 4 * est.stderr[-1, 1]
    flow = companion_flow("laguerre", [1.0, 0.0], 1, 0.5, c=1.0, alpha=2.0)
    assert abs(flow.moments(0.5)[1] - 1.5) < 1e-12


def test_companion_jacobi_holds_its_stationary_mean():
    # at a = b = 0, c = 1 the first moment is stationary at 1/2
    cfg = SimConfig(n=1, c=1.0, dt=1e-3, horizon=0.5, reps=20_000, seed=17, a=0.0, b=0.0)
    est = simulate_companion("jacobi", cfg, 0.5, 1)
    assert abs(est.mean[-1, 1] - 0.5) < 4 * est.stderr[-1, 1]
    assert 0.0 <= est.mean[-1, 1] <= 1.0
