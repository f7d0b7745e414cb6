"""Atomic measures, moment sequences, and the complex-plane transforms."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mkt_ensembles.errors import DomainError, ParameterError
from mkt_ensembles.measures import (
    AtomicMeasure,
    MomentSequence,
    as_moment_array,
    empirical_measure,
    gen_stieltjes,
    hankel_min_det,
    log_potential,
    moments_of_measure,
)


def test_atomic_measure_requires_increasing_locations():
    with pytest.raises(ParameterError):
        AtomicMeasure(np.array([1.0, 0.0]), np.array([0.5, 0.5]))


def test_atomic_measure_requires_probability_weights():
    with pytest.raises(ParameterError):
        AtomicMeasure(np.array([0.0]), np.array([0.5]))
    with pytest.raises(ParameterError):
        AtomicMeasure(np.array([0.0, 1.0]), np.array([-0.1, 1.1]))


def test_from_points_sorts_and_merges_ties():
    m = AtomicMeasure.from_points(np.array([1.0, 0.0]), np.array([0.25, 0.75]))
    np.testing.assert_array_equal(m.locations, [0.0, 1.0])
    np.testing.assert_array_equal(m.weights, [0.75, 0.25])
    m = AtomicMeasure.from_points(np.array([0.5, 0.5, 1.0]), np.array([0.25, 0.25, 0.5]))
    np.testing.assert_array_equal(m.locations, [0.5, 1.0])
    np.testing.assert_allclose(m.weights, [0.5, 0.5])


def test_empirical_measure_counts_repeats():
    m = empirical_measure([3.0, 1.0, 1.0])
    np.testing.assert_array_equal(m.locations, [1.0, 3.0])
    np.testing.assert_allclose(m.weights, [2 / 3, 1 / 3])


def test_moment_sequence_requires_unit_mass():
    with pytest.raises(ParameterError):
        MomentSequence(np.array([2.0, 1.0]))


def test_moment_sequence_container_protocol():
    s = MomentSequence(np.array([1.0, 0.5, 0.25]))
    assert len(s) == 3
    assert s[2] == 0.25
    np.testing.assert_array_equal(np.asarray(s), [1.0, 0.5, 0.25])


def test_as_moment_array_accepts_lists():
    np.testing.assert_array_equal(as_moment_array([1.0, 0.1]), [1.0, 0.1])
    with pytest.raises(ParameterError):
        as_moment_array([0.9, 0.1])


def test_moments_of_point_mass():
    m = AtomicMeasure(np.array([0.5]), np.array([1.0]))
    vals = np.asarray(moments_of_measure(m, 5))
    np.testing.assert_allclose(vals, [0.5**n for n in range(6)], atol=1e-15)


def test_moments_of_two_point_measure():
    m = AtomicMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    vals = np.asarray(moments_of_measure(m, 6))
    np.testing.assert_allclose(vals, [1.0] + [0.5] * 6, atol=1e-15)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
def test_empirical_moments_match_power_sums(points):
    m = empirical_measure(points)
    vals = np.asarray(moments_of_measure(m, 3))
    arr = np.asarray(points)
    for n in range(4):
        assert abs(vals[n] - np.mean(arr**n)) < 1e-9 * max(1.0, np.max(np.abs(arr)) ** n)


def test_gen_stieltjes_point_mass_closed_form():
    # delta_1 at z = 1+i with c = 2: (z-1)^(-2) = i^(-2) = -1
    d1 = AtomicMeasure(np.array([1.0]), np.array([1.0]))
    val = gen_stieltjes(d1, 1 + 1j, 2.0)
    assert abs(val - (-1.0)) < 1e-12


def test_gen_stieltjes_reduces_to_cauchy_at_c_one():
    m = AtomicMeasure(np.array([-1.0, 2.0]), np.array([0.5, 0.5]))
    z = 0.3 + 1.7j
    direct = 0.5 / (z + 1.0) + 0.5 / (z - 2.0)
    assert abs(gen_stieltjes(m, z, 1.0) - direct) < 1e-12


def test_log_potential_point_mass():
    d0 = AtomicMeasure(np.array([0.0]), np.array([1.0]))
    val = log_potential(d0, 2j)
    assert abs(val - (np.log(2.0) + 1j * np.pi / 2)) < 1e-12


def test_gen_stieltjes_is_the_weighted_power_sum():
    m = AtomicMeasure(np.array([-0.5, 0.25, 1.0]), np.array([0.2, 0.3, 0.5]))
    z = 1 + 2j
    c = 1.7
    direct = np.sum(m.weights * np.exp(-c * np.log(z - m.locations)))
    assert abs(gen_stieltjes(m, z, c) - direct) < 1e-12


def test_routes_coincide_on_point_masses():
    # for a Dirac mass the linear transform and the exponential of the
    # log potential are the same function of z
    d = AtomicMeasure(np.array([0.3]), np.array([1.0]))
    z = 1 + 2j
    c = 1.7
    assert abs(np.exp(-c * log_potential(d, z)) - gen_stieltjes(d, z, c)) < 1e-12


def test_transforms_reject_real_z():
    m = AtomicMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    with pytest.raises(DomainError):
        gen_stieltjes(m, 0.5, 1.0)
    with pytest.raises(DomainError):
        log_potential(m, 2.0)


def test_hankel_windows_nonnegative_on_half_line_moments():
    # Gamma(theta) moments (theta)_n: both window variants stay >= 0
    theta = 1.5
    m = [1.0]
    for n in range(6):
        m.append(m[-1] * (theta + n))
    assert hankel_min_det(m) >= 0
    assert hankel_min_det(m, shifted=True) >= 0


def test_hankel_flags_non_measure_sequence():
    # m_1^2 > m_0 m_2 violates Cauchy-Schwarz
    assert hankel_min_det([1.0, 0.9, 0.5]) < 0
