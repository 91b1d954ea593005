import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from jointmaj.core.measures import (
    DiscreteMeasure,
    IntervalSet,
    MeasureSplit,
    PiecewiseUniformMeasure,
    equivalent,
    group_by_diameter,
    measures_equal,
    merge_atoms,
    moments,
    split_by_cells,
    split_with_mass,
    sum_measures,
    verify_split_majorization_witness,
)
from jointmaj.errors import DimensionMismatchError, InvalidMeasureError
from jointmaj.utils.rng import make_rng


# --------------------------------------------------
# DISCRETE MEASURES
# --------------------------------------------------
def test_construction_merges_close_points_and_sorts():
    m = DiscreteMeasure([[2.0], [0.0], [2.0 + 1e-12]], [0.25, 0.5, 0.25])
    assert m.size == 2
    assert_allclose(m.points[:, 0], [0.0, 2.0])
    assert_allclose(m.masses, [0.5, 0.5])


@pytest.mark.parametrize(
    "points, masses",
    [
        ([], []),
        ([[0.0]], [0.0]),
        ([[0.0]], [-1.0]),
        ([[np.nan]], [1.0]),
        ([[0.0], [1.0]], [1.0]),
    ],
)
def test_invalid_measures_are_rejected(points, masses):
    with pytest.raises(InvalidMeasureError):
        DiscreteMeasure(points, masses)


def test_from_weights_drops_zero_atoms():
    m = DiscreteMeasure.from_weights([[0.0], [1.0], [2.0]], [0.5, 0.0, 0.5])
    assert m.atoms == [((0.0,), 0.5), ((2.0,), 0.5)]


@pytest.mark.parametrize(
    "points, masses, mass, first",
    [
        ([[0.0], [2.0]], [0.5, 0.5], 1.0, [1.0]),
        ([[1.0, 3.0], [-1.0, 1.0]], [0.5, 0.5], 1.0, [0.0, 2.0]),
        ([[5.0]], [0.2], 0.2, [1.0]),
    ],
)
def test_moments(points, masses, mass, first):
    total, moment = moments(DiscreteMeasure(points, masses))
    assert total == pytest.approx(mass)
    assert_allclose(moment, first)


def test_equivalent():
    two_point = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    assert equivalent(two_point, DiscreteMeasure.dirac([1.0]))
    assert not equivalent(DiscreteMeasure.dirac([0.0]), DiscreteMeasure.dirac([1.0]))
    assert not equivalent(DiscreteMeasure.dirac([0.0, 0.0]), DiscreteMeasure.dirac([0.0, 0.0], 0.5))


def test_equivalent_rejects_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        equivalent(DiscreteMeasure.dirac([0.0]), DiscreteMeasure.dirac([0.0, 0.0]))


@given(
    arrays(np.float64, (6, 2), elements=st.floats(-3, 3, allow_nan=False)),
    arrays(np.float64, 6, elements=st.floats(0.01, 1.0)),
)
def test_merge_is_idempotent_and_preserves_moments(points, masses):
    merged_points, merged_masses = merge_atoms(points, masses, 1e-3)
    again_points, again_masses = merge_atoms(merged_points, merged_masses, 1e-3)
    assert_allclose(again_points, merged_points)
    assert_allclose(again_masses, merged_masses)
    assert merged_masses.sum() == pytest.approx(masses.sum())
    assert_allclose(merged_masses @ merged_points, masses @ points, atol=1e-9)


def test_measures_equal_within_tolerance():
    m1 = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    m2 = DiscreteMeasure([[1.0 + 1e-11], [0.0]], [0.5, 0.5])
    assert measures_equal(m1, m2)
    assert not measures_equal(m1, DiscreteMeasure([[0.0], [1.0]], [0.4, 0.6]))
    assert not measures_equal(m1, DiscreteMeasure.dirac([0.5]))


def test_sum_measures_adds_masses_on_shared_atoms():
    total = sum_measures([DiscreteMeasure.dirac([1.0], 0.25), DiscreteMeasure([[1.0], [3.0]], [0.25, 0.5])])
    assert total.atoms == [((1.0,), 0.5), ((3.0,), 0.5)]


def test_group_by_diameter_bounds_every_cell():
    points = np.array([[0.0], [0.1], [1.0], [0.15], [1.05], [3.0]])
    cells = group_by_diameter(points, 0.2)
    assert sorted(int(i) for cell in cells for i in cell) == list(range(6))
    for cell in cells:
        assert np.ptp(points[cell]) <= 0.2


# --------------------------------------------------
# SPLITS
# --------------------------------------------------
def test_split_witness_with_matching_means():
    mu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    nu = DiscreteMeasure([[-1.0], [1.0], [3.0]], [0.25, 0.5, 0.25])
    mu_split = split_by_cells(mu, [np.array([0]), np.array([1])])
    nu_split = MeasureSplit(
        nu,
        [
            DiscreteMeasure([[-1.0], [1.0]], [0.25, 0.25]),
            DiscreteMeasure([[1.0], [3.0]], [0.25, 0.25]),
        ],
    )
    assert verify_split_majorization_witness(mu_split, nu_split)
    assert verify_split_majorization_witness(mu_split, mu_split)


def test_split_witness_with_permuted_parts_fails():
    mu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    forward = split_by_cells(mu, [np.array([0]), np.array([1])])
    backward = split_by_cells(mu, [np.array([1]), np.array([0])])
    assert not verify_split_majorization_witness(forward, backward)


def test_split_part_count_mismatch_raises():
    mu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    with pytest.raises(InvalidMeasureError):
        verify_split_majorization_witness(split_by_cells(mu, [np.array([0, 1])]), split_by_cells(mu, [np.array([0]), np.array([1])]))


def test_split_parts_must_sum_to_parent():
    mu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    with pytest.raises(InvalidMeasureError):
        MeasureSplit(mu, [DiscreteMeasure.dirac([0.0], 0.5)])


# --------------------------------------------------
# INTERVAL SETS / PIECEWISE-UNIFORM MEASURES
# --------------------------------------------------
def test_interval_set_algebra():
    a = IntervalSet([(0, 1), (2, 3)])
    b = IntervalSet([(0.5, 2.5)])
    assert a.union(b).pieces == ((0.0, 3.0),)
    assert a.intersection(b).pieces == ((0.5, 1.0), (2.0, 2.5))
    assert a.difference(b).pieces == ((0.0, 0.5), (2.5, 3.0))
    assert a.length == pytest.approx(2.0)
    assert a.diameter == pytest.approx(3.0)
    assert a.contains(2.5) and not a.contains(1.5)


@pytest.mark.parametrize(
    "intervals, alpha, expected",
    [
        ([(0, 1, 1)], 0.25, [[0.0, 0.25]]),
        ([(0, 0.5, 2)], 0.5, [[0.0, 0.25]]),
        ([(0, 1, 1), (2, 3, 1)], 1.5, [[0.0, 1.0], [2.0, 2.5]]),
    ],
)
def test_split_with_mass(intervals, alpha, expected):
    m = PiecewiseUniformMeasure(intervals)
    region = split_with_mass(m, alpha)
    assert_allclose(region.to_list(), expected)
    assert m.mass_of(region) == pytest.approx(alpha)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, 2.0])
def test_split_with_mass_out_of_range(alpha):
    with pytest.raises(InvalidMeasureError):
        split_with_mass(PiecewiseUniformMeasure.uniform(0, 1), alpha)


def test_piecewise_uniform_cdf_quantile_and_integral():
    m = PiecewiseUniformMeasure([(0, 0.5, 1), (0.5, 0.75, 2)])
    assert m.total_mass == pytest.approx(1.0)
    assert m.cdf(0.5) == pytest.approx(0.5)
    assert m.quantile(0.75) == pytest.approx(0.625)
    assert m.integrate(lambda x: x) == pytest.approx(0.125 + 2 * (0.75**2 - 0.5**2) / 2)


def test_restrict_to_null_set_raises():
    with pytest.raises(InvalidMeasureError):
        PiecewiseUniformMeasure.uniform(0, 1).restrict(IntervalSet([(2, 3)]))


def test_overlapping_intervals_rejected():
    with pytest.raises(InvalidMeasureError):
        PiecewiseUniformMeasure([(0, 1, 1), (0.5, 2, 1)])


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_moments_add_over_a_split(dim, size, seed):
    rng = make_rng(seed)
    mu = DiscreteMeasure(rng.uniform(-3.0, 3.0, size=(size, dim)), rng.uniform(0.1, 1.0, size=size))
    labels = rng.integers(0, 3, size=mu.size)
    cells = [np.flatnonzero(labels == j) for j in range(3) if np.any(labels == j)]
    split = split_by_cells(mu, cells)
    mass, first = moments(mu)
    assert sum(moments(part)[0] for part in split.parts) == pytest.approx(mass)
    assert_allclose(sum(moments(part)[1] for part in split.parts), first, atol=1e-12)


@given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_equivalence_is_reflexive_symmetric_and_transitive(dim, size, seed):
    rng = make_rng(seed)
    mu = DiscreteMeasure(rng.uniform(-3.0, 3.0, size=(size, dim)), rng.uniform(0.1, 1.0, size=size))
    mass, center = mu.total_mass, mu.barycenter
    step = rng.uniform(0.5, 2.0, size=dim)
    spread = DiscreteMeasure([center - step, center + step], [mass / 2, mass / 2])
    dirac = DiscreteMeasure.dirac(center, mass)
    heavier = DiscreteMeasure.dirac(center, 2 * mass)

    assert equivalent(mu, mu)
    for a, b in [(mu, spread), (spread, dirac), (mu, heavier)]:
        assert equivalent(a, b) == equivalent(b, a)
    assert equivalent(mu, spread) and equivalent(spread, dirac) and equivalent(mu, dirac)
    assert not equivalent(mu, heavier)


@given(
    st.floats(0.05, 0.9),
    st.floats(0.05, 0.9),
    st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(0.1, 3.0)), min_size=1, max_size=4),
)
def test_split_with_mass_composes_into_disjoint_sets(a, b, pieces):
    intervals, left = [], 0.0
    for width, density in pieces:
        intervals.append((left, left + width, density))
        left += width + 0.5
    m = PiecewiseUniformMeasure(intervals)
    total = m.total_mass

    alpha = split_with_mass(m, a * total)
    rest = m.restrict(m.support.difference(alpha))
    beta = split_with_mass(rest, b * rest.total_mass)

    assert m.mass_of(alpha.intersection(beta)) <= 1e-9 * total
    assert m.mass_of(alpha.union(beta)) == pytest.approx(a * total + b * rest.total_mass, rel=1e-9)
