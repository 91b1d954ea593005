import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from jointmaj.core.maps import check_doubly_stochastic
from jointmaj.core.measures import DiscreteMeasure, split_by_cells, verify_split_majorization_witness
from jointmaj.core.simplex import LPResult
from jointmaj.core.speclin import CommutingFamily, approx_unitarily_equivalent, joint_spectral_measure, pinch
from jointmaj.core.transport import (
    MaxAffine,
    TransportKernel,
    battery_violation,
    build_convex_battery,
    compose_kernels,
    convex_battery_test,
    decide_majorization,
    ds_map_from_kernel,
    mutually_majorized,
    potential_oracle_1d,
    push_split,
    synthesize_kernel_partition,
)
from jointmaj.errors import DimensionMismatchError, MeasureMismatchError, NotMajorizedError, SolverError
from jointmaj.utils.random_instances import (
    family_from_spectrum,
    random_commuting_family,
    random_ds_matrix,
    random_eigentuples,
    random_partition,
    random_unitary,
)
from jointmaj.utils.rng import make_rng

TWO_POINT = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
NARROW = DiscreteMeasure([[-1.0], [1.0]], [0.5, 0.5])
WIDE = DiscreteMeasure([[-2.0], [2.0]], [0.5, 0.5])


def measure(points, masses):
    return DiscreteMeasure(points, masses)


# --------------------------------------------------
# DECISION
# --------------------------------------------------
def test_equal_measures_are_majorized():
    result = decide_majorization(TWO_POINT, TWO_POINT)
    assert result.feasible
    assert result.witness.satisfies()


def test_dirac_at_barycenter():
    result = decide_majorization(DiscreteMeasure.dirac([1.0]), TWO_POINT)
    assert result.feasible
    assert_allclose(result.witness.K, [[0.5, 0.5]], atol=1e-12)


def test_three_quarter_kernel():
    result = decide_majorization(NARROW, WIDE)
    assert result.feasible
    assert_allclose(result.witness.K, [[0.75, 0.25], [0.25, 0.75]], atol=1e-12)


def test_spread_measure_is_not_majorized_by_concentrated_one():
    assert not decide_majorization(WIDE, NARROW).feasible
    f = MaxAffine([[1.0], [-1.0]], [0.0, 0.0])
    assert f.integrate(WIDE) == pytest.approx(2.0)
    assert f.integrate(NARROW) == pytest.approx(1.0)


def test_moment_mismatch_rejects():
    assert not decide_majorization(DiscreteMeasure.dirac([0.0]), DiscreteMeasure.dirac([1.0])).feasible


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        decide_majorization(DiscreteMeasure.dirac([0.0]), DiscreteMeasure.dirac([0.0, 0.0]))


def test_two_dimensional_segment_obstruction():
    mu = measure([[0, 1], [0, -1]], [0.5, 0.5])
    nu = measure([[1, 1], [-1, -1]], [0.5, 0.5])
    assert not decide_majorization(mu, nu).feasible
    # the fixed part of the battery cannot see this
    battery = build_convex_battery(mu, nu, 0, seed=7)
    assert battery_violation(mu, nu, battery) <= 1e-12


@given(st.integers(1, 3), st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_doubly_stochastic_mixing_is_majorized(n, d, seed):
    rng = make_rng(seed)
    lam = random_eigentuples(n, d, rng)
    mixed = random_ds_matrix(d, rng) @ lam
    mu = DiscreteMeasure(mixed, np.full(d, 1.0 / d))
    nu = DiscreteMeasure(lam, np.full(d, 1.0 / d))
    result = decide_majorization(mu, nu)
    assert result.feasible
    assert result.witness.satisfies()


# --------------------------------------------------
# ORACLES
# --------------------------------------------------
def test_potential_oracle():
    assert potential_oracle_1d(TWO_POINT, TWO_POINT)
    assert potential_oracle_1d(NARROW, WIDE)
    assert not potential_oracle_1d(WIDE, NARROW)
    assert not potential_oracle_1d(TWO_POINT, TWO_POINT.scaled(2.0))


def test_potential_oracle_needs_one_dimension():
    with pytest.raises(DimensionMismatchError):
        potential_oracle_1d(DiscreteMeasure.dirac([0.0, 0.0]), DiscreteMeasure.dirac([0.0, 0.0]))


@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_lp_agrees_with_potential_oracle(d, seed):
    rng = make_rng(seed)
    lam = random_eigentuples(1, d, rng)
    other = random_eigentuples(1, d, rng)
    other += lam.mean() - other.mean()
    mu = DiscreteMeasure(other, np.full(d, 1.0 / d))
    nu = DiscreteMeasure(lam, np.full(d, 1.0 / d))
    assert decide_majorization(mu, nu).feasible == potential_oracle_1d(mu, nu)


def test_battery_accepts_pinched_family(rng):
    famB = random_commuting_family(2, 6, rng)
    famA = pinch(famB, random_partition(6, rng))
    assert convex_battery_test(famA, famB, 64, seed=7)
    assert convex_battery_test(famB, famB, 64, seed=7)


def test_battery_refutes_spread_family():
    famA = CommutingFamily.diagonal([[-2, 2]])
    famB = CommutingFamily.diagonal([[-1, 1]])
    assert not convex_battery_test(famA, famB, 0, seed=7)


# --------------------------------------------------
# KERNEL SYNTHESIS / ALGEBRA
# --------------------------------------------------
def test_synthesized_kernel_with_single_atom_cells():
    kernel = synthesize_kernel_partition(NARROW, WIDE, 0.5)
    assert kernel.satisfies()
    assert_allclose(kernel.K, [[0.75, 0.25], [0.25, 0.75]], atol=1e-12)


def test_synthesized_kernel_for_dirac():
    for diameter in (0.0, 1.0, 10.0):
        assert_allclose(synthesize_kernel_partition(DiscreteMeasure.dirac([1.0]), TWO_POINT, diameter).K, [[0.5, 0.5]])


def test_coarse_cell_bounds_barycenter_residual():
    kernel = synthesize_kernel_partition(NARROW, WIDE, 2.0)
    assert_allclose(kernel.K, [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)
    assert kernel.residuals().barycenter <= 2.0
    assert kernel.satisfies(barycenter=False)


def test_synthesis_of_infeasible_pair():
    with pytest.raises(NotMajorizedError, match="not majorized"):
        synthesize_kernel_partition(WIDE, NARROW, 0.1)


def test_kernels_compose():
    inner = DiscreteMeasure.dirac([0.0])
    first = decide_majorization(inner, NARROW).witness
    second = decide_majorization(NARROW, WIDE).witness
    composed = compose_kernels(first, second)
    assert composed.satisfies()
    with pytest.raises(MeasureMismatchError):
        compose_kernels(second, first)


def test_push_split_gives_a_split_witness():
    kernel = decide_majorization(NARROW, WIDE).witness
    mu_split = split_by_cells(NARROW, [np.array([0]), np.array([1])])
    nu_split = push_split(kernel, mu_split)
    assert verify_split_majorization_witness(mu_split, nu_split)


def test_mutual_majorization_matches_unitary_equivalence(rng):
    famB = random_commuting_family(2, 5, rng, atoms=3)
    famA = famB.conjugated(random_unitary(5, rng))
    mu = joint_spectral_measure(famA, seed=7)
    nu = joint_spectral_measure(famB, seed=7)
    assert mutually_majorized(mu, nu)
    assert approx_unitarily_equivalent(famA, famB, seed=7).equivalent
    assert not mutually_majorized(NARROW, WIDE)


# --------------------------------------------------
# KERNEL -> DOUBLY STOCHASTIC MAP
# --------------------------------------------------
def test_identity_kernel_acts_as_diagonal_pinching(rng):
    fam = CommutingFamily.diagonal([[1, 2, 3]])
    mu = joint_spectral_measure(fam, seed=7)
    T = ds_map_from_kernel(TransportKernel(mu, mu, np.eye(3)), fam, fam, seed=7)
    assert_allclose(T(fam.members[0]), fam.members[0].data, atol=1e-12)
    x = rng.normal(size=(3, 3))
    assert_allclose(T(x), np.diag(np.diag(x)), atol=1e-12)


def test_dirac_kernel_map():
    famA = CommutingFamily.diagonal([[1, 1]])
    famB = CommutingFamily.diagonal([[0, 2]])
    kernel = decide_majorization(joint_spectral_measure(famA), joint_spectral_measure(famB)).witness
    T = ds_map_from_kernel(kernel, famA, famB)
    assert_allclose(T(famB.members[0]), np.eye(2), atol=1e-12)


def test_three_quarter_kernel_map():
    famA = CommutingFamily.diagonal([[-1, 1]])
    famB = CommutingFamily.diagonal([[-2, 2]])
    T = ds_map_from_kernel(decide_majorization(NARROW, WIDE).witness, famA, famB)
    assert_allclose(T(famB.members[0]), np.diag([-1.0, 1.0]), atol=1e-12)
    assert check_doubly_stochastic(T, seed=3).ok(1e-10)


def test_kernel_map_round_trip_on_random_pairs(rng):
    for _ in range(5):
        lam = random_eigentuples(2, 6, rng)
        famB = family_from_spectrum(random_unitary(6, rng), lam)
        famA = family_from_spectrum(random_unitary(6, rng), random_ds_matrix(6, rng) @ lam)
        kernel = decide_majorization(joint_spectral_measure(famA), joint_spectral_measure(famB)).witness
        T = ds_map_from_kernel(kernel, famA, famB)
        for a, b in zip(famA.members, famB.members):
            assert_allclose(T(b), a.data, atol=1e-7)
        assert check_doubly_stochastic(T, seed=3).ok(1e-8)


def test_kernel_map_measure_mismatch():
    famA = CommutingFamily.diagonal([[-1, 1]])
    with pytest.raises(MeasureMismatchError):
        ds_map_from_kernel(decide_majorization(NARROW, WIDE).witness, famA, famA)


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_measure_is_majorized_by_itself(dim, size, seed):
    rng = make_rng(seed)
    mu = DiscreteMeasure(rng.uniform(-3.0, 3.0, size=(size, dim)), rng.dirichlet(np.ones(size)))
    result = decide_majorization(mu, mu)
    assert result.feasible
    assert result.witness.satisfies()


def test_invalid_lp_vertex_is_an_error(monkeypatch):
    bogus = LPResult(True, np.full(4, 0.5), 0.0, 0.0, 1)
    monkeypatch.setattr("jointmaj.core.transport.solve_feasibility", lambda problem: bogus)
    with pytest.raises(SolverError, match="kernel constraints"):
        decide_majorization(NARROW, WIDE)
