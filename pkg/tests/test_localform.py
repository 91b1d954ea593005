import numpy as np
import pytest
from numpy.testing import assert_allclose

from jointmaj.core.localform import (
    averaging_contraction_check,
    averaging_map,
    block_dixmier,
    build_partition_scheme,
    comonotone_shifts,
    diffuse_refinement,
    dixmier_average,
    local_form_approximate,
    prescribed_cell_count,
    refine_atom,
    refinement_interval,
    scheme_schedule,
)
from jointmaj.core.maps import Conjugation, IdentityMap, PinchingMap
from jointmaj.core.measures import DiscreteMeasure, IntervalSet, PiecewiseUniformMeasure, measures_equal
from jointmaj.core.speclin import CommutingFamily, ProjectionPartition, joint_spectral_measure, trace
from jointmaj.core.transport import decide_majorization, ds_map_from_kernel
from jointmaj.errors import DivisibilityError, HypothesisError, InvalidMeasureError, ResolutionCapError
from jointmaj.utils.random_instances import random_hermitian, random_partition, random_piecewise_linear

UNIFORM = PiecewiseUniformMeasure.uniform(0.0, 1.0)


def three_quarter_case():
    famA = CommutingFamily.diagonal([[-1] * 4 + [1] * 4])
    famB = CommutingFamily.diagonal([[-2] * 4 + [2] * 4])
    kernel = decide_majorization(joint_spectral_measure(famA), joint_spectral_measure(famB)).witness
    return ds_map_from_kernel(kernel, famA, famB), famA, famB


# --------------------------------------------------
# PARTITION SCHEMES
# --------------------------------------------------
def test_prescribed_cell_count():
    assert prescribed_cell_count(0.5) == 4
    assert prescribed_cell_count(1 / 3) == 9
    assert prescribed_cell_count(1.0) == 1


def test_uniform_half_cells():
    scheme = build_partition_scheme(UNIFORM, 2)
    assert (scheme.m, scheme.k, scheme.n1) == (4, 2, 0)
    assert [c.to_list() for c in scheme.base_cells] == [[[0.0, 0.5]], [[0.5, 1.0]]]
    assert scheme.max_small_diameter() <= 0.5
    assert_allclose(scheme.cell_masses(), 0.25)


def test_uniform_third_cells():
    scheme = build_partition_scheme(UNIFORM, 3)
    assert scheme.m >= 9
    assert_allclose(scheme.cell_masses(), 1.0 / scheme.m, atol=1e-9)


def test_uneven_density_invariants():
    mu = PiecewiseUniformMeasure([(0.0, 0.5, 1.0), (0.5, 0.75, 2.0)])
    for r in (1, 2, 3, 5):
        scheme = build_partition_scheme(mu, r)
        assert_allclose(scheme.cell_masses(), 1.0 / scheme.m, atol=1e-9)
        assert scheme.max_small_diameter() <= 1.0 / r + 1e-12
        assert scheme.leftover_overlap() <= 1e-12
        for part in scheme.cells:
            covered = IntervalSet([piece for cell in part for piece in cell])
            assert covered.length == pytest.approx(0.75)


def test_unnormalized_measure_is_rescaled():
    scheme = build_partition_scheme(PiecewiseUniformMeasure.uniform(0.0, 1.0, mass=5.0), 2)
    assert_allclose(scheme.cell_masses(), 0.25)


def test_resolution_cap(monkeypatch):
    from jointmaj.config import settings

    monkeypatch.setattr(settings, "CAP_M", 10)
    with pytest.raises(ResolutionCapError, match="resolution cap"):
        build_partition_scheme(UNIFORM, 4)


def test_schedule_keeps_m_nondecreasing():
    schedule = scheme_schedule(PiecewiseUniformMeasure([(0.0, 0.5, 1.0), (0.5, 0.75, 2.0)]), [4, 1, 2])
    assert [e.r for e in schedule.entries] == [1, 2, 4]
    ms = [e.m for e in schedule.entries]
    assert ms == sorted(ms)


# --------------------------------------------------
# AVERAGING MAP
# --------------------------------------------------
def test_averaging_constant_is_exact():
    step = averaging_map(build_partition_scheme(UNIFORM, 3), lambda x: np.full_like(x, 2.5))
    assert step.sup_error(lambda x: np.full_like(x, 2.5)) <= 1e-12


def test_averaging_identity_gives_cell_means():
    scheme = build_partition_scheme(UNIFORM, 2)
    step = averaging_map(scheme, lambda x: x)
    assert_allclose(step(np.array([0.1, 0.3, 0.6, 0.9])), [0.125, 0.375, 0.625, 0.875])
    assert step.sup_error(lambda x: x) <= 0.5


def test_averaging_cell_constant_indicator():
    scheme = build_partition_scheme(UNIFORM, 2)
    indicator = lambda x: (np.asarray(x) < 0.5).astype(float)  # noqa: E731
    step = averaging_map(scheme, indicator, t_average=False)
    assert_allclose(step(np.array([0.1, 0.4, 0.6, 0.9])), [1, 1, 0, 0])


def test_averaging_bound_on_random_lipschitz_functions(rng):
    for _ in range(10):
        f = random_piecewise_linear(rng, float(rng.uniform(1, 10)))
        errors = {}
        for r in (2, 4, 8):
            scheme = build_partition_scheme(UNIFORM, r)
            errors[r] = averaging_map(scheme, f).sup_error(f)
            assert errors[r] <= f.lipschitz / r + 2 * f.sup_norm / scheme.k + 1e-9
        assert errors[8] < errors[2]


def test_contraction_check(rng):
    assert averaging_contraction_check([ProjectionPartition([np.eye(4)])], np.eye(4)) == pytest.approx(1.0)
    b = random_hermitian(8, rng)
    ratio = averaging_contraction_check([ProjectionPartition([np.eye(8)])], b)
    assert ratio == pytest.approx(abs(trace(b)) / np.linalg.norm(b, 2))
    partitions = [ProjectionPartition.coordinate(8, [[0, 1, 2, 3], [4, 5, 6, 7]]),
                  ProjectionPartition.coordinate(8, [[0, 2, 4, 6], [1, 3, 5, 7]])]
    assert averaging_contraction_check(partitions, b) <= 1 + 1e-7
    assert averaging_contraction_check(partitions, np.zeros((8, 8))) == 0.0


# --------------------------------------------------
# DIXMIER AVERAGES
# --------------------------------------------------
def test_dixmier_of_diagonal():
    mixed = dixmier_average(np.diag([1.0, 2.0, 3.0]))
    assert_allclose(mixed.result, 2 * np.eye(3), atol=1e-12)
    assert len(mixed.mixture) == 3


def test_dixmier_fixes_identity():
    mixed = dixmier_average(np.eye(4))
    assert_allclose(mixed.result, np.eye(4), atol=1e-12)
    for _, u in mixed.terms:
        assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


def test_dixmier_of_random_hermitian(rng):
    b = random_hermitian(6, rng)
    assert np.linalg.norm(dixmier_average(b).result - trace(b) * np.eye(6), 2) <= 1e-7


def test_block_dixmier():
    part = ProjectionPartition.coordinate(4, [[0, 1], [2, 3]])
    mixed = block_dixmier(np.diag([1.0, 2.0, 3.0, 4.0]), part)
    assert_allclose(mixed.result, np.diag([1.5, 1.5, 3.5, 3.5]), atol=1e-12)
    scalar_blocks = np.diag([5.0, 5.0, -1.0, -1.0])
    assert_allclose(block_dixmier(scalar_blocks, part).result, scalar_blocks, atol=1e-12)


def test_block_dixmier_on_rotated_partition(rng):
    b = random_hermitian(6, rng)
    part = random_partition(6, rng, uniform=True)
    assert_allclose(block_dixmier(b, part).result, part.expectation(b), atol=1e-7)


def test_block_dixmier_with_coprime_block_ranks(rng):
    sizes = [5, 7, 9, 11]
    order = rng.permutation(32)
    groups = [sorted(order[sum(sizes[:i]):sum(sizes[:i + 1])].tolist()) for i in range(len(sizes))]
    part = ProjectionPartition.coordinate(32, groups)
    b = random_hermitian(32, rng)
    mixed = block_dixmier(b, part)
    assert len(mixed.mixture) <= len(sizes) * (sum(sizes) - len(sizes) + 1)
    assert np.linalg.norm(mixed.result - part.expectation(b), 2) <= 1e-7


@pytest.mark.parametrize("ranks", [[1], [3], [2, 3], [5, 7, 9, 11], [4, 4, 4]])
def test_comonotone_shifts_have_uniform_marginals(ranks):
    shifts = comonotone_shifts(ranks)
    assert len(shifts) <= sum(ranks) - len(ranks) + 1
    assert sum(w for w, _ in shifts) == pytest.approx(1.0)
    for i, r in enumerate(ranks):
        marginal = np.zeros(r)
        for w, powers in shifts:
            marginal[powers[i]] += w
        assert_allclose(marginal, np.full(r, 1.0 / r), atol=1e-12)


# --------------------------------------------------
# REFINEMENT
# --------------------------------------------------
def test_refine_single_atom():
    h = refine_atom(DiscreteMeasure.dirac([0.0]), 0, 1.0, 2.0)
    assert h.is_diffuse
    assert h.fibres[0].density.intervals == [(1.0, 2.0, 1.0)]


def test_refinement_schedule_is_disjoint():
    assert refinement_interval(1) == (1.5, 2.0)
    assert refinement_interval(2) == pytest.approx((1.25, 4 / 3))
    mu = DiscreteMeasure([[0.0], [1.0], [5.0]], [0.2, 0.3, 0.5])
    h = diffuse_refinement(mu)
    assert h.is_diffuse
    assert h.total_mass == pytest.approx(1.0)
    supports = [f.density.support for f in h.fibres]
    for i in range(len(supports)):
        for j in range(i + 1, len(supports)):
            assert supports[i].intersection(supports[j]).is_empty


def test_refine_drops_one_atom_per_call():
    mu = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    h = refine_atom(mu, 1, 1.0, 2.0)
    assert h.atom_count == 1
    assert h.total_mass == pytest.approx(1.0)


@pytest.mark.parametrize("index, alpha, beta", [(3, 1.0, 2.0), (0, 2.0, 1.0)])
def test_refine_errors(index, alpha, beta):
    with pytest.raises(InvalidMeasureError):
        refine_atom(DiscreteMeasure.dirac([0.0]), index, alpha, beta)


def test_refine_fully_diffuse_has_no_atom():
    h = refine_atom(DiscreteMeasure.dirac([0.0]), 0, 1.0, 2.0)
    with pytest.raises(InvalidMeasureError):
        refine_atom(h, 0, 3.0, 4.0)


# --------------------------------------------------
# LOCAL-FORM APPROXIMATION
# --------------------------------------------------
def test_exact_conjugation_case():
    famB = CommutingFamily.diagonal([[1, 1, 3, 3]])
    w = np.eye(4)[:, [2, 3, 0, 1]]
    T = Conjugation(w)
    famA = CommutingFamily([T(famB.members[0])])
    result = local_form_approximate(T, famA, famB, 1, seed=7)
    assert max(result.errors) <= 1e-7
    assert len(result.rho) == 1
    assert result.rho.weights[0] == pytest.approx(1.0)
    assert result.metadata["terms"] == 1


def test_pinching_case():
    famB = CommutingFamily.diagonal([[0, 0, 3, 3]])
    T = PinchingMap(ProjectionPartition.coordinate(4, [[0, 1], [2, 3]]))
    for r in (1, 2):
        assert max(local_form_approximate(T, famB, famB, r, seed=7).errors) <= 1e-7


def test_three_quarter_pipeline():
    T, famA, famB = three_quarter_case()
    worst = []
    for r in (1, 2, 4):
        result = local_form_approximate(T, famA, famB, r, seed=7)
        assert result.within_bound
        assert max(result.errors) <= 3.0 / r * (1 + famB.max_norm)
        assert result.metadata["m"] == 4 and not result.metadata["subsampled"]
        worst.append(max(result.errors))
    assert all(b <= a + 1e-7 for a, b in zip(worst, worst[1:]))
    for _, u in result.rho_terms:
        assert_allclose(u @ u.conj().T, np.eye(8), atol=1e-8)


def test_divisibility_failure():
    fam = CommutingFamily.diagonal([[0, 0, 0, 0, 3, 3, 3]])
    with pytest.raises(DivisibilityError, match="no uniform refinement"):
        local_form_approximate(IdentityMap(7), fam, fam, 1, seed=7)


def test_hypothesis_checked():
    famA = CommutingFamily.diagonal([[0, 1]])
    famB = CommutingFamily.diagonal([[1, 0]])
    with pytest.raises(HypothesisError):
        local_form_approximate(IdentityMap(2), famA, famB, 1)


def test_rho_is_convex_mixture_of_unitaries():
    T, famA, famB = three_quarter_case()
    rho = local_form_approximate(T, famA, famB, 2, seed=7).rho
    mu = joint_spectral_measure(CommutingFamily([rho(famB.members[0])]))
    assert measures_equal(mu, joint_spectral_measure(famA), tol_point=1e-7)
