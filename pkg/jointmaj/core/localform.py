"""
Equal-mass partition schemes, averaging, Dixmier averages, atom refinement
and the local-form approximation of a doubly stochastic map on an abelian
family.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg as la

from jointmaj.config import settings
from jointmaj.core.birkhoff import coupling_matrix, local_form_from_coupling
from jointmaj.core.maps import LinearMap, UnitaryMixture, concatenate_mixtures
from jointmaj.core.measures import (
    DiffuseFibre,
    DiscreteMeasure,
    HybridMeasure,
    IntervalSet,
    PiecewiseUniformMeasure,
    group_by_diameter,
    leftmost_subset,
)
from jointmaj.core.speclin import (
    CommutingFamily,
    HermitianMatrix,
    ProjectionPartition,
    as_array,
    joint_diagonalize,
)
from jointmaj.errors import (
    DimensionMismatchError,
    DivisibilityError,
    HypothesisError,
    InvalidMeasureError,
    PartitionError,
    ResolutionCapError,
)
from jointmaj.utils.rng import make_rng

logger = logging.getLogger(__name__)

# sample points per elementary interval when measuring sup errors
_SAMPLES = 17


def prescribed_cell_count(min_mass: float) -> int:
    """Smallest m with 1/m <= min_mass^2."""
    return max(1, math.ceil(1.0 / (min_mass * min_mass) - 1e-9))


# ==========================================================
# PARTITION SCHEME (1-D diffuse measures)
# ==========================================================
@dataclass(frozen=True)
class PartitionScheme:
    """
    k partitions of the support into m cells of mass 1/m each. In every
    partition the first n1 cells are the pooled leftovers; the remaining
    cells sit inside one base cell of diameter <= 1/r.
    """

    r: int
    m: int
    k: int
    n1: int
    mu: PiecewiseUniformMeasure
    base_cells: tuple[IntervalSet, ...]
    cells: tuple[tuple[IntervalSet, ...], ...]

    @property
    def small(self) -> tuple[tuple[bool, ...], ...]:
        return tuple(tuple(i >= self.n1 for i in range(self.m)) for _ in range(self.k))

    def cell_masses(self) -> np.ndarray:
        return np.array([[self.mu.mass_of(c) for c in part] for part in self.cells])

    def max_small_diameter(self) -> float:
        return max((c.diameter for part in self.cells for c in part[self.n1:]), default=0.0)

    def leftover_overlap(self) -> float:
        """Total length shared by two distinct leftover cells (0 when disjoint)."""
        leftovers = [c for part in self.cells for c in part[: self.n1]]
        overlap = 0.0
        for a in range(len(leftovers)):
            for b in range(a + 1, len(leftovers)):
                overlap += leftovers[a].intersection(leftovers[b]).length
        return overlap


def _split_equal(mu: PiecewiseUniformMeasure, region: IntervalSet, count: int, mass: float) -> list[IntervalSet]:
    """Cut region into ``count`` consecutive cells of the given mass, left to right."""
    cells = []
    rest = region
    for _ in range(count - 1):
        cell = leftmost_subset(mu.restrict(rest), mass)
        cells.append(cell)
        rest = rest.difference(cell)
    cells.append(rest)
    return cells


def _base_cells(mu: PiecewiseUniformMeasure, r: int) -> list[IntervalSet]:
    support = mu.support
    left = support.pieces[0][0]
    right = support.pieces[-1][1]
    count = max(1, math.ceil((right - left) * r - 1e-12))
    cells = []
    for index in range(count):
        window = IntervalSet([(left + index / r, min(right, left + (index + 1) / r))])
        cell = window.intersection(support)
        if not cell.is_empty and mu.mass_of(cell) > settings.TOL_MASS:
            cells.append(cell)
    return cells


def build_partition_scheme(mu: PiecewiseUniformMeasure, r: int, m: int | None = None) -> PartitionScheme:
    """
    Base cells of diameter 1/r; m from 1/m <= (smallest base mass)^2 unless
    a larger m is given; each base cell holds k_j = floor(m mass_j) cells,
    and its leftover of mass delta_j < 1/m is pooled with the others and
    re-split. Leftovers of partition t >= 2 are cut from block t of
    partition 1, which keeps all leftovers disjoint.
    """
    if r < 1:
        raise InvalidMeasureError("resolution r must be >= 1")
    mu = mu.scaled(1.0 / mu.total_mass)
    base = _base_cells(mu, r)
    masses = np.array([mu.mass_of(c) for c in base])

    prescribed = prescribed_cell_count(float(masses.min()))
    m = prescribed if m is None else max(int(m), prescribed)
    if m > settings.CAP_M:
        raise ResolutionCapError(m, settings.CAP_M)

    unit = 1.0 / m
    counts = np.floor(masses * m + 1e-9).astype(int)
    deltas = np.clip(masses - counts * unit, 0.0, None)
    n1 = int(m - counts.sum())
    k = int(counts.min())
    logger.debug("scheme r=%d: m=%d k=%d n1=%d over %d base cells", r, m, k, n1, len(base))

    first_blocks: list[list[IntervalSet]] = []
    partitions = []
    for t in range(k):
        leftovers, inner = [], []
        for j, cell in enumerate(base):
            carrier = cell if t == 0 else first_blocks[j][t]
            leftover = leftmost_subset(mu.restrict(carrier), deltas[j]) if deltas[j] > 1e-15 else IntervalSet()
            blocks = _split_equal(mu, cell.difference(leftover), int(counts[j]), unit)
            if t == 0:
                first_blocks.append(blocks)
            leftovers.append(leftover)
            inner.extend(blocks)
        pool = IntervalSet([piece for lo in leftovers for piece in lo])
        pooled = _split_equal(mu, pool, n1, unit) if n1 > 0 else []
        partitions.append(tuple(pooled + inner))

    return PartitionScheme(
        r=r, m=m, k=k, n1=n1, mu=mu, base_cells=tuple(base), cells=tuple(partitions)
    )


class ScheduleEntry(NamedTuple):
    r: int
    m: int
    k: int


@dataclass(frozen=True)
class SchemeSchedule:
    entries: tuple[ScheduleEntry, ...]


def scheme_schedule(mu: PiecewiseUniformMeasure, resolutions: Sequence[int]) -> SchemeSchedule:
    """Schemes over increasing r with m(r) kept nondecreasing."""
    entries = []
    floor_m = 1
    for r in sorted(resolutions):
        scheme = build_partition_scheme(mu, r, m=floor_m)
        floor_m = scheme.m
        entries.append(ScheduleEntry(r, scheme.m, scheme.k))
    return SchemeSchedule(tuple(entries))


# ==========================================================
# AVERAGING MAP
# ==========================================================
@dataclass(frozen=True)
class StepFunction:
    """Constant value on each elementary interval [breaks[i], breaks[i+1]]."""

    breaks: np.ndarray
    values: np.ndarray  # nan on intervals outside the support

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        index = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.values) - 1)
        return self.values[index]

    def sup_error(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        worst = 0.0
        for i, value in enumerate(self.values):
            if np.isnan(value):
                continue
            xs = np.linspace(self.breaks[i], self.breaks[i + 1], _SAMPLES)
            worst = max(worst, float(np.max(np.abs(np.asarray(f(xs), dtype=float) - value))))
        return worst


def averaging_map(
    scheme: PartitionScheme,
    f: Callable[[np.ndarray], np.ndarray],
    t_average: bool = True,
) -> StepFunction:
    """
    (1/k) sum_t sum_i beta_i^t 1_{cell_i^t} with beta_i^t = m * integral of f
    over cell_i^t. With t_average off only the first partition is used.
    """
    partitions = scheme.cells if t_average else scheme.cells[:1]
    edges = sorted({x for part in partitions for cell in part for piece in cell for x in piece})
    breaks = np.array(edges)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    values = np.zeros(len(mids))
    covered = np.zeros(len(mids), dtype=bool)

    for part in partitions:
        for cell in part:
            if cell.is_empty:
                continue
            beta = scheme.m * scheme.mu.restrict(cell).integrate(f)
            for a, b in cell:
                inside = (mids >= a) & (mids <= b)
                values[inside] += beta / len(partitions)
                covered |= inside

    values[~covered] = np.nan
    return StepFunction(breaks, values)


def averaging_contraction_check(partitions: Sequence[ProjectionPartition], b) -> float:
    """
    ||(1/k) sum_t sum_i m tau(b q_i^t) q_i^t|| / ||b||, at most 1 for
    uniform partitions; 0 for b = 0.
    """
    if not partitions:
        raise PartitionError("need at least one partition")
    m = partitions[0].m
    for part in partitions:
        if part.m != m or not part.is_uniform():
            raise PartitionError("partition not uniform")
    x = as_array(b)
    norm = float(la.norm(x, 2))
    if norm == 0.0:
        return 0.0
    averaged = sum(part.expectation(x) for part in partitions) / len(partitions)
    return float(la.norm(averaged, 2)) / norm


# ==========================================================
# DIXMIER AVERAGES
# ==========================================================
class MixingResult(NamedTuple):
    mixture: UnitaryMixture
    result: np.ndarray

    @property
    def terms(self) -> list[tuple[float, np.ndarray]]:
        return self.mixture.terms


def _cyclic_shift(size: int, power: int) -> np.ndarray:
    return np.roll(np.eye(size), power, axis=0)


def comonotone_shifts(ranks: Sequence[int]) -> list[tuple[float, tuple[int, ...]]]:
    """
    Weighted shift tuples (h_1, ..., h_m) whose i-th marginal is uniform on
    range(r_i): cut [0, 1) at every a / r_i and read h_i = floor(u r_i) on
    each piece. At most sum(r_i) - m + 1 tuples.
    """
    cuts = sorted({Fraction(a, r) for r in ranks for a in range(r + 1)})
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        out.append((float(hi - lo), tuple(math.floor(mid * r) for r in ranks)))
    return out


def block_mixing_unitaries(bases: Sequence[np.ndarray], phases: bool = True) -> UnitaryMixture:
    """
    Mixture averaging sum_i E_i diag E_i* onto sum_i mean_i E_i E_i*, where
    the isometries E_i (d x r_i) have mutually orthogonal ranges spanning
    C^d. Terms V = sum_i w^(i j) E_i C^(h_i) E_i* with C the cyclic shift,
    (h_i) from comonotone_shifts and j < number of blocks: the phases
    remove the off-diagonal blocks and the shifts flatten each diagonal
    block. Without phases only inputs diagonal in the E basis are flattened.
    """
    shifts = comonotone_shifts([basis.shape[1] for basis in bases])
    blocks = len(bases) if phases else 1
    count = len(shifts) * blocks
    if count > settings.MIXING_TERM_CAP:
        raise PartitionError(f"block mixing needs {count} terms, above cap {settings.MIXING_TERM_CAP}")

    d = bases[0].shape[0]
    phase = np.exp(2j * np.pi / blocks)
    weights = np.zeros(count)
    unitaries = np.zeros((count, d, d), dtype=complex)
    for s, (weight, powers) in enumerate(shifts):
        shifted = [e @ _cyclic_shift(e.shape[1], h) @ e.conj().T for e, h in zip(bases, powers)]
        for j in range(blocks):
            weights[s * blocks + j] = weight / blocks
            unitaries[s * blocks + j] = sum(phase ** (i * j) * u for i, u in enumerate(shifted))
    return UnitaryMixture(weights, unitaries)


def block_dixmier(b, p: ProjectionPartition) -> MixingResult:
    """
    Unitary mixture carrying b to sum_i (tau(b p_i)/tau(p_i)) p_i. Inside
    block i the unitaries act through an eigenbasis of the compression
    p_i b p_i; blocks need not be coordinate projections.
    """
    x = as_array(b)
    if x.shape[0] != p.d:
        raise DimensionMismatchError(f"matrix dimension {x.shape[0]} != partition dimension {p.d}")
    bases = []
    for index in range(p.m):
        carrier = p.range_basis(index)
        compressed = carrier.conj().T @ x @ carrier
        _, vectors = la.eigh(0.5 * (compressed + compressed.conj().T))
        bases.append(carrier @ vectors)
    mixture = block_mixing_unitaries(bases)
    return MixingResult(mixture, mixture(x))


def dixmier_average(b) -> MixingResult:
    """d conjugations U C^j U* (b = U diag U*), averaging b to tau(b) I."""
    x = b.data if isinstance(b, HermitianMatrix) else HermitianMatrix(b).data
    return block_dixmier(x, ProjectionPartition([np.eye(x.shape[0])]))


# ==========================================================
# ATOM REFINEMENT
# ==========================================================
def refine_atom(h: HybridMeasure | DiscreteMeasure, atom_index: int, alpha: float, beta: float) -> HybridMeasure:
    """Spread the chosen atom's mass uniformly over [alpha, beta]."""
    if isinstance(h, DiscreteMeasure):
        h = HybridMeasure.from_discrete(h)
    if not alpha < beta:
        raise InvalidMeasureError(f"need alpha < beta, got [{alpha}, {beta}]")
    if h.atoms is None or not 0 <= atom_index < h.atoms.size:
        raise InvalidMeasureError(f"no atom at index {atom_index}")

    atoms = h.atoms
    point = tuple(float(x) for x in atoms.points[atom_index])
    fibre = DiffuseFibre(point, PiecewiseUniformMeasure.uniform(alpha, beta, float(atoms.masses[atom_index])))
    keep = np.arange(atoms.size) != atom_index
    rest = DiscreteMeasure(atoms.points[keep], atoms.masses[keep], merge=False) if keep.any() else None
    return HybridMeasure(atoms=rest, fibres=h.fibres + (fibre,))


def refinement_interval(i: int) -> tuple[float, float]:
    """I_i = [1 + 1/(2i), 1 + 1/(2i - 1)], pairwise disjoint for i >= 1."""
    return 1.0 + 1.0 / (2 * i), 1.0 + 1.0 / (2 * i - 1)


def diffuse_refinement(mu: DiscreteMeasure) -> HybridMeasure:
    """Refine every atom in order, atom i onto I_i."""
    h = HybridMeasure.from_discrete(mu)
    for i in range(1, mu.size + 1):
        h = refine_atom(h, 0, *refinement_interval(i))
    return h


# ==========================================================
# LOCAL-FORM APPROXIMATION
# ==========================================================
@dataclass(frozen=True)
class LocalFormApproximation:
    r: int
    rho: UnitaryMixture
    errors: tuple[float, ...]
    bound: float
    within_bound: bool
    metadata: dict = field(default_factory=dict)

    @property
    def rho_terms(self) -> list[tuple[float, np.ndarray]]:
        return self.rho.terms


class _ColumnScheme(NamedTuple):
    partitions: list[list[list[int]]]
    k: int
    n1: int


def _largest_divisor_at_most(d: int, bound: int) -> int:
    return max(q for q in range(1, min(d, bound) + 1) if d % q == 0)


def _column_cells(eigentuples: np.ndarray, d: int, r: int) -> list[np.ndarray]:
    """Eigenbasis columns grouped into cells of joint-spectrum diameter <= 1/r."""
    measure = DiscreteMeasure(eigentuples, np.full(d, 1.0 / d))
    cells = group_by_diameter(measure.points, 1.0 / r)
    gaps = np.max(np.abs(eigentuples[:, None, :] - measure.points[None, :, :]), axis=2)
    labels = np.argmin(gaps, axis=1)
    atom_cell = np.empty(measure.size, dtype=int)
    for j, cell in enumerate(cells):
        atom_cell[cell] = j
    return [np.flatnonzero(atom_cell[labels] == j) for j in range(len(cells))]


def _column_scheme(cells: list[np.ndarray], size: int, m: int, k: int) -> _ColumnScheme:
    """
    Index version of build_partition_scheme: groups of ``size`` columns, the
    pooled leftover groups first, leftovers of partition t >= 2 taken from
    block t of partition 1.
    """
    counts = [len(c) // size for c in cells]
    deltas = [len(c) - q * size for c, q in zip(cells, counts)]
    n1 = m - sum(counts)
    partitions = []
    first_rest: list[list[int]] = []
    for t in range(k):
        pool, inner = [], []
        for j, cols in enumerate(cells):
            cols = list(cols)
            if t == 0:
                leftover = cols[: deltas[j]]
            else:
                leftover = first_rest[j][t * size: t * size + deltas[j]]
            rest = [c for c in cols if c not in set(leftover)]
            if t == 0:
                first_rest.append(rest)
            pool.extend(leftover)
            inner.extend(rest[q * size:(q + 1) * size] for q in range(counts[j]))
        pool.sort()
        pooled = [pool[q * size:(q + 1) * size] for q in range(n1)]
        partitions.append(pooled + inner)
    return _ColumnScheme(partitions, k, n1)


def local_form_approximate(
    T: LinearMap,
    famA: CommutingFamily,
    famB: CommutingFamily,
    r: int,
    seed: int | None = None,
) -> LocalFormApproximation:
    """
    Approximate T on the family b by a convex combination of unitary
    conjugations: average over pairs (j, t) of rho_{j,t} o mix_t, where
    mix_t flattens b onto the t-th equal-rank partition q^t of famB's
    eigenspaces and rho_{j,t} is the Birkhoff local form of the coupling
    between p^j (famA side) and q^t.
    """
    seed = settings.SEED if seed is None else seed
    if r < 1:
        raise InvalidMeasureError("resolution r must be >= 1")
    if famA.n != famB.n or famA.d != famB.d:
        raise DimensionMismatchError("families must share n and d")
    if T.d != famB.d:
        raise DimensionMismatchError(f"map acts on d={T.d}, families on d={famB.d}")

    d = famB.d
    scale = max(1.0, famB.max_norm)
    images = [T(b) for b in famB.members]
    mismatch = max(float(np.max(np.abs(x - a.data))) for x, a in zip(images, famA.members))
    if mismatch > settings.TOL_FC * scale:
        raise HypothesisError(f"T(b_i) differs from a_i by {mismatch:.3e}")

    diag_b = joint_diagonalize(famB, seed)
    diag_a = joint_diagonalize(famA, seed)
    cells_b = _column_cells(diag_b.eigentuples, d, r)
    cells_a = _column_cells(diag_a.eigentuples, d, r)

    prescribed = max(
        prescribed_cell_count(min(len(c) for c in cells_b) / d),
        prescribed_cell_count(min(len(c) for c in cells_a) / d),
    )
    m = _largest_divisor_at_most(d, prescribed)
    if m <= 1:
        raise DivisibilityError()
    size = d // m
    k_b = min(len(c) // size for c in cells_b)
    k_a = min(len(c) // size for c in cells_a)
    k = max(1, min(k_a, k_b))

    scheme_b = _column_scheme(cells_b, size, m, k)
    scheme_a = _column_scheme(cells_a, size, m, k)
    q_parts = [ProjectionPartition.from_basis(diag_b.basis, groups) for groups in scheme_b.partitions]
    p_parts = [ProjectionPartition.from_basis(diag_a.basis, groups) for groups in scheme_a.partitions]
    mixers = [
        block_mixing_unitaries([diag_b.basis[:, g] for g in groups], phases=False)
        for groups in scheme_b.partitions
    ]

    pairs = [(j, t) for j in range(k) for t in range(k)]
    relaxation = 0.0
    subsampled = k > settings.DOUBLE_AVERAGE_CAP
    if subsampled:
        rng = make_rng(seed, 0xD0)
        chosen = rng.choice(len(pairs), size=min(settings.DOUBLE_AVERAGE_SAMPLES, len(pairs)), replace=False)
        pairs = [pairs[i] for i in sorted(chosen)]
        relaxation = 2.0 * scale / math.sqrt(len(pairs))

    b0 = famB.members[0].data
    components = []
    for j, t in pairs:
        q = q_parts[t]
        gamma = coupling_matrix(T, p_parts[j], q)
        beta = m * np.einsum("ab,kba->k", b0, q.blocks).real / d
        form = local_form_from_coupling(gamma, p_parts[j], q, beta)
        components.append((1.0 / len(pairs), form.rho.after(mixers[t])))
    rho = concatenate_mixtures(components).merged()

    errors = tuple(float(la.norm(x - rho(b), 2)) for x, b in zip(images, famB.members))
    bound = 3.0 * (1.0 + famB.max_norm) / r + relaxation
    within = all(e <= bound + settings.TOL_FC for e in errors)
    if not within:
        logger.warning("local form errors %s exceed bound %.3e at r=%d", errors, bound, r)

    metadata = {
        "m": m,
        "block_rank": size,
        "k": k,
        "k_a": k_a,
        "k_b": k_b,
        "n1_a": scheme_a.n1,
        "n1_b": scheme_b.n1,
        "pairs": len(pairs),
        "subsampled": subsampled,
        "relaxation": relaxation,
        "terms": len(rho),
    }
    return LocalFormApproximation(r, rho, errors, bound, within, metadata)
