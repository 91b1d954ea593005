"""
Commuting Hermitian families and their joint spectral data.

Matrices carry the normalized trace tau(x) = tr(x)/d. A family of pairwise
commuting Hermitian matrices is diagonalized in one orthonormal basis; the
joint eigenvalue tuples, weighted by multiplicity/d, form its joint spectral
measure.
"""
import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg as la

from jointmaj.config import settings
from jointmaj.core.measures import DiscreteMeasure, locate_atoms, measures_equal
from jointmaj.errors import (
    DiagonalizationError,
    DimensionMismatchError,
    InvalidMatrixError,
    NotAbelianError,
    PartitionError,
)
from jointmaj.utils.rng import make_rng

logger = logging.getLogger(__name__)

# Depth limit for re-diagonalizing degenerate clusters with fresh coefficients
_MAX_REFINE_DEPTH = 8


def _frozen_complex(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def as_array(x) -> np.ndarray:
    if isinstance(x, HermitianMatrix):
        return x.data
    return np.asarray(x, dtype=complex)


def trace(x) -> float:
    """Normalized trace tau(x) = tr(x)/d, real part."""
    a = as_array(x)
    return float(np.trace(a).real / a.shape[0])


def unitarity_residual(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


# ==========================================================
# HERMITIAN MATRIX / COMMUTING FAMILY
# ==========================================================
class HermitianMatrix:
    """d x d Hermitian matrix, symmetrized on construction."""

    __slots__ = ("data",)

    def __init__(self, entries):
        a = np.asarray(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InvalidMatrixError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] > settings.CAP_D:
            raise InvalidMatrixError(f"dimension {a.shape[0]} exceeds cap {settings.CAP_D}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrixError("matrix entries must be finite")
        scale = max(1.0, float(np.max(np.abs(a))))
        skew = float(np.max(np.abs(a - a.conj().T)))
        if skew > settings.TOL_HERM * scale:
            raise InvalidMatrixError(f"matrix is not Hermitian (|A - A*| = {skew:.3e})")
        self.data = _frozen_complex(0.5 * (a + a.conj().T))

    @classmethod
    def diag(cls, values) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def d(self) -> int:
        return int(self.data.shape[0])

    @property
    def norm(self) -> float:
        """Operator norm."""
        return float(np.max(np.abs(la.eigvalsh(self.data))))

    def __repr__(self) -> str:
        return f"HermitianMatrix(d={self.d})"


class CommutingFamily:
    """n pairwise-commuting Hermitian matrices of a common size d."""

    __slots__ = ("members",)

    def __init__(self, members: Sequence):
        members = tuple(m if isinstance(m, HermitianMatrix) else HermitianMatrix(m) for m in members)
        if not members:
            raise InvalidMatrixError("a family needs at least one member")
        d = members[0].d
        if any(m.d != d for m in members):
            raise DimensionMismatchError("family members must share one dimension")

        stack = np.stack([m.data for m in members])
        scale = max(1.0, float(np.max(np.abs(stack))))
        tolerance = settings.TOL_COMM * scale * scale
        worst = 0.0
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                comm = stack[i] @ stack[j] - stack[j] @ stack[i]
                worst = max(worst, float(np.max(np.abs(comm))))
        if worst > tolerance:
            raise NotAbelianError(worst, tolerance)
        self.members = members

    @classmethod
    def diagonal(cls, rows) -> "CommutingFamily":
        """Family of diagonal matrices, one row of diagonal entries per member."""
        return cls([HermitianMatrix.diag(row) for row in rows])

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def d(self) -> int:
        return self.members[0].d

    @property
    def stack(self) -> np.ndarray:
        return np.stack([m.data for m in self.members])

    @property
    def max_norm(self) -> float:
        return max(m.norm for m in self.members)

    def conjugated(self, w: np.ndarray) -> "CommutingFamily":
        """The family (w* a_i w)."""
        w = np.asarray(w, dtype=complex)
        return CommutingFamily([w.conj().T @ m.data @ w for m in self.members])

    def traces(self) -> np.ndarray:
        return np.array([trace(m) for m in self.members])

    def __repr__(self) -> str:
        return f"CommutingFamily(n={self.n}, d={self.d})"


def normal_pair(x) -> CommutingFamily:
    """The commuting pair (Re x, Im x) of a normal matrix x."""
    a = np.asarray(x, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a))))
    defect = float(np.max(np.abs(a @ a.conj().T - a.conj().T @ a)))
    if defect > settings.TOL_COMM * scale * scale:
        raise InvalidMatrixError(f"matrix is not normal (|xx* - x*x| = {defect:.3e})")
    return CommutingFamily([0.5 * (a + a.conj().T), -0.5j * (a - a.conj().T)])


# ==========================================================
# SIMULTANEOUS DIAGONALIZATION
# ==========================================================
@dataclass(frozen=True)
class JointDiagonalization:
    basis: np.ndarray        # (d, d) unitary, columns are joint eigenvectors
    eigentuples: np.ndarray  # (d, n), row c is the joint eigenvalue of column c
    residual: float

    @property
    def d(self) -> int:
        return int(self.basis.shape[0])


def _scalar_defect(stack: np.ndarray, cols: np.ndarray) -> float:
    compressed = np.einsum("dc,nde,ef->ncf", cols.conj(), stack, cols)
    means = np.einsum("ncc->n", compressed) / cols.shape[1]
    eye = np.eye(cols.shape[1])
    return float(np.max(np.abs(compressed - means[:, None, None] * eye)))


def _refine(stack: np.ndarray, cols: np.ndarray, rng: np.random.Generator, tol: float, depth: int) -> np.ndarray:
    """
    Diagonalize a random real combination of the compressions to span(cols);
    clusters of the combination's spectrum that are not yet joint
    eigenspaces are refined again with fresh coefficients.
    """
    coeffs = rng.normal(size=stack.shape[0])
    combo = np.einsum("n,nde->de", coeffs, stack)
    compressed = cols.conj().T @ combo @ cols
    compressed = 0.5 * (compressed + compressed.conj().T)
    values, vectors = la.eigh(compressed)
    basis = cols @ vectors

    gap = settings.CLUSTER_GAP * max(1.0, float(np.max(np.abs(values))))
    breaks = np.flatnonzero(np.diff(values) > gap) + 1
    for cluster in np.split(np.arange(len(values)), breaks):
        if len(cluster) < 2 or depth >= _MAX_REFINE_DEPTH:
            continue
        sub = basis[:, cluster]
        if _scalar_defect(stack, sub) > tol:
            basis[:, cluster] = _refine(stack, sub, rng, tol, depth + 1)
    return basis


def _diagonal_residual(stack: np.ndarray, basis: np.ndarray) -> tuple[np.ndarray, float]:
    rotated = np.einsum("dc,nde,ef->ncf", basis.conj(), stack, basis)
    tuples = np.einsum("ncc->nc", rotated).real
    off = rotated.copy()
    idx = np.arange(basis.shape[0])
    off[:, idx, idx] -= tuples
    return tuples.T, float(np.max(np.abs(off)))


def joint_diagonalize(fam: CommutingFamily, seed: int | None = None) -> JointDiagonalization:
    """
    One unitary U with U* a_i U diagonal for every member, and the joint
    eigenvalue tuples. Columns are ordered lexicographically by eigentuple,
    ties by original column index. Deterministic given the seed.
    """
    seed = settings.SEED if seed is None else seed
    stack = fam.stack
    d = fam.d
    scale = max(1.0, float(np.max(np.abs(stack))))
    tol = settings.TOL_DIAG * scale

    residual = np.inf
    for attempt in range(2):
        rng = make_rng(seed, attempt)
        basis = _refine(stack, np.eye(d, dtype=complex), rng, tol, 0)
        tuples, residual = _diagonal_residual(stack, basis)
        if residual <= tol and unitarity_residual(basis) <= settings.TOL_UNIT:
            keys = [np.arange(d)] + [tuples[:, j] for j in range(fam.n - 1, -1, -1)]
            order = np.lexsort(keys)
            return JointDiagonalization(
                basis=_frozen_complex(basis[:, order]),
                eigentuples=np.array(tuples[order]),
                residual=residual,
            )
        logger.debug("diagonalization attempt %d residual %.3e, retrying", attempt, residual)

    raise DiagonalizationError(residual, tol)


def joint_spectral_measure(fam: CommutingFamily, seed: int | None = None) -> DiscreteMeasure:
    """Distinct eigentuples, each weighted by multiplicity/d."""
    diag = joint_diagonalize(fam, seed)
    return DiscreteMeasure(diag.eigentuples, np.full(fam.d, 1.0 / fam.d))


def functional_calculus(
    fam: CommutingFamily,
    f: Callable[[np.ndarray], float],
    seed: int | None = None,
) -> HermitianMatrix:
    """f(a_1, ..., a_n) = U diag(f(eigentuple_c)) U*."""
    diag = joint_diagonalize(fam, seed)
    values = np.array([float(f(t)) for t in diag.eigentuples])
    if not np.all(np.isfinite(values)):
        raise InvalidMatrixError("f is not finite on the joint spectrum")
    u = diag.basis
    return HermitianMatrix((u * values) @ u.conj().T)


# ==========================================================
# PROJECTION PARTITIONS / PINCHING
# ==========================================================
class ProjectionPartition:
    """Orthogonal projections p_1, ..., p_m summing to the identity."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        stack = np.asarray([as_array(b) for b in blocks], dtype=complex)
        if stack.ndim != 3 or stack.shape[0] == 0 or stack.shape[1] != stack.shape[2]:
            raise PartitionError("a partition needs at least one square block")
        d = stack.shape[1]
        tol = settings.TOL_PROJ * d
        for index, p in enumerate(stack):
            if np.max(np.abs(p - p.conj().T)) > tol or np.max(np.abs(p @ p - p)) > tol:
                raise PartitionError(f"block {index} is not an orthogonal projection")
            if np.trace(p).real < 0.5:
                raise PartitionError(f"block {index} is zero")
        # projections summing to I are automatically mutually orthogonal
        if np.max(np.abs(stack.sum(axis=0) - np.eye(d))) > tol * len(stack):
            raise PartitionError("blocks do not sum to the identity")
        self.blocks = _frozen_complex(stack)

    @classmethod
    def coordinate(cls, d: int, groups: Sequence[Sequence[int]]) -> "ProjectionPartition":
        """Coordinate projections onto the given groups of basis indices."""
        flat = sorted(int(i) for g in groups for i in g)
        if flat != list(range(d)):
            raise PartitionError("index groups must cover 0..d-1 exactly once")
        blocks = []
        for group in groups:
            p = np.zeros((d, d), dtype=complex)
            p[list(group), list(group)] = 1.0
            blocks.append(p)
        return cls(blocks)

    @classmethod
    def from_basis(cls, u: np.ndarray, groups: Sequence[Sequence[int]]) -> "ProjectionPartition":
        """Projections onto spans of groups of columns of a unitary."""
        u = np.asarray(u, dtype=complex)
        flat = sorted(int(i) for g in groups for i in g)
        if flat != list(range(u.shape[0])):
            raise PartitionError("column groups must cover every column exactly once")
        return cls([u[:, list(g)] @ u[:, list(g)].conj().T for g in groups])

    @property
    def d(self) -> int:
        return int(self.blocks.shape[1])

    @property
    def m(self) -> int:
        return int(self.blocks.shape[0])

    @property
    def traces(self) -> np.ndarray:
        return np.einsum("kii->k", self.blocks).real / self.d

    @property
    def ranks(self) -> np.ndarray:
        return np.rint(self.traces * self.d).astype(int)

    def is_uniform(self) -> bool:
        return bool(np.all(np.abs(self.traces - 1.0 / self.m) <= settings.TOL_PROJ * self.d))

    def range_basis(self, index: int) -> np.ndarray:
        """Orthonormal basis (d x rank) of the range of block ``index``."""
        p = self.blocks[index]
        diag = np.diag(p).real
        off = p - np.diag(np.diag(p))
        if np.max(np.abs(off)) <= settings.TOL_PROJ and np.all(
            np.minimum(np.abs(diag), np.abs(diag - 1)) <= settings.TOL_PROJ
        ):
            return np.eye(self.d, dtype=complex)[:, diag > 0.5]
        values, vectors = la.eigh(0.5 * (p + p.conj().T))
        return vectors[:, values > 0.5]

    def expectation(self, x) -> np.ndarray:
        """Sum_j (tau(x p_j)/tau(p_j)) p_j."""
        a = as_array(x)
        weights = np.einsum("ij,kji->k", a, self.blocks) / self.d
        coeffs = weights / self.traces
        return np.einsum("k,kij->ij", coeffs, self.blocks)

    def __len__(self) -> int:
        return self.m


def pinch(fam: CommutingFamily, part: ProjectionPartition) -> CommutingFamily:
    """Trace-preserving conditional expectation onto the span of the partition."""
    if part.d != fam.d:
        raise DimensionMismatchError(f"partition dimension {part.d} != family dimension {fam.d}")
    return CommutingFamily([part.expectation(m) for m in fam.members])


# ==========================================================
# APPROXIMATE UNITARY EQUIVALENCE
# ==========================================================
class EquivalenceResult(NamedTuple):
    equivalent: bool
    witness: np.ndarray | None


def approx_unitarily_equivalent(
    famA: CommutingFamily,
    famB: CommutingFamily,
    seed: int | None = None,
) -> EquivalenceResult:
    """
    True iff the joint spectral measures agree; the witness w = U_B P U_A*
    carries each eigenvector of famA onto one of famB with the same
    eigentuple, so that w* b_i w = a_i.
    """
    if famA.n != famB.n or famA.d != famB.d:
        raise DimensionMismatchError(
            f"families differ in shape: (n={famA.n}, d={famA.d}) vs (n={famB.n}, d={famB.d})"
        )
    diag_a = joint_diagonalize(famA, seed)
    diag_b = joint_diagonalize(famB, seed)
    mu_a = DiscreteMeasure(diag_a.eigentuples, np.full(famA.d, 1.0 / famA.d))
    mu_b = DiscreteMeasure(diag_b.eigentuples, np.full(famB.d, 1.0 / famB.d))
    if not measures_equal(mu_a, mu_b):
        return EquivalenceResult(False, None)

    atoms_a = locate_atoms(mu_b, diag_a.eigentuples)
    atoms_b = locate_atoms(mu_b, diag_b.eigentuples)
    d = famA.d
    perm = np.empty(d, dtype=int)
    for atom in range(mu_b.size):
        cols_a = np.flatnonzero(atoms_a == atom)
        cols_b = np.flatnonzero(atoms_b == atom)
        if len(cols_a) != len(cols_b):
            return EquivalenceResult(False, None)
        perm[cols_a] = cols_b

    w = diag_b.basis[:, perm] @ diag_a.basis.conj().T
    worst = max(
        float(la.norm(w.conj().T @ b.data @ w - a.data, 2))
        for a, b in zip(famA.members, famB.members)
    )
    if worst > settings.TOL_EQUIV:
        logger.warning("equal spectra but witness residual %.3e above tolerance", worst)
        return EquivalenceResult(False, None)
    return EquivalenceResult(True, w)
