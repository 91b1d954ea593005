"""
Doubly stochastic matrices, their Birkhoff-von Neumann decomposition and
the local form  sum_i alpha_i p_i = rho(sum_i beta_i q_i).
"""
import logging
from dataclasses import dataclass

import numpy as np

from jointmaj.config import settings
from jointmaj.core.maps import LinearMap, UnitaryMixture
from jointmaj.core.matching import HopcroftKarp
from jointmaj.core.speclin import ProjectionPartition
from jointmaj.errors import (
    DimensionMismatchError,
    HypothesisError,
    InvalidMatrixError,
    LocalFormError,
    PartitionError,
    RankMismatchError,
    SubstochasticError,
)

logger = logging.getLogger(__name__)


class DoublyStochasticMatrix:
    __slots__ = ("entries",)

    def __init__(self, entries):
        D = np.array(entries, dtype=float)
        tol = settings.TOL_DS
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
            raise InvalidMatrixError(f"expected a square matrix, got shape {D.shape}")
        if not np.all(np.isfinite(D)) or np.any(D < -tol):
            raise InvalidMatrixError("entries must be finite and nonnegative")
        if np.max(np.abs(D.sum(axis=1) - 1)) > tol or np.max(np.abs(D.sum(axis=0) - 1)) > tol:
            raise InvalidMatrixError("row and column sums must equal 1")
        D = np.clip(D, 0.0, None)
        D.setflags(write=False)
        self.entries = D

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])


def permutation_matrix(sigma) -> np.ndarray:
    """P with P[i, sigma[i]] = 1."""
    sigma = np.asarray(sigma, dtype=int)
    P = np.zeros((len(sigma), len(sigma)))
    P[np.arange(len(sigma)), sigma] = 1.0
    return P


@dataclass(frozen=True)
class BirkhoffDecomposition:
    m: int
    etas: tuple[float, ...]
    sigmas: tuple[tuple[int, ...], ...]  # sigmas[k][i] = column matched to row i

    def __len__(self) -> int:
        return len(self.etas)

    @property
    def terms(self) -> list[tuple[float, tuple[int, ...]]]:
        return list(zip(self.etas, self.sigmas))

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.m, self.m))
        rows = np.arange(self.m)
        for eta, sigma in self.terms:
            out[rows, list(sigma)] += eta
        return out

    def residual(self, D: DoublyStochasticMatrix) -> float:
        return float(np.max(np.abs(self.reconstruct() - D.entries)))


def max_terms(m: int) -> int:
    return (m - 1) ** 2 + 1


def _caratheodory(etas: np.ndarray, sigmas: list[np.ndarray], m: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """
    Drop terms until at most (m-1)^2 + 1 remain, moving weight along null
    vectors of the affinely dependent permutation matrices.
    """
    limit = max_terms(m)
    etas = etas.copy()
    sigmas = list(sigmas)
    while len(etas) > limit:
        window = limit + 1
        stack = np.array([permutation_matrix(s).reshape(-1) for s in sigmas[:window]]).T
        system = np.vstack([stack, np.ones(window)])
        _, _, vh = np.linalg.svd(system)
        z = vh[-1]
        if not np.any(z > 0):
            z = -z
        positive = z > 1e-14
        step = np.min(etas[:window][positive] / z[positive])
        etas[:window] -= step * z
        keep = np.ones(len(etas), dtype=bool)
        keep[:window] = etas[:window] > 1e-15
        etas = etas[keep]
        sigmas = [s for s, k in zip(sigmas, keep) if k]
    return etas, sigmas


def birkhoff_decompose(D: DoublyStochasticMatrix) -> BirkhoffDecomposition:
    """
    Greedy peeling: take a perfect matching on the support, subtract the
    smallest matched entry along it, zero entries below TOL_DS, repeat.
    """
    R = np.array(D.entries, dtype=float)
    m = D.m
    theta = settings.TOL_DS
    rows = np.arange(m)
    R[R <= theta] = 0.0

    etas: list[float] = []
    sigmas: list[np.ndarray] = []
    while np.any(R > 0):
        sigma = HopcroftKarp.from_support(R > 0).perfect_matching()
        if sigma is None:
            leftover = float(R.sum())
            if leftover > theta * m:
                raise SubstochasticError(leftover)
            logger.debug("dropping residual mass %.3e without a perfect matching", leftover)
            break
        eta = float(R[rows, sigma].min())
        R[rows, sigma] -= eta
        R[R <= theta] = 0.0
        etas.append(eta)
        sigmas.append(sigma)

    weights = np.array(etas)
    if len(weights) > max_terms(m):
        logger.warning("greedy peeling gave %d terms, reducing to %d", len(weights), max_terms(m))
        weights, sigmas = _caratheodory(weights, sigmas, m)

    return BirkhoffDecomposition(
        m=m,
        etas=tuple(float(w) for w in weights),
        sigmas=tuple(tuple(int(j) for j in s) for s in sigmas),
    )


def mix_eigenvalues(decomposition: BirkhoffDecomposition, beta) -> np.ndarray:
    """alpha_i = sum_sigma eta_sigma beta_{sigma(i)}"""
    beta = np.asarray(beta, dtype=float)
    alpha = np.zeros(decomposition.m)
    for eta, sigma in decomposition.terms:
        alpha += eta * beta[list(sigma)]
    return alpha


# ==========================================================
# COUPLING MATRIX / LOCAL FORM
# ==========================================================
def _require_uniform(p: ProjectionPartition, q: ProjectionPartition) -> None:
    if p.d != q.d:
        raise DimensionMismatchError(f"partition dimensions differ: {p.d} != {q.d}")
    if p.m != q.m:
        raise PartitionError(f"partition sizes differ: {p.m} != {q.m}")
    if not (p.is_uniform() and q.is_uniform()):
        raise PartitionError("partition not uniform")


def coupling_matrix(T: LinearMap, p: ProjectionPartition, q: ProjectionPartition) -> DoublyStochasticMatrix:
    """gamma[i, j] = m tau(T(q_j) p_i)"""
    _require_uniform(p, q)
    if T.d != p.d:
        raise DimensionMismatchError(f"map acts on d={T.d}, partitions on d={p.d}")
    d, m = p.d, p.m
    images = np.stack([T(qj) for qj in q.blocks])

    tol = settings.TOL_FC
    if np.max(np.abs(images.sum(axis=0) - np.eye(d))) > tol * m:
        raise HypothesisError("map is not unital on the partition")
    for j, image in enumerate(images):
        if abs(np.trace(image).real / d - q.traces[j]) > tol:
            raise HypothesisError("map does not preserve the trace of the partition")
        if np.min(np.linalg.eigvalsh(0.5 * (image + image.conj().T))) < -tol:
            raise HypothesisError("map is not positive on the partition")

    gamma = m * np.einsum("jab,iba->ij", images, p.blocks).real / d
    return DoublyStochasticMatrix(gamma)


@dataclass(frozen=True)
class LocalForm:
    rho: UnitaryMixture
    alpha: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    decomposition: BirkhoffDecomposition
    residual: float

    @property
    def rho_terms(self) -> list[tuple[float, np.ndarray]]:
        return self.rho.terms


def block_matching_unitary(p: ProjectionPartition, q: ProjectionPartition, sigma) -> np.ndarray:
    """
    u = sum_i v_i with v_i the isometry taking the ordered range basis of
    q_{sigma(i)} onto that of p_i, so u q_{sigma(i)} u* = p_i.
    """
    u = np.zeros((p.d, p.d), dtype=complex)
    for i, j in enumerate(sigma):
        target = p.range_basis(i)
        source = q.range_basis(int(j))
        if target.shape[1] != source.shape[1]:
            raise RankMismatchError(
                f"block {i} of p has rank {target.shape[1]}, block {j} of q has rank {source.shape[1]}"
            )
        u += target @ source.conj().T
    return u


def local_form_from_coupling(
    D: DoublyStochasticMatrix,
    p: ProjectionPartition,
    q: ProjectionPartition,
    beta,
) -> LocalForm:
    """
    alpha = D beta, and rho = sum_sigma eta_sigma Ad(u_sigma) from the
    Birkhoff decomposition of D, with sum alpha_i p_i = rho(sum beta_i q_i).
    """
    _require_uniform(p, q)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if D.m != p.m or len(beta) != p.m:
        raise DimensionMismatchError(f"sizes differ: D is {D.m}, partitions {p.m}, beta {len(beta)}")

    alpha = D.entries @ beta
    decomposition = birkhoff_decompose(D)
    unitaries = [block_matching_unitary(p, q, sigma) for sigma in decomposition.sigmas]
    rho = UnitaryMixture(np.array(decomposition.etas), np.array(unitaries))

    lhs = np.einsum("i,iab->ab", alpha, p.blocks)
    rhs = rho(np.einsum("i,iab->ab", beta, q.blocks))
    residual = float(np.max(np.abs(lhs - rhs)))
    bound = settings.TOL_LOCAL * (1.0 + float(np.max(np.abs(beta))))
    if residual > bound:
        raise LocalFormError(f"local form residual {residual:.3e} above {bound:.3e}")
    return LocalForm(rho, alpha, lhs, rhs, decomposition, residual)
