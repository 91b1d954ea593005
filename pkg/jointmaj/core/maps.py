"""
Linear maps on d x d matrices, represented by their action.
"""
import logging
from typing import NamedTuple

import numpy as np

from jointmaj.config import settings
from jointmaj.core.speclin import ProjectionPartition, as_array, trace, unitarity_residual
from jointmaj.errors import DimensionMismatchError, InvalidMatrixError
from jointmaj.utils.rng import make_rng

logger = logging.getLogger(__name__)

# Conjugations are applied in batches of this many unitaries
_CHUNK = 256


class LinearMap:
    d: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        a = as_array(x)
        if a.shape != (self.d, self.d):
            raise DimensionMismatchError(f"map acts on {self.d}x{self.d} matrices, got {a.shape}")
        return self.apply(a)

    def then(self, other: "LinearMap") -> "ComposedMap":
        """other after self."""
        return ComposedMap(self, other)


class IdentityMap(LinearMap):
    def __init__(self, d: int):
        self.d = d

    def apply(self, x):
        return np.array(x, dtype=complex)


class TraceMap(LinearMap):
    """x -> tau(x) I"""

    def __init__(self, d: int):
        self.d = d

    def apply(self, x):
        return np.trace(x) / self.d * np.eye(self.d, dtype=complex)


class Conjugation(LinearMap):
    """Ad(u): x -> u x u*"""

    def __init__(self, u):
        u = np.asarray(u, dtype=complex)
        if unitarity_residual(u) > settings.TOL_UNIT * u.shape[0]:
            raise InvalidMatrixError("conjugating matrix is not unitary")
        self.u = u
        self.d = u.shape[0]

    def apply(self, x):
        return self.u @ x @ self.u.conj().T


class PinchingMap(LinearMap):
    """x -> sum_j p_j x p_j"""

    def __init__(self, part: ProjectionPartition):
        self.part = part
        self.d = part.d

    def apply(self, x):
        blocks = self.part.blocks
        return np.einsum("kij,jl,klm->im", blocks, x, blocks)


class ComposedMap(LinearMap):
    def __init__(self, first: LinearMap, second: LinearMap):
        if first.d != second.d:
            raise DimensionMismatchError("cannot compose maps of different sizes")
        self.first = first
        self.second = second
        self.d = first.d

    def apply(self, x):
        return self.second.apply(self.first.apply(x))


class UnitaryMixture(LinearMap):
    """
    Convex combination of unitary conjugations, x -> sum_k w_k u_k x u_k*.
    """

    def __init__(self, weights, unitaries):
        w = np.asarray(weights, dtype=float).reshape(-1)
        u = np.asarray(unitaries, dtype=complex)
        if u.ndim == 2:
            u = u[None]
        if u.ndim != 3 or u.shape[0] != w.shape[0] or u.shape[1] != u.shape[2]:
            raise InvalidMatrixError("expected one square unitary per weight")
        if np.any(w < 0) or abs(w.sum() - 1.0) > settings.TOL_DS * max(1, len(w)):
            raise InvalidMatrixError("mixture weights must be nonnegative and sum to 1")
        eye = np.eye(u.shape[1])
        defect = np.max(np.abs(np.einsum("kji,kjl->kil", u.conj(), u) - eye)) if len(w) else 0.0
        if defect > settings.TOL_UNIT * u.shape[1]:
            raise InvalidMatrixError(f"mixture factor is not unitary (defect {defect:.3e})")
        self.weights = w
        self.unitaries = u
        self.d = u.shape[1]

    @classmethod
    def single(cls, u) -> "UnitaryMixture":
        return cls([1.0], [u])

    @property
    def terms(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.weights.tolist(), self.unitaries))

    def __len__(self) -> int:
        return len(self.weights)

    def apply(self, x):
        out = np.zeros((self.d, self.d), dtype=complex)
        for start in range(0, len(self.weights), _CHUNK):
            u = self.unitaries[start:start + _CHUNK]
            w = self.weights[start:start + _CHUNK]
            conj = u @ x @ np.conj(np.transpose(u, (0, 2, 1)))
            out += np.tensordot(w, conj, axes=1)
        return out

    def after(self, inner: "UnitaryMixture") -> "UnitaryMixture":
        """The mixture self o inner, with products of all term pairs."""
        weights = np.outer(self.weights, inner.weights).reshape(-1)
        unitaries = np.einsum("aij,bjk->abik", self.unitaries, inner.unitaries)
        return UnitaryMixture(weights, unitaries.reshape(-1, self.d, self.d))

    def merged(self, decimals: int = 9) -> "UnitaryMixture":
        """Same map with terms carrying equal unitaries (to ``decimals``) summed into one."""
        index: dict[bytes, int] = {}
        weights: list[float] = []
        unitaries: list[np.ndarray] = []
        for w, u in zip(self.weights, self.unitaries):
            key = (np.round(u, decimals) + 0.0).tobytes()
            if key in index:
                weights[index[key]] += float(w)
            else:
                index[key] = len(weights)
                weights.append(float(w))
                unitaries.append(u)
        return UnitaryMixture(weights, unitaries)


def concatenate_mixtures(parts: list[tuple[float, UnitaryMixture]]) -> UnitaryMixture:
    """sum_k c_k rho_k as one flat mixture."""
    weights = np.concatenate([c * rho.weights for c, rho in parts])
    unitaries = np.concatenate([rho.unitaries for _, rho in parts])
    return UnitaryMixture(weights, unitaries)


# ==========================================================
# DOUBLY STOCHASTIC CHECK
# ==========================================================
class DSCheck(NamedTuple):
    unital: float
    trace: float
    positivity: float

    def ok(self, tol: float) -> bool:
        return max(self.unital, self.trace, self.positivity) <= tol


def check_doubly_stochastic(T: LinearMap, samples: int = 8, seed: int | None = None) -> DSCheck:
    """
    Residuals of unitality, trace preservation and positivity on random
    inputs: |T(I) - I|, |tau(T(x)) - tau(x)| and the most negative
    eigenvalue of T(y y*).
    """
    seed = settings.SEED if seed is None else seed
    rng = make_rng(seed, 0x5D)
    d = T.d
    unital = float(np.max(np.abs(T(np.eye(d)) - np.eye(d))))
    trace_gap = 0.0
    negative = 0.0
    for _ in range(samples):
        y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        x = 0.5 * (y + y.conj().T)
        trace_gap = max(trace_gap, abs(trace(T(x)) - trace(x)))
        image = T(y @ y.conj().T)
        lowest = float(np.min(np.linalg.eigvalsh(0.5 * (image + image.conj().T))))
        negative = max(negative, -lowest)
    return DSCheck(unital=unital, trace=trace_gap, positivity=negative)
