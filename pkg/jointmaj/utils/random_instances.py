"""
Seeded random instances: unitaries, commuting families, doubly stochastic
matrices, partitions and piecewise-linear test functions.
"""
from dataclasses import dataclass

import numpy as np

from jointmaj.core.speclin import CommutingFamily, ProjectionPartition


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (z + z.conj().T)


def family_from_spectrum(basis: np.ndarray, eigentuples: np.ndarray) -> CommutingFamily:
    """Members U diag(eigentuples[:, i]) U*."""
    return CommutingFamily([(basis * eigentuples[:, i]) @ basis.conj().T for i in range(eigentuples.shape[1])])


def random_eigentuples(n: int, d: int, rng: np.random.Generator, atoms: int | None = None) -> np.ndarray:
    """d joint eigenvalues drawn from ``atoms`` distinct points of [-2, 2]^n."""
    atoms = int(rng.integers(1, d + 1)) if atoms is None else atoms
    points = np.round(rng.uniform(-2.0, 2.0, size=(atoms, n)), 6)
    labels = np.concatenate([np.arange(atoms), rng.integers(0, atoms, size=d - atoms)])
    return points[rng.permutation(labels)]


def random_commuting_family(n: int, d: int, rng: np.random.Generator, atoms: int | None = None) -> CommutingFamily:
    return family_from_spectrum(random_unitary(d, rng), random_eigentuples(n, d, rng, atoms))


def random_ds_matrix(m: int, rng: np.random.Generator, terms: int | None = None) -> np.ndarray:
    """Convex combination of at most m - 1 random permutation matrices."""
    terms = max(1, m - 1) if terms is None else terms
    weights = rng.dirichlet(np.ones(terms))
    D = np.zeros((m, m))
    for w in weights:
        D[np.arange(m), rng.permutation(m)] += w
    return D


def random_groups(d: int, rng: np.random.Generator, blocks: int | None = None, uniform: bool = False) -> list[list[int]]:
    """Random partition of range(d) into groups (equal sizes when uniform)."""
    order = rng.permutation(d).tolist()
    if uniform:
        divisors = [q for q in range(1, d + 1) if d % q == 0]
        blocks = int(rng.choice(divisors)) if blocks is None else blocks
        size = d // blocks
        return [sorted(order[i * size:(i + 1) * size]) for i in range(blocks)]
    blocks = int(rng.integers(1, d + 1)) if blocks is None else blocks
    cuts = np.sort(rng.choice(np.arange(1, d), size=blocks - 1, replace=False)) if blocks > 1 else []
    return [sorted(g) for g in np.split(np.array(order), cuts)]


def random_partition(d: int, rng: np.random.Generator, uniform: bool = False) -> ProjectionPartition:
    """Partition into spans of column groups of a random unitary."""
    return ProjectionPartition.from_basis(random_unitary(d, rng), random_groups(d, rng, uniform=uniform))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function through (knots, values)."""

    knots: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.knots, self.values)

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(np.diff(self.values) / np.diff(self.knots))))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def random_piecewise_linear(rng: np.random.Generator, lipschitz: float, knots: int = 6) -> PiecewiseLinear:
    """Random f on [0, 1] with equally spaced knots and Lipschitz constant exactly ``lipschitz``."""
    xs = np.linspace(0.0, 1.0, knots)
    steps = rng.uniform(-1.0, 1.0, size=knots - 1)
    steps *= lipschitz * (xs[1] - xs[0]) / np.max(np.abs(steps))
    start = rng.uniform(-1.0, 1.0)
    return PiecewiseLinear(xs, start + np.concatenate([[0.0], np.cumsum(steps)]))
