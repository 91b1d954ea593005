"""
Joint majorization of finitely supported measures.

mu is majorized by nu when a row-stochastic kernel K carries nu onto mu
(sum_s mu_s K[s, t] = nu_t) while fixing every coordinate
(sum_t K[s, t] y_t = x_s). Existence is decided as an LP feasibility
problem; the 1-D potential test and a battery of convex functions are
independent oracles.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from jointmaj.config import settings
from jointmaj.core.maps import LinearMap
from jointmaj.core.measures import (
    DiscreteMeasure,
    MeasureSplit,
    equivalent,
    group_by_diameter,
    locate_atoms,
    measures_equal,
)
from jointmaj.core.simplex import LPFeasibilityProblem, solve_feasibility
from jointmaj.core.speclin import CommutingFamily, joint_diagonalize, joint_spectral_measure
from jointmaj.errors import (
    DimensionMismatchError,
    MeasureMismatchError,
    NotMajorizedError,
    SolverError,
)
from jointmaj.utils.rng import make_rng

logger = logging.getLogger(__name__)


# ==========================================================
# KERNEL
# ==========================================================
class KernelResiduals(NamedTuple):
    row: float
    mass: float
    barycenter: float


@dataclass(frozen=True)
class TransportKernel:
    """Rows index atoms of mu (the majorized side), columns atoms of nu."""

    mu: DiscreteMeasure
    nu: DiscreteMeasure
    K: np.ndarray

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.shape != (self.mu.size, self.nu.size):
            raise DimensionMismatchError(
                f"kernel shape {K.shape} does not match ({self.mu.size}, {self.nu.size})"
            )
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    def residuals(self) -> KernelResiduals:
        row = np.max(np.abs(self.K.sum(axis=1) - 1.0))
        mass = np.max(np.abs(self.mu.masses @ self.K - self.nu.masses))
        bary = np.max(np.abs(self.K @ self.nu.points - self.mu.points))
        return KernelResiduals(float(row), float(mass), float(bary))

    def satisfies(self, tol: float | None = None, *, barycenter: bool = True) -> bool:
        tol = settings.TOL_LP if tol is None else tol
        scale = 1.0 + float(max(np.max(np.abs(self.mu.points)), np.max(np.abs(self.nu.points))))
        res = self.residuals()
        if np.any(self.K < -tol):
            return False
        if res.row > tol or res.mass > tol * (1.0 + self.nu.total_mass):
            return False
        return not barycenter or res.barycenter <= tol * scale


class MajorizationResult(NamedTuple):
    feasible: bool
    witness: TransportKernel | None


def _require_same_dim(mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    if mu.dim != nu.dim:
        raise DimensionMismatchError(f"dimension mismatch: {mu.dim} != {nu.dim}")


def _normalized_frame(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[np.ndarray, float]:
    center = mu.barycenter
    both = np.vstack([mu.points, nu.points])
    spread = float(np.max(both.max(axis=0) - both.min(axis=0)))
    return center, (spread if spread > 0 else 1.0)


def _kernel_problem(mu: DiscreteMeasure, nu: DiscreteMeasure) -> LPFeasibilityProblem:
    center, scale = _normalized_frame(mu, nu)
    x = (mu.points - center) / scale
    y = (nu.points - center) / scale
    S, T, n = mu.size, nu.size, mu.dim
    nu_masses = nu.masses * (mu.total_mass / nu.total_mass)

    rows, rhs = [], []
    # row-stochastic
    for s in range(S):
        row = np.zeros(S * T)
        row[s * T:(s + 1) * T] = 1.0
        rows.append(row)
        rhs.append(1.0)
    # mass balance, last column dropped (implied by the others)
    for t in range(T - 1):
        row = np.zeros(S * T)
        row[t::T] = mu.masses
        rows.append(row)
        rhs.append(nu_masses[t])
    # barycenter
    for s in range(S):
        for i in range(n):
            row = np.zeros(S * T)
            row[s * T:(s + 1) * T] = y[:, i]
            rows.append(row)
            rhs.append(x[s, i])
    return LPFeasibilityProblem(np.array(rows), np.array(rhs))


def decide_majorization(mu: DiscreteMeasure, nu: DiscreteMeasure) -> MajorizationResult:
    """
    Is mu majorized by nu? Mass or first-moment mismatch rejects without
    solving; otherwise the kernel LP decides and its vertex is the witness.
    """
    _require_same_dim(mu, nu)
    if not equivalent(mu, nu):
        logger.debug("quick reject: mass or first moments differ")
        return MajorizationResult(False, None)

    result = solve_feasibility(_kernel_problem(mu, nu))
    if not result.feasible:
        return MajorizationResult(False, None)

    kernel = TransportKernel(mu, nu, result.x.reshape(mu.size, nu.size))
    if not kernel.satisfies():
        raise SolverError(f"LP vertex fails the kernel constraints: residuals {kernel.residuals()}")
    return MajorizationResult(True, kernel)


def mutually_majorized(mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    return decide_majorization(mu, nu).feasible and decide_majorization(nu, mu).feasible


def compose_kernels(first: TransportKernel, second: TransportKernel) -> TransportKernel:
    """Witness for mu < rho from witnesses for mu < nu and nu < rho."""
    if not measures_equal(first.nu, second.mu):
        raise MeasureMismatchError("kernels do not chain: middle measures differ")
    return TransportKernel(first.mu, second.nu, first.K @ second.K)


def push_split(kernel: TransportKernel, split: MeasureSplit) -> MeasureSplit:
    """
    Given a witness for mu < nu and a split of mu, the split of nu whose
    parts are equivalent to the parts of mu, part by part.
    """
    if not measures_equal(split.parent, kernel.mu):
        raise MeasureMismatchError("split parent is not the kernel's mu")
    parts = []
    for part in split.parts:
        weights = np.zeros(kernel.mu.size)
        np.add.at(weights, locate_atoms(kernel.mu, part.points), part.masses)
        parts.append(DiscreteMeasure.from_weights(kernel.nu.points, weights @ kernel.K))
    return MeasureSplit(kernel.nu, parts)


# ==========================================================
# ORACLES
# ==========================================================
def potential_oracle_1d(mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    """
    1-D test: for equal mass and mean, mu < nu iff the potential
    t -> integral |x - t| of mu stays below that of nu at every support point.
    """
    if mu.dim != 1 or nu.dim != 1:
        raise DimensionMismatchError("the potential oracle needs one-dimensional measures")
    if not equivalent(mu, nu):
        return False
    xs, ys = mu.points[:, 0], nu.points[:, 0]
    ts = np.union1d(xs, ys)
    pot_mu = mu.masses @ np.abs(xs[:, None] - ts[None, :])
    pot_nu = nu.masses @ np.abs(ys[:, None] - ts[None, :])
    scale = 1.0 + float(np.max(np.abs(ts))) * max(mu.total_mass, nu.total_mass)
    return bool(np.all(pot_mu <= pot_nu + settings.TOL_LP * scale))


class MaxAffine:
    """f(x) = max_j (<v_j, x> + c_j)"""

    __slots__ = ("slopes", "offsets", "label")

    def __init__(self, slopes, offsets, label: str = "random"):
        self.slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        self.offsets = np.asarray(offsets, dtype=float).reshape(-1)
        self.label = label

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.max(pts @ self.slopes.T + self.offsets, axis=1)

    def integrate(self, m: DiscreteMeasure) -> float:
        return float(m.masses @ self(m.points))


def _tangent_points(both: np.ndarray, lo: np.ndarray, hi: np.ndarray, rng) -> np.ndarray:
    points = np.unique(both, axis=0)[:32]
    missing = 32 - len(points)
    if missing > 0:
        points = np.vstack([points, rng.uniform(lo, hi, size=(missing, both.shape[1]))])
    return points


def build_convex_battery(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    count: int,
    seed: int | None = None,
) -> list[MaxAffine]:
    """
    Fixed functions |x_i - m_i|, max_i |x_i - m_i| and a 32-plane
    under-approximation of |x - m|^2 (m the barycenter of nu), followed by
    ``count`` random max-affine functions with 3 to 8 pieces.
    """
    _require_same_dim(mu, nu)
    seed = settings.SEED if seed is None else seed
    rng = make_rng(seed, 0xBA77)
    n = mu.dim
    center = nu.barycenter
    both = np.vstack([mu.points, nu.points])
    lo, hi = both.min(axis=0), both.max(axis=0)
    eye = np.eye(n)

    battery = []
    for i in range(n):
        battery.append(MaxAffine([eye[i], -eye[i]], [-center[i], center[i]], label=f"abs_{i}"))
    battery.append(
        MaxAffine(np.vstack([eye, -eye]), np.concatenate([-center, center]), label="sup_norm")
    )
    tangents = _tangent_points(both, lo, hi, rng)
    grads = 2.0 * (tangents - center)
    offsets = np.sum((tangents - center) ** 2, axis=1) - np.sum(grads * tangents, axis=1)
    battery.append(MaxAffine(grads, offsets, label="square"))

    for _ in range(count):
        pieces = int(rng.integers(3, 9))
        v = rng.normal(size=(pieces, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        kinks = rng.uniform(lo, hi, size=(pieces, n))
        battery.append(MaxAffine(v, -np.sum(v * kinks, axis=1)))
    return battery


def battery_violation(mu: DiscreteMeasure, nu: DiscreteMeasure, battery: Sequence[MaxAffine]) -> float:
    """Largest mu(f) - nu(f) over the battery, relative to the size of f."""
    worst = -np.inf
    for f in battery:
        values = np.concatenate([f(mu.points), f(nu.points)])
        size = 1.0 + float(np.max(np.abs(values)))
        worst = max(worst, (f.integrate(mu) - f.integrate(nu)) / size)
    return float(worst)


def convex_battery_measures(mu: DiscreteMeasure, nu: DiscreteMeasure, count: int, seed: int | None = None) -> bool:
    battery = build_convex_battery(mu, nu, count, seed)
    return battery_violation(mu, nu, battery) <= settings.TOL_LP


def convex_battery_test(
    famA: CommutingFamily,
    famB: CommutingFamily,
    count: int,
    seed: int | None = None,
) -> bool:
    """
    tau(f(a)) <= tau(f(b)) for a battery of convex f. Refutation only: a
    pass at finite count does not certify majorization.
    """
    if famA.n != famB.n:
        raise DimensionMismatchError(f"family sizes differ: {famA.n} != {famB.n}")
    mu = joint_spectral_measure(famA, seed)
    nu = joint_spectral_measure(famB, seed)
    return convex_battery_measures(mu, nu, count, seed)


# ==========================================================
# KERNEL SYNTHESIS
# ==========================================================
def synthesize_kernel_partition(mu: DiscreteMeasure, nu: DiscreteMeasure, cell_diameter: float) -> TransportKernel:
    """
    Group supp(mu) into cells of diameter <= cell_diameter, find per-cell
    parts nu_j of nu (mass mu(cell), first moment that of mu on the cell),
    and spread each nu_j uniformly over its cell:
    K[s, t] = nu_j[t] / mu(cell_j) for s in cell_j.
    """
    if not decide_majorization(mu, nu).feasible:
        raise NotMajorizedError()

    cells = group_by_diameter(mu.points, cell_diameter)
    center, scale = _normalized_frame(mu, nu)
    y = (nu.points - center) / scale
    J, T, n = len(cells), nu.size, mu.dim
    cell_mass = np.array([mu.masses[c].sum() for c in cells])
    cell_moment = np.array([mu.masses[c] @ ((mu.points[c] - center) / scale) for c in cells])
    nu_masses = nu.masses * (mu.total_mass / nu.total_mass)

    rows, rhs = [], []
    for t in range(T):
        row = np.zeros(J * T)
        row[t::T] = 1.0
        rows.append(row)
        rhs.append(nu_masses[t])
    for j in range(J - 1):
        row = np.zeros(J * T)
        row[j * T:(j + 1) * T] = 1.0
        rows.append(row)
        rhs.append(cell_mass[j])
    for j in range(J):
        for i in range(n):
            row = np.zeros(J * T)
            row[j * T:(j + 1) * T] = y[:, i]
            rows.append(row)
            rhs.append(cell_moment[j, i])

    result = solve_feasibility(LPFeasibilityProblem(np.array(rows), np.array(rhs)))
    if not result.feasible:
        raise SolverError("per-cell split LP infeasible for a majorized pair")
    parts = result.x.reshape(J, T)

    K = np.zeros((mu.size, T))
    for j, cell in enumerate(cells):
        K[cell] = parts[j] / cell_mass[j]
    logger.debug("kernel from %d cells of diameter <= %g", J, cell_diameter)
    return TransportKernel(mu, nu, K)


# ==========================================================
# KERNEL -> DOUBLY STOCHASTIC MAP
# ==========================================================
def _atom_labels(m: DiscreteMeasure, fam: CommutingFamily, seed: int | None, which: str):
    diag = joint_diagonalize(fam, seed)
    measure = DiscreteMeasure(diag.eigentuples, np.full(fam.d, 1.0 / fam.d))
    if measure.dim != m.dim or not measures_equal(measure, m):
        raise MeasureMismatchError(f"joint spectral measure of {which} differs from the kernel's measure")
    return diag, locate_atoms(m, diag.eigentuples)


class KernelMap(LinearMap):
    """
    x -> U_A diag(M diag(U_B* x U_B)) U_A*, where M moves the eigenspace
    averages of famB along the kernel onto the eigenvectors of famA.
    """

    def __init__(self, kernel: TransportKernel, famA: CommutingFamily, famB: CommutingFamily, seed: int | None = None):
        if famA.d != famB.d:
            raise DimensionMismatchError(f"family dimensions differ: {famA.d} != {famB.d}")
        diag_a, atoms_a = _atom_labels(kernel.mu, famA, seed, "famA")
        diag_b, atoms_b = _atom_labels(kernel.nu, famB, seed, "famB")
        multiplicity = np.bincount(atoms_b, minlength=kernel.nu.size)
        self.kernel = kernel
        self.d = famA.d
        self.basis_a = diag_a.basis
        self.basis_b = diag_b.basis
        self.transfer = kernel.K[atoms_a][:, atoms_b] / multiplicity[atoms_b]

    def apply(self, x):
        rotated = np.einsum("ic,ij,jc->c", self.basis_b.conj(), x, self.basis_b)
        out = self.transfer @ rotated
        return (self.basis_a * out) @ self.basis_a.conj().T


def ds_map_from_kernel(
    kernel: TransportKernel,
    famA: CommutingFamily,
    famB: CommutingFamily,
    seed: int | None = None,
) -> KernelMap:
    """Doubly stochastic map T with T(b_i) = a_i built from a kernel witness."""
    return KernelMap(kernel, famA, famB, seed)
