"""
Finitely supported and piecewise-uniform measures.

A ``DiscreteMeasure`` is a positive measure on R^n with finitely many atoms;
a ``PiecewiseUniformMeasure`` is a diffuse measure on the real line whose
density is constant on finitely many intervals. Both are immutable.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from jointmaj.config import settings
from jointmaj.errors import DimensionMismatchError, InvalidMeasureError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def close_enough(a: float, b: float, tol: float) -> bool:
    """Relative comparison |a - b| <= tol * (1 + max(|a|, |b|))."""
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


# ==========================================================
# CANONICAL MERGING
# ==========================================================
def _lex_order(points: np.ndarray) -> np.ndarray:
    # first coordinate is the primary key; stable, so ties keep input order
    return np.lexsort(points.T[::-1])


def merge_atoms(points: np.ndarray, masses: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Merge atoms whose points lie within ``tol`` (sup-norm) of each other.

    Clusters are the connected components of the closeness graph; each is
    replaced by one atom at its barycenter carrying the summed mass. The
    step is repeated until no two points are close, so the result is a
    fixed point (merging twice equals merging once).
    """
    while len(points) > 1:
        gaps = np.max(np.abs(points[:, None, :] - points[None, :, :]), axis=2)
        close = gaps <= tol
        np.fill_diagonal(close, False)
        if not close.any():
            break
        count, labels = connected_components(csr_matrix(close), directed=False)
        new_masses = np.bincount(labels, weights=masses, minlength=count)
        new_points = np.zeros((count, points.shape[1]))
        np.add.at(new_points, labels, points * masses[:, None])
        points = new_points / new_masses[:, None]
        masses = new_masses

    order = _lex_order(points)
    return points[order], masses[order]


# ==========================================================
# DISCRETE MEASURE
# ==========================================================
class DiscreteMeasure:
    """
    Positive measure sum_k mass_k * delta(point_k) on R^n.

    Points are stored merged (within ``settings.TOL_POINT``) and sorted
    lexicographically, which makes serialization byte-stable.
    """

    __slots__ = ("points", "masses")

    def __init__(self, points, masses, *, merge: bool = True):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.asarray(masses, dtype=float).reshape(-1)

        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise InvalidMeasureError("measure needs at least one atom in dimension >= 1")
        if pts.shape[0] != w.shape[0]:
            raise InvalidMeasureError(
                f"{pts.shape[0]} points but {w.shape[0]} masses"
            )
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise InvalidMeasureError("points and masses must be finite")
        if np.any(w <= 0):
            raise InvalidMeasureError("every mass must be > 0")

        if merge:
            pts, w = merge_atoms(pts, w, settings.TOL_POINT)

        self.points = _frozen(pts)
        self.masses = _frozen(w)

    @classmethod
    def from_weights(cls, points, weights, *, drop_below: float = 0.0) -> "DiscreteMeasure":
        """Build from nonnegative weights, dropping atoms with weight <= drop_below."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.asarray(weights, dtype=float).reshape(-1)
        keep = w > drop_below
        return cls(pts[keep], w[keep])

    @classmethod
    def dirac(cls, point, mass: float = 1.0) -> "DiscreteMeasure":
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), [mass])

    # ------------------------------------------------------
    # Basic attributes
    # ------------------------------------------------------
    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def first_moments(self) -> np.ndarray:
        return self.masses @ self.points

    @property
    def barycenter(self) -> np.ndarray:
        return self.first_moments / self.total_mass

    @property
    def atoms(self) -> list[tuple[tuple[float, ...], float]]:
        return [(tuple(float(x) for x in p), float(w)) for p, w in zip(self.points, self.masses)]

    def integrate(self, f: Callable[[np.ndarray], float]) -> float:
        """Sum of mass * f(point)."""
        return float(sum(w * float(f(p)) for p, w in zip(self.points, self.masses)))

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.masses * factor, merge=False)

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, atoms={self.atoms})"


def _require_same_dim(m1: DiscreteMeasure, m2: DiscreteMeasure) -> None:
    if m1.dim != m2.dim:
        raise DimensionMismatchError(f"dimension mismatch: {m1.dim} != {m2.dim}")


def sum_measures(parts: Sequence[DiscreteMeasure]) -> DiscreteMeasure:
    if not parts:
        raise InvalidMeasureError("cannot sum an empty list of measures")
    for part in parts[1:]:
        _require_same_dim(parts[0], part)
    return DiscreteMeasure(
        np.vstack([p.points for p in parts]),
        np.concatenate([p.masses for p in parts]),
    )


def moments(m: DiscreteMeasure) -> tuple[float, np.ndarray]:
    """Total mass and first-moment vector."""
    return m.total_mass, m.first_moments


def equivalent(m1: DiscreteMeasure, m2: DiscreteMeasure) -> bool:
    """
    m1 ~ m2: same total mass and same first moments, within tolerance.
    """
    _require_same_dim(m1, m2)
    mass1, first1 = moments(m1)
    mass2, first2 = moments(m2)
    if abs(mass1 - mass2) > settings.TOL_MASS * (1.0 + max(mass1, mass2)):
        return False
    return all(
        close_enough(float(a), float(b), settings.TOL_MOMENT)
        for a, b in zip(first1, first2)
    )


def measures_equal(
    m1: DiscreteMeasure,
    m2: DiscreteMeasure,
    *,
    tol_point: float | None = None,
    tol_mass: float | None = None,
) -> bool:
    """
    Equality of merged atom lists: a bijection between supports moving no
    point by more than tol_point (scaled by the data magnitude) and no mass
    by more than tol_mass.
    """
    _require_same_dim(m1, m2)
    tol_point = settings.TOL_POINT if tol_point is None else tol_point
    tol_mass = settings.TOL_MASS if tol_mass is None else tol_mass
    if m1.size != m2.size:
        return False

    scale = max(1.0, float(np.max(np.abs(m1.points))), float(np.max(np.abs(m2.points))))
    gaps = np.max(np.abs(m1.points[:, None, :] - m2.points[None, :, :]), axis=2)
    nearest = np.argmin(gaps, axis=1)
    if len(set(nearest.tolist())) != m1.size:
        return False
    if np.any(gaps[np.arange(m1.size), nearest] > tol_point * scale):
        return False
    return bool(np.all(np.abs(m1.masses - m2.masses[nearest]) <= tol_mass))


def locate_atoms(m: DiscreteMeasure, points: np.ndarray) -> np.ndarray:
    """Index of the nearest atom of ``m`` (sup-norm) for each row of ``points``."""
    pts = np.asarray(points, dtype=float).reshape(-1, m.dim)
    gaps = np.max(np.abs(pts[:, None, :] - m.points[None, :, :]), axis=2)
    return np.argmin(gaps, axis=1)


def group_by_diameter(points: np.ndarray, diameter: float) -> list[np.ndarray]:
    """
    Deterministic first-fit partition of the rows of ``points`` into cells
    whose sup-norm diameter is at most ``diameter``. Cells keep input order.
    """
    pts = np.asarray(points, dtype=float)
    cells: list[list[int]] = []
    for index in range(pts.shape[0]):
        for cell in cells:
            spread = np.max(np.abs(pts[cell] - pts[index]))
            if spread <= diameter:
                cell.append(index)
                break
        else:
            cells.append([index])
    return [np.array(cell, dtype=int) for cell in cells]


# ==========================================================
# MEASURE SPLIT
# ==========================================================
class MeasureSplit:
    """A decomposition parent = sum(parts)."""

    __slots__ = ("parent", "parts")

    def __init__(self, parent: DiscreteMeasure, parts: Sequence[DiscreteMeasure]):
        parts = tuple(parts)
        if not parts:
            raise InvalidMeasureError("a split needs at least one part")
        for part in parts:
            _require_same_dim(parent, part)
        total = sum_measures(parts)
        if not measures_equal(total, parent, tol_mass=settings.TOL_MASS * len(parts)):
            raise InvalidMeasureError("parts do not sum to the parent measure")
        self.parent = parent
        self.parts = parts

    @property
    def dim(self) -> int:
        return self.parent.dim

    def __len__(self) -> int:
        return len(self.parts)


def split_by_cells(m: DiscreteMeasure, cells: Sequence[np.ndarray]) -> MeasureSplit:
    """Split m into its restrictions to the given disjoint atom-index cells."""
    parts = [DiscreteMeasure(m.points[cell], m.masses[cell], merge=False) for cell in cells]
    return MeasureSplit(m, parts)


def verify_split_majorization_witness(mu_split: MeasureSplit, nu_split: MeasureSplit) -> bool:
    """
    True iff every part of mu_split is equivalent to the matching part of
    nu_split (equal mass and first moments).
    """
    if len(mu_split) != len(nu_split):
        raise InvalidMeasureError(
            f"part-count mismatch: {len(mu_split)} != {len(nu_split)}"
        )
    if mu_split.dim != nu_split.dim:
        raise DimensionMismatchError(f"dimension mismatch: {mu_split.dim} != {nu_split.dim}")
    return all(equivalent(a, b) for a, b in zip(mu_split.parts, nu_split.parts))


# ==========================================================
# 1-D MEASURABLE SETS
# ==========================================================
class IntervalSet:
    """Finite union of closed intervals on the real line, kept sorted and merged."""

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable[tuple[float, float]] = ()):
        ordered = sorted((float(a), float(b)) for a, b in pieces if float(b) > float(a))
        merged: list[tuple[float, float]] = []
        for left, right in ordered:
            if merged and left <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], right))
            else:
                merged.append((left, right))
        self.pieces = tuple(merged)

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __repr__(self) -> str:
        return f"IntervalSet({list(self.pieces)})"

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.pieces))

    @property
    def diameter(self) -> float:
        if not self.pieces:
            return 0.0
        return self.pieces[-1][1] - self.pieces[0][0]

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.pieces + other.pieces)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.pieces:
            for c, e in other.pieces:
                left, right = max(a, c), min(b, e)
                if right > left:
                    out.append((left, right))
        return IntervalSet(out)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.pieces:
            remaining = [(a, b)]
            for c, e in other.pieces:
                nxt = []
                for x, y in remaining:
                    if e <= x or c >= y:
                        nxt.append((x, y))
                        continue
                    if c > x:
                        nxt.append((x, c))
                    if e < y:
                        nxt.append((e, y))
                remaining = nxt
            out.extend(remaining)
        return IntervalSet(out)

    def contains(self, x: float) -> bool:
        return any(a <= x <= b for a, b in self.pieces)

    def to_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self.pieces]


# ==========================================================
# PIECEWISE-UNIFORM (DIFFUSE) MEASURE
# ==========================================================
class PiecewiseUniformMeasure:
    """
    Diffuse measure on the line with constant density on each interval.
    Intervals are sorted and have disjoint interiors.
    """

    __slots__ = ("lefts", "rights", "densities")

    def __init__(self, intervals: Iterable[tuple[float, float, float]]):
        rows = np.array([tuple(map(float, row)) for row in intervals], dtype=float).reshape(-1, 3)
        if rows.shape[0] == 0:
            raise InvalidMeasureError("piecewise-uniform measure needs at least one interval")
        if not np.all(np.isfinite(rows)):
            raise InvalidMeasureError("interval data must be finite")
        lefts, rights, dens = rows[:, 0], rows[:, 1], rows[:, 2]
        if np.any(rights <= lefts):
            raise InvalidMeasureError("every interval needs left < right")
        if np.any(dens < 0):
            raise InvalidMeasureError("densities must be nonnegative")
        if np.any(lefts[1:] < rights[:-1]):
            raise InvalidMeasureError("intervals must be sorted with disjoint interiors")
        if float(np.sum(dens * (rights - lefts))) <= 0:
            raise InvalidMeasureError("total mass must be > 0")
        self.lefts = _frozen(lefts)
        self.rights = _frozen(rights)
        self.densities = _frozen(dens)

    @classmethod
    def uniform(cls, left: float, right: float, mass: float = 1.0) -> "PiecewiseUniformMeasure":
        return cls([(left, right, mass / (right - left))])

    @property
    def intervals(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.lefts, self.rights, self.densities)]

    @property
    def piece_masses(self) -> np.ndarray:
        return self.densities * (self.rights - self.lefts)

    @property
    def total_mass(self) -> float:
        return float(self.piece_masses.sum())

    @property
    def support(self) -> IntervalSet:
        keep = self.densities > 0
        return IntervalSet(zip(self.lefts[keep], self.rights[keep]))

    def scaled(self, factor: float) -> "PiecewiseUniformMeasure":
        return PiecewiseUniformMeasure(zip(self.lefts, self.rights, self.densities * factor))

    def mass_of(self, region: IntervalSet) -> float:
        total = 0.0
        for a, b, c in self.intervals:
            if c == 0:
                continue
            for x, y in region:
                overlap = min(b, y) - max(a, x)
                if overlap > 0:
                    total += c * overlap
        return total

    def restrict(self, region: IntervalSet) -> "PiecewiseUniformMeasure":
        pieces = []
        for a, b, c in self.intervals:
            if c == 0:
                continue
            for x, y in region:
                left, right = max(a, x), min(b, y)
                if right > left:
                    pieces.append((left, right, c))
        if not pieces:
            raise InvalidMeasureError("restriction to a null set")
        pieces.sort()
        return PiecewiseUniformMeasure(pieces)

    def cdf(self, x: float) -> float:
        covered = np.clip(x - self.lefts, 0.0, self.rights - self.lefts)
        return float(np.sum(self.densities * covered))

    def quantile(self, mass: float) -> float:
        """Leftmost x with cdf(x) = mass (CDF inversion)."""
        before = 0.0
        for a, b, c in self.intervals:
            if c == 0:
                continue
            piece = c * (b - a)
            if before + piece >= mass:
                return min(b, a + (mass - before) / c)
            before += piece
        return float(self.rights[-1])

    def integrate(self, f: Callable[[np.ndarray], np.ndarray], nodes: int = 24) -> float:
        """
        Integral of a vectorized f against the measure, by Gauss-Legendre
        quadrature on every piece.
        """
        xs, ws = np.polynomial.legendre.leggauss(nodes)
        total = 0.0
        for a, b, c in self.intervals:
            if c == 0:
                continue
            half = 0.5 * (b - a)
            values = np.asarray(f(half * xs + 0.5 * (a + b)), dtype=float)
            total += c * half * float(ws @ values)
        return total

    def __repr__(self) -> str:
        return f"PiecewiseUniformMeasure({self.intervals})"


def leftmost_subset(m: PiecewiseUniformMeasure, alpha: float) -> IntervalSet:
    if alpha <= 0:
        return IntervalSet()
    out = []
    before = 0.0
    for a, b, c in m.intervals:
        if c == 0:
            continue
        piece = c * (b - a)
        if before + piece >= alpha:
            out.append((a, min(b, a + (alpha - before) / c)))
            break
        out.append((a, b))
        before += piece
    return IntervalSet(out)


def split_with_mass(m: PiecewiseUniformMeasure, alpha: float) -> IntervalSet:
    """
    The leftmost measurable set of mass alpha, found by CDF inversion.
    """
    total = m.total_mass
    if not (0.0 < alpha < total):
        raise InvalidMeasureError(f"alpha={alpha} outside (0, {total})")
    return leftmost_subset(m, alpha)


# ==========================================================
# HYBRID MEASURE (atoms + diffuse fibres)
# ==========================================================
@dataclass(frozen=True)
class DiffuseFibre:
    """Mass spread uniformly along the fibre over one former atom."""

    point: tuple[float, ...]
    density: PiecewiseUniformMeasure


@dataclass(frozen=True)
class HybridMeasure:
    atoms: DiscreteMeasure | None
    fibres: tuple[DiffuseFibre, ...] = ()

    @classmethod
    def from_discrete(cls, m: DiscreteMeasure) -> "HybridMeasure":
        return cls(atoms=m, fibres=())

    @property
    def atom_count(self) -> int:
        return 0 if self.atoms is None else self.atoms.size

    @property
    def total_mass(self) -> float:
        atomic = 0.0 if self.atoms is None else self.atoms.total_mass
        return atomic + sum(f.density.total_mass for f in self.fibres)

    @property
    def is_diffuse(self) -> bool:
        return self.atoms is None
