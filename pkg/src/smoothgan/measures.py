"""Discrete probability and signed measures on a compact box.

Measures are finitely supported: a continuous target only ever enters as a
large equal-weight sample.  All types are immutable after construction and
every operation is pure.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptySupport, NegativeWeight, NonZeroMass, UnknownKind

MERGE_TOL = 1e-12   # sup-norm distance below which atoms are considered equal
MASS_TOL = 1e-12


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise DimensionMismatch(f"points must be (n, d), got shape {pts.shape}")
    return pts


def _merge_atoms(points: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combine atoms closer than MERGE_TOL in sup-norm (weights added)."""
    order = np.lexsort(points.T[::-1])
    pts, w = points[order], weights[order]
    keep_pts: list[np.ndarray] = []
    keep_w: list[float] = []
    for p, wi in zip(pts, w):
        if keep_pts and np.max(np.abs(p - keep_pts[-1])) < MERGE_TOL:
            keep_w[-1] += wi
        else:
            keep_pts.append(p)
            keep_w.append(wi)
    return np.array(keep_pts), np.array(keep_w)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch("lo and hi must be vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("box corners must satisfy lo < hi componentwise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> bool:
        pts = _as_points(points)
        return bool(np.all(pts >= self.lo - tol) and np.all(pts <= self.hi + tol))

    @staticmethod
    def unit(dim: int) -> "BoxDomain":
        """The default domain [-1, 1]^d."""
        return BoxDomain(-np.ones(dim), np.ones(dim))


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finite support: weighted atoms in R^d."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class SignedMeasure:
    """Finite signed measure: weighted atoms with weights of any sign."""

    points: np.ndarray
    weights: np.ndarray
    total_mass: float = field(init=False)

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)
        object.__setattr__(self, "total_mass", float(self.weights.sum()))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def is_mass_zero(self) -> bool:
        return abs(self.total_mass) <= MASS_TOL


def make_discrete(points, weights) -> DiscreteMeasure:
    """Build a probability measure: merge duplicate atoms, renormalize weights.

    Idempotent: applying it to the output's (points, weights) changes nothing.
    """
    pts = _as_points(points)
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    if pts.shape[0] == 0:
        raise EmptySupport("a measure needs at least one atom")
    if pts.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"{pts.shape[0]} points vs {w.shape[0]} weights")
    if np.any(w < 0):
        raise NegativeWeight("probability weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise NegativeWeight("weights must have positive total mass")
    pts, w = _merge_atoms(pts, w / total)
    # drop atoms whose merged weight is exactly zero, keeping at least one
    if np.any(w > 0):
        keep = w > 0
        pts, w = pts[keep], w[keep]
    return DiscreteMeasure(pts, w)


def make_signed(points, weights) -> SignedMeasure:
    """Build a signed measure, merging coincident atoms."""
    pts = _as_points(points)
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    if pts.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"{pts.shape[0]} points vs {w.shape[0]} weights")
    if pts.shape[0] == 0:
        return SignedMeasure(np.zeros((0, 1)), np.zeros(0))
    pts, w = _merge_atoms(pts, w)
    return SignedMeasure(pts, w)


def diff(mu: DiscreteMeasure, nu: DiscreteMeasure) -> SignedMeasure:
    """The signed measure mu - nu (always mass-zero)."""
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dim {mu.dim} vs {nu.dim}")
    pts = np.vstack([mu.points, nu.points])
    w = np.concatenate([mu.weights, -nu.weights])
    return make_signed(pts, w)


def cdf_1d(m: DiscreteMeasure | SignedMeasure, x: float) -> float:
    """Right-continuous CDF of a 1-D measure: total weight of atoms <= x."""
    if m.dim != 1:
        raise DimensionMismatch("cdf_1d requires a 1-D measure")
    return float(m.weights[m.points[:, 0] <= x].sum())


def sample_target(kind: str, n: int, seed: int, dim: int = 2) -> DiscreteMeasure:
    """Deterministic synthetic target measures inside the unit box.

    kind 'ring': n points on the circle of radius 0.5 centered at the origin
    (jittered angles, d = 2 only).  kind 'gaussian_mixture': clipped draws
    from 4 symmetric Gaussian bumps.  kind 'grid_uniform': the first n points
    of a regular lattice.
    """
    if n < 1:
        raise EmptySupport("n must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "ring":
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n))
        pts = 0.5 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    elif kind == "gaussian_mixture":
        centers = 0.5 * np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
        if dim == 1:
            centers = np.array([[-0.5], [0.5], [-0.25], [0.25]])
        labels = rng.integers(0, len(centers), size=n)
        pts = centers[labels] + 0.1 * rng.standard_normal((n, centers.shape[1]))
        pts = np.clip(pts, -1.0, 1.0)
    elif kind == "grid_uniform":
        side = int(np.ceil(n ** (1.0 / dim)))
        axes = [np.linspace(-0.8, 0.8, side) for _ in range(dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        pts = mesh[:n]
    else:
        raise UnknownKind(f"unknown target kind {kind!r}")
    return make_discrete(pts, np.full(len(pts), 1.0 / len(pts)))


def random_measure(rng: np.random.Generator, dim: int, domain: BoxDomain | None = None,
                   min_atoms: int = 2, max_atoms: int = 8) -> DiscreteMeasure:
    """Random test measure: k ~ U{min..max} atoms uniform in the box, Dirichlet weights."""
    box = domain if domain is not None else BoxDomain.unit(dim)
    k = int(rng.integers(min_atoms, max_atoms + 1))
    pts = rng.uniform(box.lo, box.hi, size=(k, dim))
    w = rng.dirichlet(np.ones(k))
    return make_discrete(pts, w)


# --- CSV interchange: one row per atom, header x_1..x_d,w ---

def measure_to_csv(m: DiscreteMeasure | SignedMeasure) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x_{i + 1}" for i in range(m.dim)] + ["w"])
    for p, w in zip(m.points, m.weights):
        writer.writerow([f"{v:.15g}" for v in p] + [f"{w:.15g}"])
    return buf.getvalue()


def measure_from_csv(text: str, signed: bool = False) -> DiscreteMeasure | SignedMeasure:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not rows[0] or not rows[0][-1].strip().lower() == "w":
        raise ValueError("measure CSV must carry a header row ending in 'w'")
    data = [[float(v) for v in row] for row in rows[1:] if row]
    if not data:
        raise EmptySupport("measure CSV has no atom rows")
    arr = np.array(data)
    pts, w = arr[:, :-1], arr[:, -1]
    return make_signed(pts, w) if signed else make_discrete(pts, w)


def require_mass_zero(xi: SignedMeasure) -> None:
    if not xi.is_mass_zero:
        raise NonZeroMass(f"signed measure has total mass {xi.total_mass:g}")
