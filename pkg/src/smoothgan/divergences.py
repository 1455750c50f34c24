"""Loss functions J(mu) on discrete measures.

Implements the minimax (Jensen-Shannon), non-saturating KL, Wasserstein-1 and
half-squared-MMD losses, each against a fixed reference measure, together
with the Kantorovich-Rubinstein norm on mass-zero signed measures.  Infinite
values are legitimate returns (math.inf), never exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionMismatch, ProblemTooLarge, UnknownKind
from .measures import DiscreteMeasure, SignedMeasure, diff, require_mass_zero

_ALIGN_TOL = 1e-12
_LP_MAX_CELLS = 10 ** 6


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel K(x,y) = c * exp(-||x-y||^2 / (2 sigma_sq)).

    c = (2 pi sigma_sq)^(-d/2) when normalized, else 1.  The critical
    bandwidth sigma_sq = 1/(2 pi) gives the dimension-free kernel
    K(x,y) = exp(-pi ||x-y||^2), whose normalization prefactor is exactly 1.
    """

    sigma_sq: float = 1.0 / (2.0 * math.pi)
    normalized: bool = False

    def __post_init__(self):
        if self.sigma_sq <= 0:
            raise ValueError("sigma_sq must be positive")

    @staticmethod
    def critical() -> "KernelSpec":
        return KernelSpec(sigma_sq=1.0 / (2.0 * math.pi), normalized=False)

    def prefactor(self, dim: int) -> float:
        if not self.normalized:
            return 1.0
        return (2.0 * math.pi * self.sigma_sq) ** (-dim / 2.0)

    def gram(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Kernel matrix K[i, j] = K(x_i, y_j) for (n, d) and (m, d) inputs."""
        sq = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=-1)
        return self.prefactor(x.shape[1]) * np.exp(-sq / (2.0 * self.sigma_sq))

    def grad_x(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """grad_x K(x_i, y_j) = -(x_i - y_j) K(x_i, y_j) / sigma_sq, shape (n, m, d)."""
        d = x[:, None, :] - y[None, :, :]
        return -d * self.gram(x, y)[:, :, None] / self.sigma_sq


@dataclass(frozen=True)
class LossKind:
    """A GAN loss: tag, reference measure mu0, and (for MMD) a kernel."""

    tag: str  # minimax_js | non_saturating_kl | wasserstein1 | mmd_sq_half
    reference: DiscreteMeasure
    kernel: KernelSpec | None = None

    def __post_init__(self):
        if self.tag not in ("minimax_js", "non_saturating_kl", "wasserstein1", "mmd_sq_half"):
            raise UnknownKind(f"unknown loss tag {self.tag!r}")
        if (self.kernel is not None) != (self.tag == "mmd_sq_half"):
            raise ValueError("kernel must be present iff tag is mmd_sq_half")


def _check_dims(mu: DiscreteMeasure | SignedMeasure, nu: DiscreteMeasure | SignedMeasure):
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dim {mu.dim} vs {nu.dim}")


def align_many(measures: list[DiscreteMeasure]) -> tuple[np.ndarray, list[np.ndarray]]:
    """Map measures onto their union support (atoms matched within 1e-12).

    Returns (points, weight_vectors), one aligned weight vector per input.
    """
    k = len(measures)
    for m in measures[1:]:
        _check_dims(measures[0], m)
    pts = np.vstack([m.points for m in measures])
    cols = []
    offset = 0
    total = pts.shape[0]
    for m in measures:
        col = np.zeros(total)
        col[offset:offset + m.n_atoms] = m.weights
        cols.append(col)
        offset += m.n_atoms
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    cols = [c[order] for c in cols]
    out_pts: list[np.ndarray] = []
    out_w: list[list[float]] = [[] for _ in range(k)]
    for i, p in enumerate(pts):
        if out_pts and np.max(np.abs(p - out_pts[-1])) < _ALIGN_TOL:
            for j in range(k):
                out_w[j][-1] += cols[j][i]
        else:
            out_pts.append(p)
            for j in range(k):
                out_w[j].append(cols[j][i])
    return np.array(out_pts), [np.array(w) for w in out_w]


def align_supports(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two-measure form of align_many."""
    pts, (wa, wb) = align_many([mu, nu])
    return pts, wa, wb


# --- Wasserstein-1 ---

def _cdf_levels(xi: SignedMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Sorted 1-D atom positions and the running CDF value on each gap."""
    x = xi.points[:, 0]
    order = np.argsort(x)
    return x[order], np.cumsum(xi.weights[order])


def w1_1d(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exact 1-D Wasserstein-1 distance: integral of |F_mu - F_nu|.

    The CDF difference is piecewise constant between pooled atom positions,
    so the integral is a finite sum.
    """
    _check_dims(mu, nu)
    if mu.dim != 1:
        raise DimensionMismatch("w1_1d requires 1-D measures")
    xi = diff(mu, nu)
    x, cdf = _cdf_levels(xi)
    if len(x) < 2:
        return 0.0
    return float(np.sum(np.abs(cdf[:-1]) * np.diff(x)))


def kr_norm_1d(xi: SignedMeasure) -> float:
    """Kantorovich-Rubinstein norm of a mass-zero 1-D signed measure.

    Equals the integral of |F_xi|; for xi = mu - nu this is W1(mu, nu).
    Mass must vanish: over 1-Lipschitz test functions with free constants the
    supremum is infinite otherwise.
    """
    if xi.dim != 1:
        raise DimensionMismatch("kr_norm_1d requires a 1-D measure")
    require_mass_zero(xi)
    x, cdf = _cdf_levels(xi)
    if len(x) < 2:
        return 0.0
    return float(np.sum(np.abs(cdf[:-1]) * np.diff(x)))


def w1_lp(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exact optimal transport cost with Euclidean ground distance.

    Solves the transport linear program on the discrete supports with an
    exact simplex method (HiGHS); any dimension, m*n cells capped at 1e6.
    """
    _check_dims(mu, nu)
    m, n = mu.n_atoms, nu.n_atoms
    if m * n > _LP_MAX_CELLS:
        raise ProblemTooLarge(f"{m} x {n} transport cells exceed {_LP_MAX_CELLS}")
    cost = np.sqrt(np.sum((mu.points[:, None, :] - nu.points[None, :, :]) ** 2, axis=-1))
    # row marginals then column marginals; drop one redundant constraint
    a_eq = np.zeros((m + n, m * n))
    for i in range(m):
        a_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    b_eq = np.concatenate([mu.weights, nu.weights])
    res = linprog(cost.ravel(), A_eq=a_eq[:-1], b_eq=b_eq[:-1], bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


# --- f-divergences ---

def kl(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """KL divergence on the union support, with 0 log 0 = 0.

    Returns math.inf when mu has mass where nu has none.
    """
    _, wm, wn = align_supports(mu, nu)
    pos = wm > 0
    if np.any(wn[pos] == 0):
        return math.inf
    return float(np.sum(wm[pos] * np.log(wm[pos] / wn[pos])))


def js(mu: DiscreteMeasure, mu0: DiscreteMeasure) -> float:
    """Jensen-Shannon divergence; lies in [0, log 2]."""
    _, wm, w0 = align_supports(mu, mu0)
    mid = 0.5 * (wm + w0)
    val = 0.0
    for w in (wm, w0):
        pos = w > 0
        val += 0.5 * float(np.sum(w[pos] * np.log(w[pos] / mid[pos])))
    return val


def ns_kl(mu: DiscreteMeasure, mu0: DiscreteMeasure) -> float:
    """Non-saturating loss: KL( (mu + mu0)/2 || mu0 )."""
    _, wm, w0 = align_supports(mu, mu0)
    mid = 0.5 * (wm + w0)
    pos = mid > 0
    if np.any(w0[pos] == 0):
        return math.inf
    return float(np.sum(mid[pos] * np.log(mid[pos] / w0[pos])))


# --- MMD ---

def embedding_gram(xi: SignedMeasure, k: KernelSpec) -> float:
    """Double Gram sum of a signed measure: integral of K d(xi x xi)."""
    if xi.n_atoms == 0:
        return 0.0
    g = k.gram(xi.points, xi.points)
    return float(xi.weights @ g @ xi.weights)


def mmd_sq(mu: DiscreteMeasure, nu: DiscreteMeasure, k: KernelSpec) -> float:
    """Squared maximum mean discrepancy (the loss itself is half of this)."""
    _check_dims(mu, nu)
    return max(embedding_gram(diff(mu, nu), k), 0.0)


def loss_eval(kind: LossKind, mu: DiscreteMeasure) -> float:
    """Evaluate J(mu) for the given loss kind against its reference."""
    mu0 = kind.reference
    if kind.tag == "minimax_js":
        return js(mu, mu0)
    if kind.tag == "non_saturating_kl":
        return ns_kl(mu, mu0)
    if kind.tag == "wasserstein1":
        if mu.dim == 1:
            return w1_1d(mu, mu0)
        return w1_lp(mu, mu0)
    if kind.tag == "mmd_sq_half":
        return 0.5 * mmd_sq(mu, mu0, kind.kernel)
    raise UnknownKind(kind.tag)
