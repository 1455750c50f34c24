"""Closed-form optimal discriminators and their spatial gradients.

For the MMD loss the optimal discriminator is the witness function
Phi(x) = E_mu[K(x, .)] - E_mu0[K(x, .)], defined and differentiable on the
whole box.  The minimax / non-saturating discriminators are density-ratio
functions, defined only on the union support.  The 1-D Wasserstein potential
is built from the sign of the CDF difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergences import KernelSpec
from .errors import DimensionMismatch, GradientUnsupported, PointOffSupport
from .measures import DiscreteMeasure, diff

_ATOM_TOL = 1e-12


def _as_batch(x, dim: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
        return arr, True
    if arr.ndim == 1:
        if dim == 1 and arr.size != 1:
            return arr[:, None], False     # batch of scalars
        if arr.size != dim:
            raise DimensionMismatch(f"point has size {arr.size}, expected {dim}")
        return arr[None, :], True
    if arr.shape[1] != dim:
        raise DimensionMismatch(f"points have dim {arr.shape[1]}, expected {dim}")
    return arr, False


def phi_mmd(mu: DiscreteMeasure, mu0: DiscreteMeasure, k: KernelSpec, x) -> float | np.ndarray:
    """MMD witness E_mu[K(x, .)] - E_mu0[K(x, .)], exact weighted kernel sums."""
    if mu.dim != mu0.dim:
        raise DimensionMismatch(f"dim {mu.dim} vs {mu0.dim}")
    pts, single = _as_batch(x, mu.dim)
    val = k.gram(pts, mu.points) @ mu.weights - k.gram(pts, mu0.points) @ mu0.weights
    return float(val[0]) if single else val


def grad_phi_mmd(mu: DiscreteMeasure, mu0: DiscreteMeasure, k: KernelSpec, x) -> np.ndarray:
    """Spatial gradient of the MMD witness via the analytic kernel gradient."""
    if mu.dim != mu0.dim:
        raise DimensionMismatch(f"dim {mu.dim} vs {mu0.dim}")
    pts, single = _as_batch(x, mu.dim)
    g = (np.einsum("nmd,m->nd", k.grad_x(pts, mu.points), mu.weights)
         - np.einsum("nmd,m->nd", k.grad_x(pts, mu0.points), mu0.weights))
    return g[0] if single else g


def _atom_weight(m: DiscreteMeasure, x: np.ndarray) -> float | None:
    """Weight of the atom of m at x (sup-norm tolerance), None if x is off support."""
    hits = np.max(np.abs(m.points - x[None, :]), axis=1) < _ATOM_TOL
    if not np.any(hits):
        return None
    return float(m.weights[hits].sum())


def phi_minimax(mu: DiscreteMeasure, mu0: DiscreteMeasure, x) -> float:
    """Minimax discriminator (1/2) log( mu(x) / (mu(x) + mu0(x)) ) at a support atom."""
    pts, _ = _as_batch(x, mu.dim)
    wm, w0 = _atom_weight(mu, pts[0]), _atom_weight(mu0, pts[0])
    if wm is None and w0 is None:
        raise PointOffSupport("density ratio undefined off the union support")
    wm, w0 = wm or 0.0, w0 or 0.0
    if wm == 0.0:
        return -np.inf
    return 0.5 * float(np.log(wm / (wm + w0)))


def phi_ns(mu: DiscreteMeasure, mu0: DiscreteMeasure, x) -> float:
    """Non-saturating discriminator -(1/2) log( mu0(x) / (mu(x) + mu0(x)) )."""
    pts, _ = _as_batch(x, mu.dim)
    wm, w0 = _atom_weight(mu, pts[0]), _atom_weight(mu0, pts[0])
    if wm is None and w0 is None:
        raise PointOffSupport("density ratio undefined off the union support")
    wm, w0 = wm or 0.0, w0 or 0.0
    if w0 == 0.0:
        return np.inf
    return -0.5 * float(np.log(w0 / (wm + w0)))


def _w1_segments(mu: DiscreteMeasure, mu0: DiscreteMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints and per-gap slopes of the 1-D Kantorovich potential.

    The potential maximizing the dual pairing has derivative
    sign(F_mu0 - F_mu) on each gap between pooled atoms (and 0 outside their
    convex hull, where the CDFs agree).
    """
    xi = diff(mu, mu0)          # F_xi = F_mu - F_mu0
    x = xi.points[:, 0]
    order = np.argsort(x)
    breaks = x[order]
    cdf = np.cumsum(xi.weights[order])
    # zero out fp noise so the potential is flat wherever the CDFs agree,
    # in particular right of the last atom (mass-zero cancellation)
    slopes = np.where(np.abs(cdf) <= 1e-12, 0.0, np.sign(-cdf))
    return breaks, slopes


def phi_w1_1d(mu: DiscreteMeasure, mu0: DiscreteMeasure, x) -> float | np.ndarray:
    """1-D Kantorovich potential, 1-Lipschitz by construction, gauged psi(0) = 0."""
    if mu.dim != 1 or mu0.dim != 1:
        raise DimensionMismatch("phi_w1_1d requires 1-D measures")
    breaks, slopes = _w1_segments(mu, mu0)
    pts, single = _as_batch(x, 1)
    query = pts[:, 0]

    def integral_from_left(t: np.ndarray) -> np.ndarray:
        """Integral of the slope field from breaks[0] to t (slope 0 left of breaks[0])."""
        if len(breaks) == 0:
            return np.zeros_like(t)
        gap_len = np.diff(breaks)
        node_vals = np.concatenate([[0.0], np.cumsum(slopes[:-1] * gap_len)])
        idx = np.searchsorted(breaks, t, side="right") - 1
        ii = np.clip(idx, 0, len(breaks) - 1)
        return np.where(idx >= 0, node_vals[ii] + slopes[ii] * (t - breaks[ii]), 0.0)

    vals = integral_from_left(query) - integral_from_left(np.zeros(1))[0]
    return float(vals[0]) if single else vals


def grad_phi_w1_1d(mu: DiscreteMeasure, mu0: DiscreteMeasure, x) -> float | np.ndarray:
    """Almost-everywhere derivative of the 1-D potential (piecewise -1/0/+1)."""
    if mu.dim != 1 or mu0.dim != 1:
        raise DimensionMismatch("grad_phi_w1_1d requires 1-D measures")
    breaks, slopes = _w1_segments(mu, mu0)
    pts, single = _as_batch(x, 1)
    query = pts[:, 0]
    idx = np.searchsorted(breaks, query, side="right") - 1
    out = np.zeros_like(query)
    valid = idx >= 0
    out[valid] = slopes[idx[valid]]
    return float(out[0]) if single else out


@dataclass(frozen=True)
class DiscOracle:
    """Optimal-discriminator oracle for one loss kind at a fixed pair (mu, mu0)."""

    kind: str                  # mmd | w1 | minimax | ns
    mu: DiscreteMeasure
    mu0: DiscreteMeasure
    kernel: KernelSpec | None = None

    def eval(self, x):
        if self.kind == "mmd":
            return phi_mmd(self.mu, self.mu0, self.kernel, x)
        if self.kind == "w1":
            return phi_w1_1d(self.mu, self.mu0, x)
        if self.kind == "minimax":
            return phi_minimax(self.mu, self.mu0, x)
        if self.kind == "ns":
            return phi_ns(self.mu, self.mu0, x)
        raise ValueError(f"unknown oracle kind {self.kind!r}")

    def grad(self, x):
        if self.kind == "mmd":
            return grad_phi_mmd(self.mu, self.mu0, self.kernel, x)
        if self.kind == "w1":
            return grad_phi_w1_1d(self.mu, self.mu0, x)
        raise GradientUnsupported(
            f"{self.kind} discriminator is a density ratio on atoms; no spatial gradient")
