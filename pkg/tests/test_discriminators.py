"""Optimal-discriminator oracles: values, gradients, duality, Lipschitz structure."""

import math

import numpy as np
import pytest

from smoothgan.discriminators import (DiscOracle, grad_phi_mmd, grad_phi_w1_1d, phi_minimax,
                                      phi_mmd, phi_ns, phi_w1_1d)
from smoothgan.divergences import KernelSpec, mmd_sq, w1_1d
from smoothgan.errors import GradientUnsupported, PointOffSupport
from smoothgan.measures import diff, make_discrete, random_measure

KC = KernelSpec.critical()
D0 = make_discrete([0.0], [1.0])
D1 = make_discrete([1.0], [1.0])
ALPHA_BOUND = 2.0 * math.sqrt(2.0 * math.pi) * math.exp(-0.5)   # sup of 2|K'| for critical


def test_phi_mmd_zero_at_equality():
    m = make_discrete([0.2, -0.4], [0.3, 0.7])
    xs = np.linspace(-1, 1, 11)
    assert np.allclose(phi_mmd(m, m, KC, xs), 0.0, atol=1e-16)


def test_phi_mmd_values():
    assert phi_mmd(D1, D0, KC, 0.0) == pytest.approx(math.exp(-math.pi) - 1.0, abs=1e-15)
    assert phi_mmd(D1, D0, KC, 0.5) == pytest.approx(0.0, abs=1e-16)


def test_grad_phi_mmd_values():
    assert np.allclose(grad_phi_mmd(D0, D0, KC, 0.77), 0.0)
    # both kernel bumps pull the same way at the midpoint
    expect = 2.0 * math.pi * math.exp(-math.pi / 4.0)
    assert grad_phi_mmd(D1, D0, KC, 0.5)[0] == pytest.approx(expect, rel=1e-14)


def test_grad_phi_mmd_finite_differences():
    for t in range(10):
        rng = np.random.default_rng(300 + t)
        d = int(rng.integers(1, 3))
        mu, mu0 = random_measure(rng, d), random_measure(rng, d)
        x = rng.uniform(-1, 1, size=d)
        g = grad_phi_mmd(mu, mu0, KC, x)
        h = 1e-4
        fd = np.array([(phi_mmd(mu, mu0, KC, x + h * np.eye(d)[i])
                        - phi_mmd(mu, mu0, KC, x - h * np.eye(d)[i])) / (2 * h)
                       for i in range(d)])
        assert np.abs(g - fd).max() < 1e-6


def test_mmd_dual_attainment():
    # pairing of the witness against mu - mu0 reproduces the squared MMD exactly
    rng = np.random.default_rng(17)
    for _ in range(20):
        mu, mu0 = random_measure(rng, 1), random_measure(rng, 1)
        xi = diff(mu, mu0)
        pairing = float(np.dot(phi_mmd(mu, mu0, KC, xi.points), xi.weights))
        assert pairing == pytest.approx(mmd_sq(mu, mu0, KC), abs=1e-10)


def test_grad_phi_mmd_sup_bound():
    grid = np.linspace(-1, 1, 101)[:, None]
    for t in range(50):
        rng = np.random.default_rng(500 + t)
        mu, mu0 = random_measure(rng, 1), random_measure(rng, 1)
        sup = np.abs(grad_phi_mmd(mu, mu0, KC, grid)).max()
        assert sup <= ALPHA_BOUND + 1e-12


def test_phi_minimax_values():
    assert phi_minimax(D0, D0, 0.0) == pytest.approx(0.5 * math.log(0.5), abs=1e-15)
    mu = make_discrete([0.0, 1.0], [0.75, 0.25])
    mu0 = make_discrete([0.0, 1.0], [0.25, 0.75])
    assert phi_minimax(mu, mu0, 0.0) == pytest.approx(0.5 * math.log(0.75), abs=1e-15)
    assert phi_minimax(mu0, mu, 1.0) == pytest.approx(0.5 * math.log(0.75), abs=1e-15)


def test_phi_minimax_infinite_and_off_support():
    assert phi_minimax(D0, D1, 1.0) == -math.inf
    with pytest.raises(PointOffSupport):
        phi_minimax(D0, D1, 0.5)


def test_phi_ns_values():
    assert phi_ns(D0, D0, 0.0) == pytest.approx(-0.5 * math.log(0.5), abs=1e-15)
    assert phi_ns(D0, D1, 0.0) == math.inf
    mu = make_discrete([0.0, 1.0], [0.75, 0.25])
    mu0 = make_discrete([0.0, 1.0], [0.25, 0.75])
    assert phi_ns(mu, mu0, 0.0) == pytest.approx(-0.5 * math.log(0.25), abs=1e-15)


def test_w1_potential_is_abs():
    mu = make_discrete([-1.0, 1.0], [0.5, 0.5])
    xs = np.linspace(-1, 1, 41)
    assert np.allclose(phi_w1_1d(mu, D0, xs), np.abs(xs), atol=1e-12)


def test_w1_potential_zero_at_equality():
    m = make_discrete([0.3, -0.6], [0.5, 0.5])
    xs = np.linspace(-1, 1, 21)
    assert np.allclose(phi_w1_1d(m, m, xs), 0.0, atol=1e-12)


def test_w1_potential_two_deltas():
    xs = np.array([0.0, 0.25, 1.0])
    assert np.allclose(phi_w1_1d(D1, D0, xs), xs, atol=1e-15)


def test_w1_potential_gauge():
    rng = np.random.default_rng(23)
    mu, mu0 = random_measure(rng, 1), random_measure(rng, 1)
    assert phi_w1_1d(mu, mu0, 0.0) == 0.0


def test_w1_dual_attainment():
    rng = np.random.default_rng(29)
    for _ in range(25):
        mu, mu0 = random_measure(rng, 1), random_measure(rng, 1)
        xi = diff(mu, mu0)
        pairing = float(np.dot(phi_w1_1d(mu, mu0, xi.points[:, 0]), xi.weights))
        assert pairing == pytest.approx(w1_1d(mu, mu0), abs=1e-9)


def test_w1_potential_one_lipschitz():
    rng = np.random.default_rng(31)
    grid = np.linspace(-1, 1, 501)
    for _ in range(20):
        mu, mu0 = random_measure(rng, 1), random_measure(rng, 1)
        vals = phi_w1_1d(mu, mu0, grid)
        slopes = np.abs(np.diff(vals)) / (grid[1] - grid[0])
        assert slopes.max() <= 1.0 + 1e-9


def test_w1_potential_kink_divergence():
    # potential |x| has a slope jump at 0: finite-difference smoothness >= 1/h
    mu = make_discrete([-1.0, 1.0], [0.5, 0.5])
    for h in (1e-2, 1e-4, 1e-6):
        g_left = grad_phi_w1_1d(mu, D0, -h / 2)
        g_right = grad_phi_w1_1d(mu, D0, h / 2)
        assert abs(g_right - g_left) / h >= 1.0 / h


def test_oracle_dispatch_and_gradient_support():
    rng = np.random.default_rng(37)
    mu, mu0 = random_measure(rng, 1), random_measure(rng, 1)
    mmd_oracle = DiscOracle("mmd", mu, mu0, KC)
    assert mmd_oracle.eval(0.1) == pytest.approx(phi_mmd(mu, mu0, KC, 0.1))
    w1_oracle = DiscOracle("w1", mu, mu0)
    assert w1_oracle.eval(0.1) == pytest.approx(phi_w1_1d(mu, mu0, 0.1))
    ratio_oracle = DiscOracle("minimax", mu, mu0)
    with pytest.raises(GradientUnsupported):
        ratio_oracle.grad(0.1)
