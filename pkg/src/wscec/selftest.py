"""Randomized invariant checks for the geometry core.

Used by ``wscec selftest`` and reused by the test suite. ``mutate_term`` flips
the sign of one closed-form trace term so the oracle comparison can be shown
to catch transcription errors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from . import geometry as geo


def random_spd(rng, n, log10_range=(-1.0, 1.0)):
    """``Q diag(lam) Q^T`` with log-uniform eigenvalues and Haar-random ``Q``."""
    lam = 10.0 ** rng.uniform(*log10_range, size=n)
    Q = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    S = (Q * lam) @ Q.T
    return 0.5 * (S + S.T)


def random_symmetric(rng, n):
    A = rng.normal(size=(n, n))
    return 0.5 * (A + A.T)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def oracle_equivalence(rng, n_samples=((3, 100), (2, 25)), rtol=1e-8, signs=(1.0, 1.0, 1.0)):
    worst = 0.0
    for n, count in n_samples:
        for _ in range(count):
            S = random_spd(rng, n)
            lam, _ = geo.spd_eigh(S)
            closed = float(geo.scalar_curvature_from_eigenvalues(lam, signs))
            oracle = geo.scalar_curvature_oracle(S)
            worst = max(worst, abs(closed - oracle) / abs(oracle))
    return Check("closed form == basis-sum oracle", bool(worst <= rtol), f"max rel err {worst:.2e} (tol {rtol:g})")


def curvature_bound(rng, dims=(2, 3, 5), count=1000):
    violations = 0
    for i in range(count):
        n = dims[i % len(dims)]
        S = random_spd(rng, n, (-2.0, 2.0))
        rho = geo.scalar_curvature(S)
        if not geo.curvature_bound(S).holds(rho):
            violations += 1
    return Check("0 < rho < 3n(n-1)/lambda_min2", bool(violations == 0), f"{violations} violations in {count}")


def homogeneity(rng, count=100, factors=(0.1, 2.0, 10.0), rtol=1e-10):
    worst = 0.0
    for _ in range(count):
        S = random_spd(rng, 3)
        rho = geo.scalar_curvature(S)
        for c in factors:
            worst = max(worst, abs(c * geo.scalar_curvature(c * S) - rho) / rho)
    return Check("c * rho(c S) == rho(S)", bool(worst <= rtol), f"max rel err {worst:.2e}")


def sylvester_residual(rng, count=1000, dims=(2, 3, 5), rtol=1e-10):
    worst = 0.0
    for i in range(count):
        n = dims[i % len(dims)]
        S = random_spd(rng, n)
        Y = random_symmetric(rng, n)
        G = geo.sylvester_solve(S, Y)
        worst = max(worst, np.linalg.norm(S @ G + G @ S - Y) / np.linalg.norm(Y))
    return Check("Sylvester residual", bool(worst <= rtol), f"max rel residual {worst:.2e}")


def sqrt_reconstruction(rng, count=300, dims=(2, 3, 5), rtol=1e-10):
    worst = 0.0
    for i in range(count):
        S = random_spd(rng, dims[i % len(dims)])
        R = geo.spd_sqrt(S)
        worst = max(worst, np.linalg.norm(R @ R - S) / np.linalg.norm(S))
    return Check("spd_sqrt(S)^2 == S", bool(worst <= rtol), f"max rel err {worst:.2e}")


def tensor_vanishes_on_diagonal(rng, count=50):
    worst = 0.0
    for i in range(count):
        n = (2, 3)[i % 2]
        S = random_spd(rng, n)
        X = random_symmetric(rng, n)
        worst = max(worst, abs(geo.curvature_tensor(S, X, X)))
    return Check("R(X, X, X, X) == 0", bool(worst == 0.0), f"max |R| {worst:.2e}")


def run(seed=42, mutate_term=None, quick=False):
    rng = np.random.default_rng(seed)
    signs = [1.0, 1.0, 1.0]
    if mutate_term is not None:
        signs[mutate_term] = -1.0
    scale = 0.2 if quick else 1.0
    n = lambda k: max(1, int(k * scale))
    return [
        oracle_equivalence(rng, ((3, n(100)), (2, n(25))), signs=tuple(signs)),
        curvature_bound(rng, count=n(1000)),
        homogeneity(rng, count=n(100)),
        sylvester_residual(rng, count=n(1000)),
        sqrt_reconstruction(rng, count=n(300)),
        tensor_vanishes_on_diagonal(rng),
    ]
