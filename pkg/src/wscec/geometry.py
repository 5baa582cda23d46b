r"""Bures-Wasserstein geometry on SPD(n).

At :math:`S \in SPD(n)` the Wasserstein metric is

.. math::

    g_S(X, Y) = \tfrac12 \operatorname{tr}(\Gamma_S[Y] X),
    \qquad S\,\Gamma_S[Y] + \Gamma_S[Y]\,S = Y,

which is the quotient of the Frobenius metric on :math:`GL(n)` under
:math:`A \mapsto AA^\top`. All solves happen in the eigenbasis of ``S``: one
``eigh`` per matrix is the only primitive needed for square roots, Sylvester
solves and the curvature closed form.

Scalar curvature is reported in the closed form built from the eigenvalues
(``scalar_curvature``). That closed form sums each *unordered* pair of
orthonormal tangent directions once; the conventional Riemannian scalar
curvature (ordered double sum) is exactly twice as large. The brute-force
``scalar_curvature_oracle`` exposes both through ``full=``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SYMMETRY_TOL = 1e-12
CLAMP_TOL = 1e-12


def regularization(trace):
    """Diagonal loading used wherever a degenerate SPD matrix must be repaired."""
    return 1e-10 * np.maximum(1.0, trace)


def _check_square(S):
    S = np.asarray(S, dtype=float)
    if S.ndim < 2 or S.shape[-1] != S.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {S.shape}")
    return S


def spd_eigh(S):
    """Validated eigendecomposition of one SPD matrix or a stack of them.

    Returns ascending eigenvalues ``lam`` (shape ``(..., n)``) and orthonormal
    eigenvectors ``V`` with ``S = V diag(lam) V^T``. Eigenvalues in
    ``(-1e-12 * lam_max, 0]`` are rounding noise and get clamped to the
    regularization scale; anything more negative is a domain error.
    """
    S = _check_square(S)
    if not np.all(np.isfinite(S)):
        raise DomainError("matrix has non-finite entries")
    scale = np.maximum(1.0, np.max(np.abs(S), axis=(-2, -1)))
    asym = np.max(np.abs(S - np.swapaxes(S, -1, -2)), axis=(-2, -1))
    if np.any(asym > SYMMETRY_TOL * scale):
        raise DomainError(f"matrix is not symmetric (max asymmetry {np.max(asym):.3e})")
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    lam, V = np.linalg.eigh(S)
    lam_max = lam[..., -1:]
    lam_min = lam[..., :1]
    if np.any(lam_max <= 0) or np.any(lam_min <= -CLAMP_TOL * lam_max):
        raise DomainError(f"matrix is not positive definite (min eigenvalue {np.min(lam_min):.3e})")
    floor = regularization(np.sum(np.clip(lam, 0, None), axis=-1, keepdims=True))
    lam = np.where(lam <= 0, floor, lam)
    return lam, V


def _from_eig(lam, V, f):
    return (V * f(lam)[..., None, :]) @ np.swapaxes(V, -1, -2)


def spd_sqrt(S):
    """Principal square root; the result is SPD and squares back to ``S``."""
    lam, V = spd_eigh(S)
    return _from_eig(lam, V, np.sqrt)


def sylvester_solve(S, Y, *, eig=None):
    r"""Solve :math:`S\Gamma + \Gamma S = Y` for :math:`\Gamma`.

    In the eigenbasis of ``S`` the equation decouples entrywise into
    :math:`\Gamma'_{ij} = Y'_{ij} / (\lambda_i + \lambda_j)`, which has a unique
    solution because every :math:`\lambda_i + \lambda_j > 0`. ``Y`` need not be
    symmetric (the curvature tensor feeds it a commutator).
    """
    lam, V = spd_eigh(S) if eig is None else eig
    Y = np.asarray(Y, dtype=float)
    Vt = np.swapaxes(V, -1, -2)
    Yp = Vt @ Y @ V
    Gp = Yp / (lam[..., :, None] + lam[..., None, :])
    return V @ Gp @ Vt


def metric(S, X, Y, *, eig=None):
    """Wasserstein inner product ``g_S(X, Y) = tr(Gamma_S[Y] X) / 2``."""
    G = sylvester_solve(S, Y, eig=eig)
    return 0.5 * float(np.trace(G @ np.asarray(X, dtype=float)))


def curvature_tensor(S, X, Y, *, eig=None):
    r"""Curvature tensor :math:`R(X, Y, X, Y)` at ``S``.

    .. math::

        3\operatorname{tr}\big(\Gamma_S[X]\, S\, \Gamma_S[C]\, S\, \Gamma_S[Y]\big),
        \quad C = \Gamma_S[X]\Gamma_S[Y] - \Gamma_S[Y]\Gamma_S[X].

    Nonnegative for every pair of tangent vectors; zero when ``X`` and ``Y``
    have commuting Sylvester images (in particular when ``X == Y``).
    """
    S = _check_square(S)
    if eig is None:
        eig = spd_eigh(S)
    GX = sylvester_solve(S, X, eig=eig)
    GY = sylvester_solve(S, Y, eig=eig)
    C = GX @ GY - GY @ GX
    GC = sylvester_solve(S, C, eig=eig)
    return 3.0 * float(np.trace(GX @ S @ GC @ S @ GY))


def _pair_sums(lam):
    sums = lam[..., :, None] + lam[..., None, :]
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / sums
    bad = ~np.isfinite(inv) | (sums <= 0)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        i, j = int(idx[-2]), int(idx[-1])
        raise DomainError(
            f"eigenvalue pair ({i}, {j}) sums to {float(sums[tuple(idx)]):.3e}; "
            "1/(lambda_i + lambda_j) is not representable"
        )
    return inv


def closed_form_terms(lam):
    """The three traces of the closed form, each of shape ``lam.shape[:-1]``.

    ``U`` is strictly upper triangular with ``U_ij = 1/(lambda_i + lambda_j)``
    for ``i < j``; ``V = U + U^T``; ``L = diag(lam)``. Returns
    ``tr(U L V)``, ``tr(V L U)`` and ``tr(V L U L V)``.
    """
    lam = np.asarray(lam, dtype=float)
    U = np.triu(_pair_sums(lam), k=1)
    V = U + np.swapaxes(U, -1, -2)
    UL = U * lam[..., None, :]  # U @ diag(lam)
    VL = V * lam[..., None, :]
    t1 = np.einsum("...ij,...ji->...", UL, V)
    t2 = np.einsum("...ij,...ji->...", VL, U)
    t3 = np.einsum("...ij,...ji->...", VL @ UL, V)
    return t1, t2, t3


def scalar_curvature_from_eigenvalues(lam, signs=(1.0, 1.0, 1.0)):
    """Closed-form curvature from eigenvalues. ``signs`` exists for mutation tests."""
    t1, t2, t3 = closed_form_terms(lam)
    return 3.0 * (signs[0] * t1 + signs[1] * t2 + signs[2] * t3)


def scalar_curvature(S):
    """Wasserstein scalar curvature of one SPD matrix or a stack of them.

    Depends only on the spectrum; scales as ``1/c`` under ``S -> c S``.
    Returns a float for a single matrix, an array for a stack.
    """
    lam, _ = spd_eigh(S)
    rho = scalar_curvature_from_eigenvalues(lam)
    return float(rho) if np.ndim(rho) == 0 else rho


@dataclass(frozen=True)
class CurvatureBound:
    lambda_min2: float
    bound: float

    def holds(self, rho):
        return 0.0 < rho < self.bound


def curvature_bound(S):
    """Upper bound ``3 n (n - 1) / lambda_min2`` on the scalar curvature."""
    lam, _ = spd_eigh(S)
    n = lam.shape[-1]
    if n < 2:
        raise DomainError("curvature bound needs n >= 2")
    lm2 = float(lam[1])
    return CurvatureBound(lambda_min2=lm2, bound=3.0 * n * (n - 1) / lm2)


def canonical_basis(n):
    """Frobenius-orthonormal basis of symmetric matrices: E_ii, then (E_ij + E_ji)/sqrt(2)."""
    basis = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        basis.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(E)
    return basis


def tangent_basis(S, order=None):
    """Orthonormal basis of T_S SPD(n) under the Wasserstein metric.

    Modified Gram-Schmidt on the canonical symmetric basis, taken in ``order``
    (a permutation of ``range(n(n+1)/2)``) when given.
    """
    S = _check_square(S)
    eig = spd_eigh(S)
    canon = canonical_basis(S.shape[0])
    if order is not None:
        if sorted(order) != list(range(len(canon))):
            raise ValueError("order must be a permutation of the canonical basis indices")
        canon = [canon[i] for i in order]
    basis = []
    for E in canon:
        v = E.copy()
        for q in basis:
            v = v - metric(S, v, q, eig=eig) * q
        v = v / np.sqrt(metric(S, v, v, eig=eig))
        basis.append(v)
    return basis


def scalar_curvature_oracle(S, order=None, *, full=False):
    """Brute-force scalar curvature: sum the curvature tensor over a basis.

    Sums ``R(e_i, e_j, e_i, e_j)`` over all ordered pairs of a Wasserstein-
    orthonormal basis. With ``full=False`` (default) each unordered pair is
    counted once, the normalization ``scalar_curvature`` uses. ``full=True``
    returns the ordered double sum, i.e. the textbook Riemannian scalar
    curvature, which is twice the closed form.
    """
    S = _check_square(S)
    eig = spd_eigh(S)
    basis = tangent_basis(S, order)
    total = 0.0
    for ei in basis:
        for ej in basis:
            total += curvature_tensor(S, ei, ej, eig=eig)
    return total if full else 0.5 * total


def bures_distance(S1, S2):
    r"""Bures distance :math:`\sqrt{\operatorname{tr}(S_1 + S_2 - 2(S_1^{1/2} S_2 S_1^{1/2})^{1/2})}`.

    Evaluated as :math:`\|A - BU\|_F` with :math:`A = S_1^{1/2}`,
    :math:`B = S_2^{1/2}` and :math:`U` the orthogonal polar factor maximizing
    :math:`\operatorname{tr}(ABU)`. Same value, but it never subtracts two
    nearly equal traces, so identical arguments give zero to rounding rather
    than to the square root of rounding. Accepts stacks.
    """
    A = spd_sqrt(S1)
    B = spd_sqrt(S2)
    return _bures_from_roots(A, B)


def _bures_from_roots(A, B):
    W, _, Vt = np.linalg.svd(A @ B)
    U = np.swapaxes(Vt, -1, -2) @ np.swapaxes(W, -1, -2)
    D = A - B @ U
    return np.sqrt(np.sum(D * D, axis=(-2, -1)))


DISTANCE_FORMS = ("paper", "l2")


def _combine(mean_dist, bures, form):
    if form == "paper":
        return mean_dist + bures
    if form == "l2":
        return np.sqrt(mean_dist**2 + bures**2)
    raise ValueError(f"distance_form must be one of {DISTANCE_FORMS}, got {form!r}")


def wasserstein_distance(g1, g2, form="paper"):
    """Wasserstein distance between two Gaussians (objects with ``mean`` and ``cov``).

    ``form="paper"`` adds the mean displacement and the Bures term,
    ``||mu1 - mu2|| + bures(S1, S2)``; ``form="l2"`` is the usual
    root-sum-of-squares W2.
    """
    dmu = float(np.linalg.norm(np.asarray(g1.mean, float) - np.asarray(g2.mean, float)))
    b = float(bures_distance(g1.cov, g2.cov))
    return float(_combine(dmu, b, form))


def distance_matrix(means, covs, form="paper"):
    """Pairwise Wasserstein distances for a cloud given as stacked means/covariances."""
    means = np.asarray(means, dtype=float)
    covs = np.asarray(covs, dtype=float)
    N = len(means)
    if N == 0:
        raise ValueError("empty cloud")
    if covs.shape[0] != N:
        raise ValueError("means and covariances differ in length")
    roots = spd_sqrt(covs)
    iu, ju = np.triu_indices(N, k=1)
    D = np.zeros((N, N))
    if len(iu):
        bures = _bures_from_roots(roots[iu], roots[ju])
        dmu = np.linalg.norm(means[iu] - means[ju], axis=-1)
        vals = _combine(dmu, bures, form)
        D[iu, ju] = vals
        D[ju, iu] = vals
    return D
