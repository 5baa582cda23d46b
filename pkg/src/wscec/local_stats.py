"""kNN local statistics: lift a Euclidean cloud to a cloud of Gaussians on SPD(d)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geometry import regularization

COVARIANCE_NORMALIZATIONS = ("sum", "mean")


@dataclass(frozen=True)
class Neighborhood:
    center_index: int
    member_indices: np.ndarray
    member_points: np.ndarray


@dataclass(frozen=True)
class GaussianPoint:
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class SpdCloud:
    means: np.ndarray  # (N, d)
    covs: np.ndarray  # (N, d, d)
    k: int
    deltas: np.ndarray  # regularization added to each diagonal

    def __len__(self):
        return len(self.means)

    def __getitem__(self, i):
        return GaussianPoint(self.means[i], self.covs[i])


def _points(cloud):
    return np.asarray(getattr(cloud, "points", cloud), dtype=float)


def knn_indices(points, k):
    """Indices of the ``k`` nearest points to each point, itself included.

    Exhaustive squared-distance matrix plus a stable sort, so equal distances
    resolve to the lower index.
    """
    P = np.asarray(points, dtype=float)
    N = len(P)
    if not 2 <= k <= N:
        raise ParameterError(f"need 2 <= k <= {N} points, got k={k}")
    diff = P[:, None, :] - P[None, :, :]
    D = np.einsum("ijk,ijk->ij", diff, diff)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def knn(cloud, k):
    P = _points(cloud)
    idx = knn_indices(P, k)
    return [Neighborhood(i, idx[i], P[idx[i]]) for i in range(len(P))]


def _scatter(members, normalization):
    mu = members.mean(axis=-2)
    centred = members - mu[..., None, :]
    S = np.swapaxes(centred, -1, -2) @ centred
    if normalization == "mean":
        S = S / members.shape[-2]
    elif normalization != "sum":
        raise ParameterError(f"covariance_normalization must be one of {COVARIANCE_NORMALIZATIONS}")
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    delta = regularization(np.trace(S, axis1=-2, axis2=-1))
    d = members.shape[-1]
    S = S + delta[..., None, None] * np.eye(d)
    return mu, S, delta


def local_gaussian(nbhd, normalization="sum"):
    """Mean and scatter ``sum_j (N_j - mu)^T (N_j - mu)`` of one neighbourhood.

    The scatter is not divided by ``k`` under the default ``"sum"``
    normalization. A diagonal load ``1e-10 * max(1, tr)`` keeps it SPD.
    """
    members = np.asarray(getattr(nbhd, "member_points", nbhd), dtype=float)
    if len(members) < 2:
        raise ParameterError("a neighbourhood needs at least 2 members")
    mu, S, _ = _scatter(members, normalization)
    return GaussianPoint(mu, S)


def lift(cloud, k=20, normalization="sum"):
    P = _points(cloud)
    idx = knn_indices(P, k)
    mu, S, delta = _scatter(P[idx], normalization)
    return SpdCloud(mu, S, k, delta)
