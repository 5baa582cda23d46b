"""Curvature sequence, histogram and dispersion features of one heartbeat."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import WscecParams
from .embedding import embed
from .errors import DomainError, ParameterError, UndefinedFeatureError
from .geometry import scalar_curvature_from_eigenvalues, spd_eigh
from .ingest import normalize_beat
from .local_stats import lift


@dataclass(frozen=True)
class CurvatureHistogram:
    """Counts ``y_j`` of values in ``[m j, m (j + 1))`` for ``j = 0 .. floor(b/m)``."""

    m: float
    b: float
    counts: np.ndarray
    overflow_count: int

    @property
    def n_bins(self):
        """``floor(b / m)``, the index of the last bin."""
        return len(self.counts) - 1

    @property
    def edges(self):
        return self.m * np.arange(len(self.counts) + 1)

    @property
    def total(self):
        return int(self.counts.sum()) + self.overflow_count


@dataclass(frozen=True)
class DispersionPoint:
    cur1: float
    cur2: float


def curvature_sequence(cloud):
    """Scalar curvature of every covariance in an ``SpdCloud``, in cloud order."""
    covs = np.asarray(cloud.covs)
    if len(covs) == 0:
        raise ParameterError("empty SPD cloud")
    try:
        lam, _ = spd_eigh(covs)
        out = scalar_curvature_from_eigenvalues(lam)
    except DomainError:
        # redo point by point to name the offender
        for i, S in enumerate(covs):
            try:
                scalar_curvature_from_eigenvalues(spd_eigh(S)[0])
            except DomainError as exc:
                raise DomainError(f"point {i}: {exc}") from exc
        raise
    if not np.all(np.isfinite(out) & (out > 0)):
        bad = int(np.flatnonzero(~(np.isfinite(out) & (out > 0)))[0])
        raise DomainError(f"point {bad}: curvature {out[bad]!r} is not a positive finite number")
    return out


def _n_bins(m, b):
    return int(math.floor(b / m + 1e-12))


def histogram(W, m, b):
    if not m > 0 or not b > 0:
        raise ParameterError(f"histogram needs m > 0 and b > 0, got m={m}, b={b}")
    if m > b:
        raise ParameterError(f"bin width m={m} exceeds range b={b}")
    W = np.asarray(W, dtype=float)
    B = _n_bins(m, b)
    j = np.floor(W / m)
    inside = (j >= 0) & (j <= B)
    counts = np.bincount(j[inside].astype(np.int64), minlength=B + 1)
    return CurvatureHistogram(float(m), float(b), counts, int(np.count_nonzero(~inside)))


def dispersion(W, H, s=0, form="paper"):
    """Transverse and longitudinal dispersion ``(cur1, cur2)``.

    ``cur1`` is the median of the curvatures in ``[m s, b]``. ``cur2`` sums the
    squared deviations of every bin count ``y_j`` with ``j >= s + 1`` from
    ``sum_{U2} y / floor(b/m)`` and divides by ``|U2| - s - 1``, where ``U2``
    indexes the nonzero bins past ``s``. ``form="corrected"`` uses ``|U2|`` for
    both the mean divisor and the normalization.
    """
    W = np.asarray(W, dtype=float)
    B = H.n_bins
    if not 0 <= s <= B:
        raise ParameterError(f"s must lie in [0, {B}], got {s}")
    U1 = W[(W >= H.m * s) & (W <= H.b)]
    if U1.size == 0:
        raise UndefinedFeatureError(f"no curvature values in [{H.m * s}, {H.b}]")
    cur1 = float(np.median(U1))

    tail = H.counts[s + 1 :].astype(float)
    U2 = np.count_nonzero(tail)
    mass = tail.sum()
    if form == "paper":
        denom = U2 - s - 1
        if denom <= 0:
            raise UndefinedFeatureError(f"|U2| - s - 1 = {denom} (|U2| = {U2}, s = {s})")
        mean = mass / B
    elif form == "corrected":
        denom = U2
        if denom <= 0:
            raise UndefinedFeatureError("no nonzero bins past s")
        mean = mass / U2
    else:
        raise ParameterError(f"unknown cur2 form {form!r}")
    cur2 = float(np.sum((tail - mean) ** 2) / denom)
    return DispersionPoint(cur1, cur2)


@dataclass
class BeatFeatures:
    source_id: str
    dispersion: DispersionPoint
    n_curvatures: int
    overflow_count: int
    cloud: object = None
    spd: object = None
    curvatures: np.ndarray | None = None
    histogram: CurvatureHistogram | None = None


def curvatures_of(beat, params=WscecParams()):
    """Embed, lift and evaluate curvature; returns ``(cloud, spd_cloud, W)``."""
    beat = normalize_beat(beat, params.amplitude_norm)
    cloud = embed(beat, params.embedding)
    spd = lift(cloud, params.k, params.covariance_normalization)
    return cloud, spd, curvature_sequence(spd)


def feature_extract(beat, params=WscecParams(), b=None, keep=False):
    """Full per-beat chain: embed, lift, curvature, histogram, dispersion.

    ``b`` defaults to ``params.curvature_cap``. Errors are re-raised with the
    beat's ``source_id`` prefixed. With ``keep=True`` all intermediates are
    attached to the result.
    """
    b = params.curvature_cap if b is None else b
    sid = getattr(beat, "source_id", "")
    try:
        cloud, spd, W = curvatures_of(beat, params)
        H = histogram(W, params.m, b)
        point = dispersion(W, H, params.s, params.cur2_form)
    except (DomainError, ParameterError, UndefinedFeatureError) as exc:
        raise type(exc)(f"{sid}: {exc}") from exc
    res = BeatFeatures(sid, point, len(W), H.overflow_count)
    if keep:
        res.cloud, res.spd, res.curvatures, res.histogram = cloud, spd, W, H
    return res
