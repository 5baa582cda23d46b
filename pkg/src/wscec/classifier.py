"""Symptom-domain partition of the dispersion plane, the batch classifier, and
scoring (TPR/NRR, PCA confidence ellipses)."""
from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy import special

from .config import WscecParams
from .errors import (
    DegenerateEllipseError,
    EvaluationUnavailableError,
    ParameterError,
    WscecError,
)
from .features import DispersionPoint, curvatures_of, feature_extract
from .ingest import GroundTruthLabel

log = logging.getLogger(__name__)


class Domain(str, Enum):
    NORMAL = "D0"
    ATRIAL = "D1"
    VENTRICULAR = "D2"
    BUNDLE_BRANCH = "D3"
    UNCLASSIFIED = "D4"

    @property
    def group(self):
        return _GROUP_NAMES[self]


_GROUP_NAMES = {
    Domain.NORMAL: "Normal",
    Domain.ATRIAL: "Atrial abnormal",
    Domain.VENTRICULAR: "Ventricular abnormal",
    Domain.BUNDLE_BRANCH: "Bundle branch block",
    Domain.UNCLASSIFIED: "Unclassified",
}


class DiagnosisLabel(str, Enum):
    NORMAL = "Normal"
    AP = "AP"
    VF = "VF"
    FVN = "FVN"
    PVC = "PVC"
    VENTRICULAR_ABNORMAL = "VentricularAbnormal"
    LBBB = "LBBB"
    RBBB = "RBBB"
    BUNDLE_BRANCH_BLOCK = "BundleBranchBlock"
    UNCLASSIFIED = "Unclassified"

    @property
    def domain(self):
        return LABEL_DOMAIN[self]


LABEL_DOMAIN = {
    DiagnosisLabel.NORMAL: Domain.NORMAL,
    DiagnosisLabel.AP: Domain.ATRIAL,
    DiagnosisLabel.VF: Domain.VENTRICULAR,
    DiagnosisLabel.FVN: Domain.VENTRICULAR,
    DiagnosisLabel.PVC: Domain.VENTRICULAR,
    DiagnosisLabel.VENTRICULAR_ABNORMAL: Domain.VENTRICULAR,
    DiagnosisLabel.LBBB: Domain.BUNDLE_BRANCH,
    DiagnosisLabel.RBBB: Domain.BUNDLE_BRANCH,
    DiagnosisLabel.BUNDLE_BRANCH_BLOCK: Domain.BUNDLE_BRANCH,
    DiagnosisLabel.UNCLASSIFIED: Domain.UNCLASSIFIED,
}

TRUTH_DOMAIN = {
    GroundTruthLabel.N: Domain.NORMAL,
    GroundTruthLabel.AP: Domain.ATRIAL,
    GroundTruthLabel.PVC: Domain.VENTRICULAR,
    GroundTruthLabel.FVN: Domain.VENTRICULAR,
    GroundTruthLabel.VF: Domain.VENTRICULAR,
    GroundTruthLabel.LBBB: Domain.BUNDLE_BRANCH,
    GroundTruthLabel.RBBB: Domain.BUNDLE_BRANCH,
}


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __contains__(self, x):
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below


@dataclass(frozen=True)
class Rect:
    cur1: Interval
    cur2: Interval

    def __contains__(self, p):
        return p[0] in self.cur1 and p[1] in self.cur2


INF = math.inf


@dataclass(frozen=True)
class SymptomDomainPartition:
    """Axis-aligned rectangles on the ``(cur1, cur2)`` plane.

    Brackets follow the published intervals exactly. ``b`` is the right end of
    the normal domain. Note that ``cur1 == 10`` lies in neither the
    ventricular ``(10, 25]`` nor the bundle-branch ``[0, 10)`` strip.
    """

    b: float = 200.0

    @property
    def d0(self):
        return Rect(Interval(25, self.b, False, True), Interval(0, 25))

    d1 = Rect(Interval(25, 90, False, True), Interval(25, INF, False, False))
    d2 = Rect(Interval(10, 25, False, True), Interval(0, INF, True, False))
    d21 = Rect(Interval(10, 25, False, True), Interval(0, 50))
    d22 = Rect(Interval(10, 25, False, True), Interval(40, 70))
    d23 = Rect(Interval(10, 25, False, True), Interval(60, INF, True, False))
    d3 = Rect(Interval(0, 10, True, False), Interval(0, INF, True, False))
    d31 = Rect(Interval(0, 10, True, False), Interval(0, 140))
    d32 = Rect(Interval(0, 10, True, False), Interval(100, INF, True, False))

    def domain(self, p):
        p = _as_pair(p)
        if p in self.d0:
            return Domain.NORMAL
        if p in self.d1:
            return Domain.ATRIAL
        if p in self.d2:
            return Domain.VENTRICULAR
        if p in self.d3:
            return Domain.BUNDLE_BRANCH
        return Domain.UNCLASSIFIED

    def classify(self, p):
        p = _as_pair(p)
        dom = self.domain(p)
        if dom is Domain.NORMAL:
            return DiagnosisLabel.NORMAL
        if dom is Domain.ATRIAL:
            return DiagnosisLabel.AP
        if dom is Domain.VENTRICULAR:
            hits = [p in self.d21, p in self.d22, p in self.d23]
            if sum(hits) > 1:
                return DiagnosisLabel.VENTRICULAR_ABNORMAL
            return (DiagnosisLabel.VF, DiagnosisLabel.FVN, DiagnosisLabel.PVC)[hits.index(True)]
        if dom is Domain.BUNDLE_BRANCH:
            in31, in32 = p in self.d31, p in self.d32
            if in31 and in32:
                return DiagnosisLabel.BUNDLE_BRANCH_BLOCK
            return DiagnosisLabel.LBBB if in31 else DiagnosisLabel.RBBB
        return DiagnosisLabel.UNCLASSIFIED


def _as_pair(p):
    if isinstance(p, DispersionPoint):
        return (p.cur1, p.cur2)
    c1, c2 = p
    return (float(c1), float(c2))


def classify(p, partition=SymptomDomainPartition()):
    return partition.classify(p)


def select_b(standard_beat, params=WscecParams()):
    """``min(max curvature of the standard beat, 3 d (d - 1) / epsilon)``."""
    _, _, W = curvatures_of(standard_beat, params)
    return float(min(np.max(W), params.curvature_cap))


@dataclass
class BeatResult:
    index: int
    source_id: str
    label: DiagnosisLabel
    domain: Domain
    cur1: float | None = None
    cur2: float | None = None
    truth: GroundTruthLabel = GroundTruthLabel.UNLABELED
    n_curvatures: int = 0
    overflow_count: int = 0
    note: str = ""

    @property
    def dispersion(self):
        if self.cur1 is None:
            return None
        return DispersionPoint(self.cur1, self.cur2)

    def to_dict(self):
        d = asdict(self)
        d["label"] = self.label.value
        d["domain"] = self.domain.value
        d["truth"] = self.truth.value
        return d


@dataclass
class ClassificationReport:
    beats: list
    b: float
    params: WscecParams
    standard_id: str = ""
    tallies: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tallies:
            counts = Counter(r.domain for r in self.beats)
            self.tallies = {d: counts.get(d, 0) for d in Domain}

    @property
    def labels(self):
        return [r.label for r in self.beats]

    def to_dict(self):
        return {
            "b": self.b,
            "standard_id": self.standard_id,
            "params": self.params.to_dict(),
            "tallies": {d.value: n for d, n in self.tallies.items()},
            "beats": [r.to_dict() for r in self.beats],
        }

    @classmethod
    def from_dict(cls, data):
        beats = [
            BeatResult(
                index=r["index"],
                source_id=r["source_id"],
                label=DiagnosisLabel(r["label"]),
                domain=Domain(r["domain"]),
                cur1=r.get("cur1"),
                cur2=r.get("cur2"),
                truth=GroundTruthLabel(r.get("truth", "Unlabeled")),
                n_curvatures=r.get("n_curvatures", 0),
                overflow_count=r.get("overflow_count", 0),
                note=r.get("note", ""),
            )
            for r in data["beats"]
        ]
        return cls(beats, data["b"], WscecParams(**data["params"]), data.get("standard_id", ""))


def _extract_one(args):
    index, beat, params, b = args
    partition = SymptomDomainPartition(b)
    truth = getattr(beat, "annotation", GroundTruthLabel.UNLABELED)
    try:
        f = feature_extract(beat, params, b)
    except WscecError as exc:
        return BeatResult(index, beat.source_id, DiagnosisLabel.UNCLASSIFIED, Domain.UNCLASSIFIED,
                          truth=truth, note=f"{type(exc).__name__}: {exc}")
    p = f.dispersion
    label = partition.classify(p)
    note = ""
    if label is DiagnosisLabel.UNCLASSIFIED and p.cur1 == 10.0:
        note = "cur1 == 10 falls between the (10, 25] and [0, 10) strips"
    return BeatResult(index, beat.source_id, label, label.domain, p.cur1, p.cur2, truth,
                      f.n_curvatures, f.overflow_count, note)


def wscec_run(beats, standard, params=WscecParams(), jobs=1, b=None):
    """Classify a batch of heartbeats against a standard normal beat.

    ``b`` comes from ``select_b(standard)`` unless given. A beat whose features
    cannot be computed is labelled Unclassified with the error in ``note``;
    the batch itself never aborts on one beat. Results are in input order
    regardless of ``jobs``.
    """
    beats = list(beats)
    if not beats:
        raise ParameterError("empty batch")
    if b is None:
        b = select_b(standard, params)
    tasks = [(i, beat, params, b) for i, beat in enumerate(beats)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_extract_one(t) for t in tasks]
    for r in results:
        if r.note:
            log.info("beat %s: %s", r.source_id, r.note)
    return ClassificationReport(results, b, params, getattr(standard, "source_id", ""))


# --- scoring ---------------------------------------------------------------


@dataclass
class DomainScore:
    domain: Domain
    original_size: int
    classified_size: int
    tpr: float
    nrr: float


@dataclass
class EvaluationTable:
    scores: dict
    confusion: dict  # (truth label, predicted label) -> count

    def __getitem__(self, domain):
        return self.scores[Domain(domain)]


def _rate(num, den):
    # an empty reference set has nothing to miss
    return 1.0 if den == 0 else num / den


def evaluate(report_or_pairs):
    """Per-domain true positive rate and noise removal rate.

    For each domain ``j``: ``TPR = |pred j and true j| / |true j|`` and
    ``NRR = 1 - |pred j and true not j| / |true not j|``. Domains with an empty
    reference set score 1.0. Accepts a ``ClassificationReport`` or an iterable
    of ``(truth, predicted_label)`` pairs.
    """
    if isinstance(report_or_pairs, ClassificationReport):
        pairs = [(r.truth, r.label) for r in report_or_pairs.beats]
    else:
        pairs = [(GroundTruthLabel(t), DiagnosisLabel(p)) for t, p in report_or_pairs]
    if not pairs:
        raise EvaluationUnavailableError("no beats to evaluate")
    missing = sum(1 for t, _ in pairs if t not in TRUTH_DOMAIN)
    if missing:
        raise EvaluationUnavailableError(f"{missing} beat(s) lack a ground-truth label")
    truth = np.array([TRUTH_DOMAIN[t].value for t, _ in pairs])
    pred = np.array([p.domain.value for _, p in pairs])
    scores = {}
    for d in Domain:
        t, q = truth == d.value, pred == d.value
        tp = int(np.sum(t & q))
        fp = int(np.sum(~t & q))
        scores[d] = DomainScore(d, int(t.sum()), int(q.sum()), _rate(tp, int(t.sum())),
                                1.0 - (0.0 if (~t).sum() == 0 else fp / int((~t).sum())))
    confusion = Counter((t, p) for t, p in pairs)
    return EvaluationTable(scores, dict(confusion))


# --- confidence ellipses -----------------------------------------------------


def chi2_quantile(p, dof=2, tol=1e-13):
    """Chi-square quantile by bisection on the regularized lower gamma function."""
    if not 0 < p < 1:
        raise ParameterError(f"coverage must lie in (0, 1), got {p}")
    cdf = lambda x: special.gammainc(dof / 2.0, x / 2.0)
    lo, hi = 0.0, 1.0
    while cdf(hi) < p:
        hi *= 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConfidenceEllipse:
    label: str
    center: tuple
    semi_axes: tuple  # major, minor
    angle: float  # radians, major axis from the cur1 axis, in (-pi/2, pi/2]
    coverage: float

    def contains(self, p):
        c, s = math.cos(self.angle), math.sin(self.angle)
        dx, dy = p[0] - self.center[0], p[1] - self.center[1]
        u, v = c * dx + s * dy, -s * dx + c * dy
        return (u / self.semi_axes[0]) ** 2 + (v / self.semi_axes[1]) ** 2 <= 1.0


def confidence_ellipse(points, coverage=0.95, label=""):
    """PCA ellipse of a 2-D point set: mean centre, covariance eigenvectors as
    axes, semi-axes ``sqrt(chi2_2(coverage) * eigenvalue)``."""
    P = np.array([_as_pair(p) for p in points], dtype=float)
    if len(P) < 3:
        raise ParameterError("a confidence ellipse needs at least 3 points")
    q = chi2_quantile(coverage, 2)
    center = P.mean(axis=0)
    C = np.cov(P, rowvar=False)
    lam, V = np.linalg.eigh(C)
    if lam[-1] <= 0 or lam[0] <= 1e-12 * lam[-1]:
        raise DegenerateEllipseError("points are collinear; covariance is singular")
    major = V[:, 1]
    angle = math.atan2(major[1], major[0])
    if angle <= -math.pi / 2:
        angle += math.pi
    elif angle > math.pi / 2:
        angle -= math.pi
    return ConfidenceEllipse(label, (float(center[0]), float(center[1])),
                             (math.sqrt(q * lam[1]), math.sqrt(q * lam[0])), angle, coverage)
