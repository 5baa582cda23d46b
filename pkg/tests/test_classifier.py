import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from wscec.classifier import (
    TRUTH_DOMAIN,
    ClassificationReport,
    DiagnosisLabel,
    Domain,
    SymptomDomainPartition,
    chi2_quantile,
    classify,
    confidence_ellipse,
    evaluate,
    select_b,
    wscec_run,
)
from wscec.config import WscecParams
from wscec.errors import DegenerateEllipseError, EvaluationUnavailableError, ParameterError
from wscec.features import curvatures_of
from wscec.ingest import GroundTruthLabel, Heartbeat
from wscec.synthetic import EXEMPLARS, exemplar_batch, standard_beat

D = DiagnosisLabel
G = GroundTruthLabel


# --- classify ---------------------------------------------------------------


@pytest.mark.parametrize("point,label", [
    ((100, 10), D.NORMAL),
    ((15, 100), D.PVC),
    ((15, 65), D.VENTRICULAR_ABNORMAL),
    ((5, 120), D.BUNDLE_BRANCH_BLOCK),
    ((150, 30), D.UNCLASSIFIED),
    ((50, 30), D.AP),
    ((15, 20), D.VF),
    ((15, 55), D.FVN),
    ((15, 45), D.VENTRICULAR_ABNORMAL),
    ((5, 50), D.LBBB),
    ((5, 200), D.RBBB),
])
def test_labels(point, label):
    assert classify(point) is label


@pytest.mark.parametrize("point,label", [
    ((10, 5), D.UNCLASSIFIED),  # between (10, 25] and [0, 10)
    ((25, 5), D.VF),  # (10, 25] includes 25
    ((25.0001, 5), D.NORMAL),
    ((200, 25), D.NORMAL),
    ((200.0001, 5), D.UNCLASSIFIED),
    ((90, 26), D.AP),
    ((90.0001, 26), D.UNCLASSIFIED),
    ((50, 25), D.NORMAL),  # cur2 = 25 closes D0 and opens D1
    ((15, 40), D.VENTRICULAR_ABNORMAL),
    ((15, 50), D.VENTRICULAR_ABNORMAL),
    ((15, 50.0001), D.FVN),
    ((15, 60), D.VENTRICULAR_ABNORMAL),
    ((15, 70), D.VENTRICULAR_ABNORMAL),
    ((15, 70.0001), D.PVC),
    ((0, 100), D.BUNDLE_BRANCH_BLOCK),
    ((9.9999, 140), D.BUNDLE_BRANCH_BLOCK),
    ((5, 140.0001), D.RBBB),
    ((5, 99.9999), D.LBBB),
])
def test_boundaries(point, label):
    assert classify(point) is label


def test_d0_follows_b():
    assert classify((150, 5), SymptomDomainPartition(120)) is D.UNCLASSIFIED
    assert classify((120, 5), SymptomDomainPartition(120)) is D.NORMAL


@given(st.floats(0, 200), st.floats(0, 1e4))
def test_label_consistent_with_domain(c1, c2):
    part = SymptomDomainPartition()
    lab = part.classify((c1, c2))
    assert lab.domain is part.domain((c1, c2))


@given(st.floats(10.5, 24.5), st.floats(0.5, 39.5), st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_interior_perturbation_keeps_label(c1, c2, e1, e2):
    assert classify((c1, c2)) is classify((c1 + e1, c2 + e2)) is D.VF


# --- select_b ---------------------------------------------------------------


def test_cap_is_200():
    assert WscecParams().curvature_cap == pytest.approx(200.0)
    assert 3 * 3 * 2 / 0.09 == pytest.approx(200.0)


def test_select_b_takes_minimum():
    beat = standard_beat()
    _, _, W = curvatures_of(beat)
    assert select_b(beat) == min(W.max(), 200.0) == 200.0
    loose = WscecParams(epsilon=1e-6)
    assert select_b(beat, loose) == pytest.approx(curvatures_of(beat, loose)[2].max())
    tight = WscecParams(epsilon=0.9)
    assert select_b(beat, tight) == pytest.approx(20.0)


# --- wscec_run --------------------------------------------------------------


def test_standard_beat_alone_is_normal():
    rep = wscec_run([standard_beat()], standard_beat())
    assert rep.labels == [D.NORMAL]
    assert rep.b == 200.0


def test_empty_batch():
    with pytest.raises(ParameterError):
        wscec_run([], standard_beat())


def test_exemplar_batch_tallies():
    rep = wscec_run(exemplar_batch(), standard_beat())
    assert len(rep.beats) == 7 and sum(rep.tallies.values()) == 7
    assert [r.domain for r in rep.beats] == [TRUTH_DOMAIN[G(s.label)] for s in EXEMPLARS.values()]


def test_failed_beat_becomes_unclassified():
    flat = Heartbeat(np.full(300, 1.0), source_id="flat")
    rep = wscec_run([standard_beat(), flat], standard_beat())
    assert rep.beats[1].label is D.UNCLASSIFIED
    assert "flat" in rep.beats[1].note and rep.beats[1].cur1 is None


def test_parallel_matches_serial():
    beats = exemplar_batch()
    a = wscec_run(beats, standard_beat(), jobs=1)
    b = wscec_run(beats, standard_beat(), jobs=2)
    assert a.to_dict() == b.to_dict()


def test_report_round_trip():
    rep = wscec_run(exemplar_batch()[:3], standard_beat())
    back = ClassificationReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict()


# --- evaluate ---------------------------------------------------------------


def counting_oracle(pairs):
    """TPR/NRR per domain by explicit counting."""
    out = {}
    for d in Domain:
        true_j = [i for i, (t, _) in enumerate(pairs) if TRUTH_DOMAIN[t] is d]
        rest = [i for i, (t, _) in enumerate(pairs) if TRUTH_DOMAIN[t] is not d]
        pred_j = {i for i, (_, p) in enumerate(pairs) if p.domain is d}
        tpr = sum(1 for i in true_j if i in pred_j) / len(true_j) if true_j else 1.0
        nrr = 1 - sum(1 for i in rest if i in pred_j) / len(rest) if rest else 1.0
        out[d] = (len(true_j), len(pred_j), tpr, nrr)
    return out


TRUTHS = [g for g in G if g is not G.UNLABELED]


@given(st.lists(st.tuples(st.sampled_from(TRUTHS), st.sampled_from(list(D))), min_size=1, max_size=60))
def test_evaluate_matches_oracle(pairs):
    table = evaluate(pairs)
    for d, (orig, cls, tpr, nrr) in counting_oracle(pairs).items():
        s = table[d]
        assert (s.original_size, s.classified_size, s.tpr, s.nrr) == (orig, cls, tpr, nrr)
    assert sum(table.confusion.values()) == len(pairs)


def test_perfect_classification():
    pairs = [(G.N, D.NORMAL), (G.AP, D.AP), (G.PVC, D.PVC), (G.LBBB, D.BUNDLE_BRANCH_BLOCK)]
    table = evaluate(pairs)
    assert all(s.tpr == 1.0 and s.nrr == 1.0 for s in table.scores.values())


def test_all_unclassified():
    pairs = [(G.N, D.UNCLASSIFIED), (G.VF, D.UNCLASSIFIED), (G.RBBB, D.UNCLASSIFIED)]
    table = evaluate(pairs)
    for d in (Domain.NORMAL, Domain.VENTRICULAR, Domain.BUNDLE_BRANCH):
        assert table[d].tpr == 0.0


def test_missing_truth():
    with pytest.raises(EvaluationUnavailableError):
        evaluate([(G.N, D.NORMAL), (G.UNLABELED, D.NORMAL)])


def test_reconstructed_published_table():
    # A confusion matrix consistent with the published sizes (2500/200/1400/900
    # original, 2513/212/1305/970 classified, no unclassified beats).
    counts = {
        (G.N, D.NORMAL): 2499, (G.N, D.LBBB): 1,
        (G.AP, D.AP): 191, (G.AP, D.NORMAL): 3, (G.AP, D.PVC): 6,
        (G.PVC, D.PVC): 1279, (G.PVC, D.NORMAL): 11, (G.PVC, D.AP): 21, (G.PVC, D.RBBB): 89,
        (G.LBBB, D.LBBB): 880, (G.LBBB, D.PVC): 20,
    }
    pairs = [k for k, n in counts.items() for _ in range(n)]
    t = evaluate(pairs)
    sizes = [(t[d].original_size, t[d].classified_size) for d in list(Domain)[:4]]
    assert sizes == [(2500, 2513), (200, 212), (1400, 1305), (900, 970)]
    pct = lambda x: round(100 * x, 2)
    assert [pct(t[d].tpr) for d in list(Domain)[:4]] == [99.96, 95.5, 91.36, 97.78]
    # published NRR: 99.44, 99.56, 99.35, 97.80; the ventricular entry cannot
    # be met with these sizes (26 false positives over 3600 gives 99.28)
    assert [pct(t[d].nrr) for d in list(Domain)[:4]] == [99.44, 99.56, 99.28, 97.8]


# --- ellipses ---------------------------------------------------------------


def test_chi2_quantile_matches_scipy():
    assert chi2_quantile(0.95) == pytest.approx(5.991464547107979, rel=1e-10)
    for p in (0.5, 0.9, 0.99):
        for k in (1, 2, 3):
            assert chi2_quantile(p, k) == pytest.approx(stats.chi2.ppf(p, k), rel=1e-10)


def test_symmetric_points_axis_aligned():
    pts = [(2, 0), (-2, 0), (0, 1), (0, -1)]
    e = confidence_ellipse(pts)
    assert e.center == pytest.approx((0, 0))
    assert e.angle == pytest.approx(0.0, abs=1e-12)
    assert e.semi_axes[0] / e.semi_axes[1] == pytest.approx(2.0)


def test_isotropic_equal_axes():
    t = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    e = confidence_ellipse(np.c_[np.cos(t), np.sin(t)])
    assert e.semi_axes[0] == pytest.approx(e.semi_axes[1])


def test_known_covariance():
    # exact sample covariance diag(4, 1)
    pts = np.array([[2, 0], [-2, 0], [0, 1], [0, -1]]) * math.sqrt(3 / 2)
    e = confidence_ellipse(pts, 0.95)
    q = chi2_quantile(0.95)
    assert e.semi_axes == pytest.approx((math.sqrt(q * 4), math.sqrt(q * 1)))


def test_coverage_of_gaussian_sample():
    rng = np.random.default_rng(0)
    P = rng.multivariate_normal([50, 10], [[30, 12], [12, 20]], size=4000)
    e = confidence_ellipse(P, 0.95)
    inside = np.mean([e.contains(p) for p in P])
    assert inside == pytest.approx(0.95, abs=0.01)


def test_degenerate_ellipse():
    with pytest.raises(DegenerateEllipseError):
        confidence_ellipse([(0, 0), (1, 1), (2, 2), (3, 3)])
    with pytest.raises(ParameterError):
        confidence_ellipse([(0, 0), (1, 1)])
    with pytest.raises(ParameterError):
        confidence_ellipse([(0, 0), (1, 0), (0, 1)], coverage=1.0)


def test_tally_counter():
    rep = wscec_run(exemplar_batch(), standard_beat())
    assert rep.tallies == {d: Counter(r.domain for r in rep.beats).get(d, 0) for d in Domain}
