"""Exit criteria. Each test carries one criterion; a summary line per
criterion is printed at the end of the run (see conftest)."""
import itertools
import os
import time
from collections import Counter

import numpy as np
import pytest

from wscec import geometry as geo
from wscec.classifier import TRUTH_DOMAIN, DiagnosisLabel, Domain, SymptomDomainPartition, evaluate, wscec_run
from wscec.embedding import EmbeddingParams, embed
from wscec.features import feature_extract
from wscec.ingest import GroundTruthLabel, Heartbeat
from wscec.local_stats import lift
from wscec.selftest import random_spd, random_symmetric
from wscec.synthetic import EXEMPLARS, exemplar_batch, standard_beat, synthetic_beat

SEED = 20240601


def worst_oracle_error(rng, signs=(1.0, 1.0, 1.0)):
    worst = 0.0
    for n, count in ((3, 100), (2, 25)):
        for _ in range(count):
            S = random_spd(rng, n)
            lam, _ = geo.spd_eigh(S)
            closed = float(geo.scalar_curvature_from_eigenvalues(lam, signs))
            oracle = geo.scalar_curvature_oracle(S)
            worst = max(worst, abs(closed - oracle) / abs(oracle))
    return worst


@pytest.mark.acceptance("oracle equivalence: closed form vs basis sum, rel <= 1e-8, 100 SPD(3) + 25 SPD(2), < 30 s")
def test_oracle_equivalence(record_property):
    t0 = time.perf_counter()
    worst = worst_oracle_error(np.random.default_rng(SEED))
    elapsed = time.perf_counter() - t0
    record_property("note", f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-8
    assert elapsed < 30


@pytest.mark.acceptance("curvature bound: 0 < rho < 3n(n-1)/lambda_min2, 1000 samples, n in {2,3,5}")
def test_curvature_bound(record_property):
    rng = np.random.default_rng(SEED)
    violations = 0
    for i in range(1000):
        n = (2, 3, 5)[i % 3]
        S = random_spd(rng, n, (-2.0, 2.0))
        rho = geo.scalar_curvature(S)
        lam = np.linalg.eigvalsh(S)
        if not 0 < rho < 3 * n * (n - 1) / lam[1]:
            violations += 1
    record_property("note", f"{violations} violations")
    assert violations == 0


@pytest.mark.acceptance("homogeneity: |c rho(cS) - rho(S)| <= 1e-10 rho(S), c in {0.1, 2, 10}, 100 SPD(3)")
def test_homogeneity(record_property):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        S = random_spd(rng, 3)
        rho = geo.scalar_curvature(S)
        for c in (0.1, 2.0, 10.0):
            worst = max(worst, abs(c * geo.scalar_curvature(c * S) - rho) / rho)
    record_property("note", f"max rel err {worst:.2e}")
    assert worst <= 1e-10


@pytest.mark.acceptance("Sylvester residual <= 1e-10 ||Y|| on 1000 pairs; sqrt reconstruction <= 1e-10 relative")
def test_sylvester_and_sqrt(record_property):
    rng = np.random.default_rng(SEED)
    res = rec = 0.0
    for i in range(1000):
        n = (2, 3, 5)[i % 3]
        S = random_spd(rng, n)
        Y = random_symmetric(rng, n)
        G = geo.sylvester_solve(S, Y)
        res = max(res, np.linalg.norm(S @ G + G @ S - Y) / np.linalg.norm(Y))
        R = geo.spd_sqrt(S)
        rec = max(rec, np.linalg.norm(R @ R - S) / np.linalg.norm(S))
    record_property("note", f"residual {res:.2e}, sqrt {rec:.2e}")
    assert res <= 1e-10 and rec <= 1e-10


class _G:
    def __init__(self, mean, cov):
        self.mean, self.cov = np.asarray(mean, float), np.asarray(cov, float)


@pytest.mark.acceptance("Wasserstein analytic cases exact to 1e-12")
def test_wasserstein_analytic(record_property):
    rng = np.random.default_rng(SEED)
    errs = []
    for n in (2, 3, 5):
        S = random_spd(rng, n)
        mu = rng.normal(size=n)
        errs.append(geo.wasserstein_distance(_G(mu, S), _G(mu, S)))
        errs.append(abs(geo.wasserstein_distance(_G(np.zeros(n), np.eye(n)), _G(np.zeros(n), 4 * np.eye(n))) - np.sqrt(n)))
        dmu = rng.normal(size=n)
        errs.append(abs(geo.wasserstein_distance(_G(mu, S), _G(mu + dmu, S)) - np.linalg.norm(dmu)))
    record_property("note", f"max abs err {max(errs):.2e}")
    assert max(errs) <= 1e-12


@pytest.mark.acceptance("pipeline counts: 300 samples, l=10, tau=1, d=3 -> 289 embedded and 289 SPD points; bit-identical reruns")
def test_pipeline_counts_and_determinism():
    beat = synthetic_beat("N", 0.05, 11)
    params = EmbeddingParams(window_length=10, stride=1, embed_dim=3)
    runs = []
    for _ in range(2):
        cloud = embed(beat, params)
        spd = lift(cloud, k=20)
        runs.append((cloud.points, spd.covs, feature_extract(beat, keep=True).curvatures))
    assert runs[0][0].shape == (289, 3) and len(runs[0][1]) == 289
    for a, b in zip(*runs):
        assert a.tobytes() == b.tobytes()


@pytest.mark.acceptance("curvature range: >= 95% of normal-fixture curvatures in [0, 200]")
def test_curvature_range(record_property):
    W = feature_extract(standard_beat(), keep=True).curvatures
    frac = float(np.mean((W >= 0) & (W <= 200)))
    record_property("note", f"{100 * frac:.1f}% in range")
    assert frac >= 0.95


def _membership(part, p):
    """Independent label count from rectangle membership alone."""
    tops = [p in part.d0, p in part.d1, p in part.d2, p in part.d3]
    assert sum(tops) <= 1, f"overlapping domains at {p}"
    return tops


@pytest.mark.acceptance("partition totality: grid [0,200]x[0,300] step 0.5 plus bracket edges, one label each, every label used")
def test_partition_totality(record_property):
    part = SymptomDomainPartition(200.0)
    edges = [0, 10, 25, 40, 50, 60, 70, 90, 100, 140, 200]
    near = sorted({v + e for v in edges for e in (-1e-9, 0.0, 1e-9) if v + e >= 0})
    grid1 = np.union1d(np.arange(0, 200.5, 0.5), near)
    grid2 = np.union1d(np.arange(0, 300.5, 0.5), near)
    seen = Counter()
    for c1, c2 in itertools.product(grid1, grid2):
        p = (float(c1), float(c2))
        lab = part.classify(p)
        assert isinstance(lab, DiagnosisLabel)
        tops = _membership(part, p)
        assert (lab.domain is Domain.UNCLASSIFIED) == (not any(tops))
        seen[lab] += 1
    record_property("note", f"{sum(seen.values())} points, {len(seen)} labels")
    assert set(seen) == set(DiagnosisLabel)


def counting_oracle(truth, pred):
    rows = {}
    for d in Domain:
        pos = [i for i, t in enumerate(truth) if TRUTH_DOMAIN[t] is d]
        neg = [i for i, t in enumerate(truth) if TRUTH_DOMAIN[t] is not d]
        hit = [i for i, p in enumerate(pred) if p.domain is d]
        tp = len([i for i in pos if i in hit])
        fp = len([i for i in neg if i in hit])
        rows[d] = (len(pos), len(hit), tp / len(pos) if pos else 1.0, 1 - fp / len(neg) if neg else 1.0)
    return rows


@pytest.mark.acceptance("evaluation vs confusion-counting oracle, 500 synthetic beats, exact")
def test_evaluate_oracle():
    rng = np.random.default_rng(SEED)
    truths = [g for g in GroundTruthLabel if g is not GroundTruthLabel.UNLABELED]
    beats = [synthetic_beat(truths[i], 0.03, i) for i in rng.integers(0, len(truths), 500)]
    truth = [b.annotation for b in beats]
    pred = [list(DiagnosisLabel)[i] for i in rng.integers(0, len(DiagnosisLabel), 500)]
    table = evaluate(list(zip(truth, pred)))
    for d, row in counting_oracle(truth, pred).items():
        s = table[d]
        assert (s.original_size, s.classified_size, s.tpr, s.nrr) == row


MITDB = os.environ.get("WSCEC_MITDB")


@pytest.mark.acceptance("Table 1 replication (conditional): MIT-BIH sample, or 7-exemplar stand-in when data is absent")
def test_table1_or_stand_in(record_property):
    if MITDB and os.path.isdir(MITDB):
        pytest.skip("MIT-BIH run lives in scripts/table1_experiment.py")
    record_property("note", "WAIVED: MIT-BIH records not available; running the synthetic 7-class stand-in")
    rep = wscec_run(exemplar_batch(), standard_beat(), jobs=1)
    got = [r.domain for r in rep.beats]
    want = [TRUTH_DOMAIN[GroundTruthLabel.parse(s.label)] for s in EXEMPLARS.values()]
    record_property("note", "domains: " + ", ".join(d.value for d in got))
    assert got == want


@pytest.mark.acceptance("mutation sensitivity: flipping any one closed-form trace term breaks oracle equivalence")
@pytest.mark.parametrize("term", [0, 1, 2])
def test_mutation_sensitivity(term, record_property):
    signs = [1.0, 1.0, 1.0]
    signs[term] = -1.0
    worst = worst_oracle_error(np.random.default_rng(SEED), tuple(signs))
    record_property("note", f"term {term + 1}: max rel err {worst:.2e}")
    assert worst > 1e-8
