import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import ortho_group

from wscec.embedding import embed
from wscec.errors import ParameterError
from wscec.features import curvature_sequence
from wscec.ingest import Heartbeat, normalize_beat
from wscec.local_stats import knn, knn_indices, lift, local_gaussian
from wscec.synthetic import standard_beat


def brute_knn(P, k):
    out = []
    for i in range(len(P)):
        d = [(float(np.sum((P[i] - P[j]) ** 2)), j) for j in range(len(P))]
        out.append([j for _, j in sorted(d)[:k]])
    return np.array(out)


def scatter_oracle(members):
    mu = sum(members) / len(members)
    S = sum(np.outer(m - mu, m - mu) for m in members)
    return mu, S


# --- kNN --------------------------------------------------------------------


def test_collinear_self_inclusive():
    P = np.array([[0.0], [1.0], [2.0], [3.0]])
    assert sorted(knn_indices(P, 2)[0]) == [0, 1]
    assert list(knn_indices(P, 2)[0]) == [0, 1]


def test_ties_go_to_lower_index():
    P = np.array([[0.0], [-1.0], [1.0]])
    assert list(knn_indices(P, 2)[0]) == [0, 1]


def test_full_neighbourhood():
    P = np.random.default_rng(0).normal(size=(6, 2))
    for row in knn_indices(P, 6):
        assert sorted(row) == list(range(6))


@given(st.integers(0, 2**16), st.integers(2, 50))
def test_knn_matches_brute_force(seed, k):
    P = np.random.default_rng(seed).normal(size=(50, 3))
    np.testing.assert_array_equal(knn_indices(P, k), brute_knn(P, k))


@pytest.mark.parametrize("k", [1, 6])
def test_knn_bad_k(k):
    with pytest.raises(ParameterError):
        knn_indices(np.zeros((5, 2)), k)


def test_neighbourhood_objects():
    P = np.random.default_rng(1).normal(size=(10, 2))
    nb = knn(P, 3)
    assert len(nb) == 10
    assert all(n.center_index in n.member_indices and len(n.member_indices) == 3 for n in nb)


# --- local Gaussian ---------------------------------------------------------


def test_identical_members():
    g = local_gaussian(np.tile([1.0, 2.0], (4, 1)))
    np.testing.assert_array_equal(g.mean, [1.0, 2.0])
    np.testing.assert_array_equal(g.cov, 1e-10 * np.eye(2))


def test_worked_scatter():
    g = local_gaussian(np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]))
    np.testing.assert_allclose(g.mean, [1.0, 1.0])
    delta = 1e-10 * 8.0
    np.testing.assert_allclose(g.cov, [[2.0 + delta, 0.0], [0.0, 6.0 + delta]], rtol=1e-15)


def test_mean_normalization_divides_by_k():
    M = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]])
    a = local_gaussian(M, "sum").cov
    b = local_gaussian(M, "mean").cov
    np.testing.assert_allclose(b, (a - 8e-10 * np.eye(2)) / 3 + 1e-10 * (8 / 3) * np.eye(2), rtol=1e-12)


@given(st.integers(0, 2**16), st.floats(0.1, 10))
def test_scatter_scales_quadratically(seed, c):
    M = np.random.default_rng(seed).normal(size=(7, 3))
    a, b = local_gaussian(M).cov, local_gaussian(c * M).cov
    np.testing.assert_allclose(b, c**2 * a, rtol=1e-8)


# --- lift -------------------------------------------------------------------


def test_lift_cardinality_on_beat():
    spd = lift(embed(standard_beat()), k=20)
    assert len(spd) == 289 and spd.covs.shape == (289, 3, 3)


def test_constant_beat_gives_delta_identity():
    spd = lift(embed(Heartbeat(np.full(300, 2.0))), k=20)
    np.testing.assert_array_equal(spd.covs, np.broadcast_to(1e-10 * np.eye(3), (289, 3, 3)))


@given(st.integers(0, 2**16))
def test_lift_matches_per_neighbourhood_oracle(seed):
    P = np.random.default_rng(seed).normal(size=(30, 3))
    spd = lift(P, k=5)
    for i, idx in enumerate(brute_knn(P, 5)):
        mu, S = scatter_oracle(P[idx])
        np.testing.assert_allclose(spd.means[i], mu, atol=1e-14)
        np.testing.assert_allclose(spd.covs[i], S + spd.deltas[i] * np.eye(3), rtol=1e-12, atol=1e-14)


@given(st.integers(0, 2**16))
def test_symmetric_and_regularized(seed):
    P = np.random.default_rng(seed).normal(size=(40, 3))
    spd = lift(P, k=6)
    np.testing.assert_array_equal(spd.covs, np.swapaxes(spd.covs, 1, 2))
    assert np.all(np.linalg.eigvalsh(spd.covs).min(axis=1) >= spd.deltas * (1 - 1e-6))


@given(st.integers(0, 2**16))
def test_translation_invariance(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(40, 3))
    t = rng.normal(size=3) * 5
    a, b = lift(P, k=8), lift(P + t, k=8)
    np.testing.assert_allclose(b.covs, a.covs, atol=1e-10)
    np.testing.assert_allclose(b.means, a.means + t, atol=1e-12)


@given(st.integers(0, 2**16))
def test_rotation_equivariance(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(40, 3))
    Q = ortho_group.rvs(3, random_state=seed)
    a, b = lift(P, k=8), lift(P @ Q, k=8)
    np.testing.assert_allclose(b.covs, Q.T @ a.covs @ Q, atol=1e-10)


def test_regularization_barely_moves_curvatures():
    beat = normalize_beat(standard_beat())
    P = embed(beat).points
    spd = lift(P, k=20)
    raw = spd.covs - spd.deltas[:, None, None] * np.eye(3)
    assert np.all(np.linalg.eigvalsh(raw).min(axis=1) > 0)
    W = curvature_sequence(spd)
    W_raw = curvature_sequence(type(spd)(spd.means, raw, spd.k, 0 * spd.deltas))
    assert np.max(np.abs(W - W_raw) / W_raw) < 1e-6
