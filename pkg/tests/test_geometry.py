"""Cosine geometry against hand values and scalar-loop oracles."""

import math

import numpy as np
import pytest

from cpe.errors import DataError
from cpe.geometry import (
    cosine_similarity,
    entropy,
    l2_normalize,
    logsumexp,
    pairwise_similarity,
    softmax,
)

from _oracles import cosine_direct, entropy_direct, softmax_direct


class TestNormalize:
    def test_three_four_five(self):
        np.testing.assert_allclose(l2_normalize([3.0, 4.0]), [0.6, 0.8])

    def test_idempotent_on_unit(self):
        v = l2_normalize([0.2, -0.3, 0.9])
        np.testing.assert_allclose(l2_normalize(v), v, atol=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(DataError, match="degenerate embedding"):
            l2_normalize([0.0, 0.0])


class TestCosine:
    def test_self_similarity(self):
        v = l2_normalize([1.0, 2.0, 3.0])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == pytest.approx(0.0, abs=1e-12)

    def test_45_degree_value(self):
        v = [1.0 / math.sqrt(2)] * 2
        assert cosine_similarity([1.0, 0.0], v) == pytest.approx(0.70710678, abs=1e-8)

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            u = rng.normal(size=5)
            v = rng.normal(size=5)
            a, b = rng.uniform(0.1, 10.0, size=2)
            assert cosine_similarity(a * u, b * v) == pytest.approx(
                cosine_similarity(u, v), abs=1e-9
            )

    def test_zero_operand_rejected(self):
        with pytest.raises(DataError):
            cosine_similarity([0, 0], [1, 0])


class TestPairwise:
    def test_orthonormal_identity(self):
        e = np.eye(2)
        np.testing.assert_allclose(pairwise_similarity(e, e), np.eye(2), atol=1e-12)

    def test_singleton_reduces_to_scalar(self):
        u = np.array([[1.0, 2.0]])
        v = np.array([[2.0, -1.0]])
        m = pairwise_similarity(u, v)
        assert m.shape == (1, 1)
        assert m[0, 0] == pytest.approx(cosine_similarity(u[0], v[0]), abs=1e-12)

    def test_matches_per_entry_oracle(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(3, 6))
        b = rng.normal(size=(2, 6))
        m = pairwise_similarity(a, b)
        for i in range(3):
            for j in range(2):
                assert m[i, j] == pytest.approx(cosine_direct(a[i], b[j]), abs=1e-12)

    def test_self_similarity_structure(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(5, 4))
        m = pairwise_similarity(a, a)
        np.testing.assert_allclose(np.diag(m), 1.0, atol=1e-6)
        np.testing.assert_allclose(m, m.T, atol=1e-9)
        assert np.all(m >= -1.0) and np.all(m <= 1.0)

    def test_dim_mismatch(self):
        with pytest.raises(DataError, match="dimension mismatch"):
            pairwise_similarity(np.ones((2, 3)), np.ones((2, 4)))


class TestSoftmaxEntropy:
    def test_softmax_matches_oracle(self):
        xs = [1.0, 0.0, -2.0, 3.5]
        np.testing.assert_allclose(softmax(np.array(xs)), softmax_direct(xs), atol=1e-12)

    def test_softmax_large_logits_stable(self):
        p = softmax(np.array([1000.0, 0.0]))
        np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-12)

    def test_entropy_matches_oracle(self):
        p = np.array([0.5, 0.25, 0.25])
        assert entropy(p) == pytest.approx(entropy_direct(p), abs=1e-12)

    def test_entropy_zero_terms(self):
        assert entropy(np.array([1.0, 0.0, 0.0])) == 0.0

    def test_logsumexp_all_neginf(self):
        out = logsumexp(np.array([[-np.inf, -np.inf]]), axis=1)
        assert out[0] == -np.inf

    def test_logsumexp_matches_naive(self):
        x = np.array([[0.1, -0.5, 2.0]])
        naive = math.log(sum(math.exp(v) for v in x[0]))
        assert logsumexp(x, axis=1)[0] == pytest.approx(naive, abs=1e-12)
