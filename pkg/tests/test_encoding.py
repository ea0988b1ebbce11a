import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tmvksc.encoding import Codebook, assign, build_codebook, scores, sign_encode
from tmvksc.errors import ConfigError, DimensionError, InsufficientCodewordsError
from tmvksc.metrics import ari


def test_scores_examples():
    h = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    block = scores([np.eye(3)], h[:, None])
    np.testing.assert_array_equal(block.e[0][:, 0], h)

    oc = np.array([[0.5, -0.5], [-0.5, 0.5]])
    block = scores([oc], np.array([[1.0], [-1.0]]))
    np.testing.assert_array_equal(block.e[0][:, 0], [1.0, -1.0])

    M = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]])
    H = np.array([[0.3, 1.0], [-0.2, 0.5], [0.1, -1.0]])
    block = scores([M, M], H, [0.5, 0.5])
    np.testing.assert_array_equal(block.e_mean, block.e[0])
    np.testing.assert_array_equal(block.e_mean, 0.5 * block.e[0] + 0.5 * block.e[1])


def test_scores_errors():
    with pytest.raises(DimensionError):
        scores([np.eye(3)], np.ones((2, 1)))
    with pytest.raises(ConfigError):
        scores([np.eye(2)], np.ones((2, 1)), beta=[0.5, 0.5])
    with pytest.raises(ConfigError):
        scores([np.eye(2), np.eye(2)], np.ones((2, 1)), beta=[-1.0, 2.0])


def test_sign_encode_examples():
    np.testing.assert_array_equal(sign_encode(np.array([[0.3, -0.2]])), [[1, -1]])
    np.testing.assert_array_equal(sign_encode(np.array([[0.0, -5.0]])), [[1, -1]])
    np.testing.assert_array_equal(sign_encode(-np.ones((3, 2))), -np.ones((3, 2)))


def test_codebook_examples():
    cb = build_codebook(np.array([[1], [1], [-1], [1], [-1]]), 2)
    np.testing.assert_array_equal(cb.codewords, [[1], [-1]])
    np.testing.assert_array_equal(cb.counts, [3, 2])
    with pytest.raises(InsufficientCodewordsError):
        build_codebook(np.ones((5, 1)), 2)
    with pytest.raises(ConfigError):
        build_codebook(np.ones((5, 1)), 1)


def test_codebook_top_three_of_ten_rows():
    table = [(1, -1)] * 4 + [(-1, -1)] * 3 + [(1, 1)] * 2 + [(-1, 1)] * 1
    signs = np.array(table)[np.random.default_rng(0).permutation(10)]
    cb = build_codebook(signs, 3)
    np.testing.assert_array_equal(cb.codewords, [[1, -1], [-1, -1], [1, 1]])
    np.testing.assert_array_equal(cb.counts, [4, 3, 2])


def test_codebook_tie_order():
    # equal counts: +1 sorts before -1, first column most significant
    signs = np.array([[-1, 1], [1, -1], [-1, -1], [1, 1]] * 2)
    cb = build_codebook(signs, 4)
    np.testing.assert_array_equal(cb.codewords, [[1, 1], [1, -1], [-1, 1], [-1, -1]])


def test_assign_examples(backend):
    cb = Codebook(np.array([[1, 1, 1], [-1, -1, -1]], dtype=np.int8), np.array([5, 4]))
    out = assign(np.array([[1, 1, -1]]), cb, backend=backend)
    assert out.labels.tolist() == [0] and out.hamming.tolist() == [1]
    out = assign(np.array([[-1, -1, -1]]), cb, backend=backend)
    assert out.labels.tolist() == [1] and out.hamming.tolist() == [0]
    cb2 = Codebook(np.array([[1, 1], [-1, -1]], dtype=np.int8), np.array([3, 3]))
    out = assign(np.array([[1, -1], [-1, 1]]), cb2, backend=backend)
    assert out.labels.tolist() == [0, 0] and out.hamming.tolist() == [1, 1]


def test_assign_shape_check():
    cb = Codebook(np.array([[1], [-1]], dtype=np.int8), np.array([1, 1]))
    with pytest.raises(DimensionError):
        assign(np.ones((3, 2)), cb)


score_matrices = arrays(np.float64, st.tuples(st.integers(6, 30), st.integers(1, 3)),
                        elements=st.floats(-10, 10, allow_subnormal=False))


@settings(max_examples=50, deadline=None)
@given(e=score_matrices, c=st.floats(1e-3, 1e3))
def test_positive_scaling_keeps_signs(e, c):
    np.testing.assert_array_equal(sign_encode(c * e), sign_encode(e))


@settings(max_examples=50, deadline=None)
@given(e=score_matrices, col=st.integers(0, 2))
def test_flip_covariance(e, col):
    col %= e.shape[1]
    e = np.where(e == 0, 1.0, e)  # sign(0) = +1 is not flip-symmetric
    k = e.shape[1] + 1
    signs = sign_encode(e)
    try:
        cb = build_codebook(signs, k)
    except InsufficientCodewordsError:
        return
    flipped = e.copy()
    flipped[:, col] *= -1
    fsigns = sign_encode(flipped)
    fcb = build_codebook(fsigns, k)
    a = assign(signs, cb)
    b = assign(fsigns, fcb)
    assert np.all((a.labels >= 0) & (a.labels < k))
    # partitions agree unless the flip reorders tied counts among the codewords
    if len(set(cb.counts.tolist())) == k and np.all(np.bincount(a.labels, minlength=k) > 0):
        assert ari(a.labels, b.labels) == pytest.approx(1.0)
