"""Score variables, sign encodings, codebooks and Hamming (ECOC) decoding."""
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import ConfigError, DimensionError, InsufficientCodewordsError


@dataclass(frozen=True)
class ScoreBlock:
    e: list
    e_mean: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class Codebook:
    """``k`` distinct sign patterns, most frequent first.

    Equal counts are ordered lexicographically with ``+1`` before ``-1``.
    """

    codewords: np.ndarray  # k x (k-1), int8 in {-1, +1}
    counts: np.ndarray

    @property
    def k(self):
        return self.codewords.shape[0]


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    hamming: np.ndarray
    scores: np.ndarray = None


def normalize_beta(beta, n_views):
    if beta is None:
        return np.full(n_views, 1.0 / n_views)
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.shape != (n_views,):
        raise ConfigError(f"{beta.shape[0]} beta weights given for {n_views} views")
    if np.any(beta < 0) or not np.all(np.isfinite(beta)) or beta.sum() <= 0:
        raise ConfigError(f"beta weights must be nonnegative with a positive sum, got {beta.tolist()}")
    return beta / beta.sum()


def scores(omega_c_list, H, beta=None):
    H = np.asarray(H, dtype=np.float64)
    if H.ndim == 1:
        H = H[:, None]
    beta = normalize_beta(beta, len(omega_c_list))
    e = []
    for v, omega in enumerate(omega_c_list):
        omega = np.asarray(omega, dtype=np.float64)
        if omega.ndim != 2 or omega.shape[1] != H.shape[0]:
            raise DimensionError(f"view {v}: kernel block {omega.shape} cannot multiply H {H.shape}")
        e.append(omega @ H)
    e_mean = beta[0] * e[0]
    for b, ev in zip(beta[1:], e[1:]):
        e_mean = e_mean + b * ev
    return ScoreBlock(e=e, e_mean=e_mean, beta=beta)


def sign_encode(e):
    """Entrywise sign with ``sign(0) = +1``."""
    e = np.asarray(e)
    if e.ndim == 1:
        e = e[:, None]
    return np.where(e < 0, -1, 1).astype(np.int8)


def build_codebook(signs, k):
    signs = np.asarray(signs, dtype=np.int8)
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if signs.ndim != 2 or signs.shape[0] < k:
        raise InsufficientCodewordsError(f"need at least k={k} encoded samples, got {signs.shape[0]}")
    patterns, counts = np.unique(signs, axis=0, return_counts=True)
    if patterns.shape[0] < k:
        raise InsufficientCodewordsError(
            f"only {patterns.shape[0]} distinct sign patterns for k={k} clusters; scores are degenerate"
        )
    # lexsort: last key is primary. Bits map +1 -> 0, -1 -> 1 so +1 sorts first.
    bits = (patterns < 0).astype(np.int8)
    keys = [bits[:, j] for j in range(bits.shape[1] - 1, -1, -1)] + [-counts]
    order = np.lexsort(keys)[:k]
    return Codebook(codewords=patterns[order].copy(), counts=counts[order].copy())


def assign(signs, codebook, backend=None):
    """Nearest codeword by Hamming distance; ties go to the lower codeword index."""
    signs = np.asarray(signs, dtype=np.int8)
    if signs.ndim != 2 or signs.shape[1] != codebook.codewords.shape[1]:
        raise DimensionError(
            f"sign matrix {signs.shape} does not match codeword length {codebook.codewords.shape[1]}"
        )
    labels, dist = _accel.hamming_decode(signs, codebook.codewords, backend=backend)
    return ClusterAssignment(labels=labels, hamming=dist)
