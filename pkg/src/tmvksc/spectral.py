"""Fused multi-view eigenproblem: assembly, symmetric solve, stationarity check."""
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import linalg

from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    DimensionError,
    NonPositiveDegreeError,
    ResourceError,
)

TENSOR_GUARD = 10**6


@dataclass(frozen=True)
class FusionConfig:
    """Mixing weights for the fused kernel operator.

    ``rho`` balances the weighted sum of centred view kernels against their
    elementwise product; ``kappa`` weighs the views inside the sum. ``eta``
    only rescales the eigenvalues.
    """

    rho: float = 1.0
    kappa: tuple = None
    eta: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.kappa is not None:
            kappa = tuple(float(k) for k in self.kappa)
            if not kappa or any(not (np.isfinite(k) and k > 0) for k in kappa):
                raise ConfigError(f"kappa weights must be positive, got {self.kappa}")
            object.__setattr__(self, "kappa", kappa)

    def kappa_for(self, n_views):
        if self.kappa is None:
            return (1.0,) * n_views
        if len(self.kappa) != n_views:
            raise ConfigError(f"{len(self.kappa)} kappa weights given for {n_views} views")
        return self.kappa


@dataclass(frozen=True)
class EigenSolution:
    H: np.ndarray
    lambdas: np.ndarray
    dsum: np.ndarray


def fuse_kernels(omega_c_list, cfg):
    """``rho * sum_v kappa_v Omega_v + (1 - rho) * prod_v Omega_v`` (elementwise product)."""
    mats = [np.asarray(m, dtype=np.float64) for m in omega_c_list]
    if not mats:
        raise ConfigError("at least one view is required")
    n = mats[0].shape[0]
    for v, m in enumerate(mats):
        if m.shape != (n, n):
            raise DimensionError(f"view {v} kernel has shape {m.shape}, expected {(n, n)}")
    kappa = cfg.kappa_for(len(mats))
    A = np.zeros((n, n))
    if cfg.rho > 0:
        for k, m in zip(kappa, mats):
            A += k * m
        A *= cfg.rho
    if cfg.rho < 1:
        A += (1.0 - cfg.rho) * reduce(np.multiply, mats)
    return A


def _descending_order(w, tol):
    # eigh returns ascending values; walk from the top and keep index order within near-ties
    idx = list(np.argsort(-w, kind="stable"))
    out = []
    i = 0
    while i < len(idx):
        j = i + 1
        while j < len(idx) and abs(w[idx[i]] - w[idx[j]]) <= tol:
            j += 1
        out.extend(sorted(idx[i:j]))
        i = j
    return np.array(out, dtype=np.intp)


def solve_latent(A, dsum, q):
    """Top-``q`` eigenpairs of ``diag(dsum)^-1 A`` via the symmetric reduction.

    The hidden features satisfy ``h^T diag(dsum) h = 1`` and the largest
    magnitude entry of every ``h`` is positive.
    """
    A = np.asarray(A, dtype=np.float64)
    dsum = np.asarray(dsum, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or dsum.shape != (n,):
        raise DimensionError(f"operator {A.shape} and degree vector {dsum.shape} disagree")
    q = int(q)
    if q < 1 or q > n:
        raise ConfigError(f"number of components q={q} must lie in [1, {n}]")
    if np.any(dsum <= 0):
        raise NonPositiveDegreeError("summed degree vector must be strictly positive")
    if not np.any(A):
        raise DegenerateSpectrumError("fused kernel matrix is identically zero (constant kernels?)")

    w = 1.0 / np.sqrt(dsum)
    S = A * np.outer(w, w)
    vals, vecs = linalg.eigh(S, subset_by_index=[n - q, n - 1])
    lam_top = np.max(np.abs(vals))
    order = _descending_order(vals, 1e-12 * lam_top)
    lambdas = vals[order]
    H = w[:, None] * vecs[:, order]
    pivot = np.argmax(np.abs(H), axis=0)
    H *= np.where(H[pivot, np.arange(q)] < 0, -1.0, 1.0)
    return EigenSolution(H=H, lambdas=lambdas, dsum=dsum)


def residuals(A, sol):
    """Per-component ``||A h - lambda diag(dsum) h||_2``."""
    R = A @ sol.H - (sol.dsum[:, None] * sol.H) * sol.lambdas[None, :]
    return np.linalg.norm(R, axis=0)


def objective_value(sol, omega_c_list, dsum_per_view, cfg):
    """Dual-substituted objective; zero at every stationary point.

    ``sol.lambdas`` must be the eigenvalues of the eta-scaled problem, i.e.
    the values a fitted model stores.
    """
    A = fuse_kernels(omega_c_list, cfg)
    dsum = np.sum([np.asarray(d, dtype=np.float64) for d in dsum_per_view], axis=0)
    H = np.asarray(sol.H)
    if H.shape[0] != A.shape[0] or dsum.shape != (A.shape[0],):
        raise DimensionError("hidden features, kernels and degrees disagree in N")
    quad_a = np.einsum("il,il->l", H, A @ H)
    quad_d = np.einsum("il,il->l", H, dsum[:, None] * H)
    return float(-quad_a.sum() / (2.0 * cfg.eta) + 0.5 * np.dot(sol.lambdas, quad_d))


def tensor_gram(feature_maps):
    """Gram matrix of the rank-1 outer-product tensors, built explicitly."""
    n = feature_maps[0].shape[0]
    size = int(np.prod([f.shape[1] for f in feature_maps], dtype=np.int64))
    if size > TENSOR_GUARD:
        raise ResourceError(f"materialised tensor would hold {size} entries per sample (limit {TENSOR_GUARD})")
    T = np.empty((n, size))
    for i in range(n):
        T[i] = reduce(np.multiply.outer, [f[i] for f in feature_maps]).ravel()
    return T @ T.T


def hadamard_equals_tensor_oracle(feature_maps, centering="plain", tol=1e-12):
    """Check that the elementwise product of centred linear kernels equals the
    inner products of explicitly materialised outer-product feature tensors.

    Test oracle only; feature maps are centred with the same weights the
    kernel path uses.
    """
    from .kernels import KernelSpec, center_gram, centering_weights, degree_matrix, gram_matrix

    maps = [np.asarray(f, dtype=np.float64) for f in feature_maps]
    n = maps[0].shape[0]
    if any(f.ndim != 2 or f.shape[0] != n for f in maps):
        raise DimensionError("feature maps must share the sample count")
    size = int(np.prod([f.shape[1] for f in maps], dtype=np.int64))
    if size > TENSOR_GUARD:
        raise ResourceError(f"materialised tensor would hold {size} entries per sample (limit {TENSOR_GUARD})")

    spec = KernelSpec.linear()
    centred_kernels = []
    centred_maps = []
    for f in maps:
        K = gram_matrix(spec, f)
        D = degree_matrix(K) if centering == "degree" else None
        omega_c, _ = center_gram(K, centering, D)
        centred_kernels.append(omega_c)
        s = centering_weights(n, centering, D)
        centred_maps.append(f - s @ f)
    lhs = tensor_gram(centred_maps)
    rhs = fuse_kernels(centred_kernels, FusionConfig(rho=0.0))
    return bool(np.all(np.abs(lhs - rhs) <= tol * np.maximum(1.0, np.abs(lhs))))
