"""Kernel functions, Gram matrices, degree vectors and weighted centering."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _accel
from .errors import (
    ConfigError,
    DegenerateKernelError,
    DimensionError,
    NonPositiveDegreeError,
)


class KernelKind(str, Enum):
    RBF = "rbf"
    LINEAR = "linear"
    NORMALIZED_POLY = "npoly"


class Centering(str, Enum):
    PLAIN = "plain"
    DEGREE_WEIGHTED = "degree"


_KIND_CODE = {
    KernelKind.RBF: _accel.RBF,
    KernelKind.LINEAR: _accel.LINEAR,
    KernelKind.NORMALIZED_POLY: _accel.NPOLY,
}

_ALIASES = {
    "rbf": KernelKind.RBF,
    "gaussian": KernelKind.RBF,
    "linear": KernelKind.LINEAR,
    "lin": KernelKind.LINEAR,
    "npoly": KernelKind.NORMALIZED_POLY,
    "poly": KernelKind.NORMALIZED_POLY,
    "normalizedpoly": KernelKind.NORMALIZED_POLY,
    "normalized_poly": KernelKind.NORMALIZED_POLY,
}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel configuration for one view.

    ``sigma2`` is the RBF bandwidth in units of squared input distance:
    ``K(x, y) = exp(-||x - y||^2 / sigma2)``. ``degree`` and ``t`` belong to
    the cosine-normalised polynomial kernel.
    """

    kind: KernelKind = KernelKind.RBF
    sigma2: float = 1.0
    degree: int = 1
    t: float = 0.0

    def __post_init__(self):
        kind = self.kind
        if not isinstance(kind, KernelKind):
            try:
                kind = _ALIASES[str(kind).strip().lower()]
            except KeyError:
                raise ConfigError(f"unknown kernel kind {self.kind!r}") from None
            object.__setattr__(self, "kind", kind)
        if kind is KernelKind.RBF and not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ConfigError(f"RBF sigma2 must be positive, got {self.sigma2}")
        if kind is KernelKind.NORMALIZED_POLY:
            if int(self.degree) != self.degree or self.degree < 1:
                raise ConfigError(f"polynomial degree must be an integer >= 1, got {self.degree}")
            if not (np.isfinite(self.t) and self.t >= 0):
                raise ConfigError(f"polynomial offset t must be >= 0, got {self.t}")
        object.__setattr__(self, "degree", int(self.degree))

    @classmethod
    def rbf(cls, sigma2):
        return cls(KernelKind.RBF, sigma2=float(sigma2))

    @classmethod
    def linear(cls):
        return cls(KernelKind.LINEAR)

    @classmethod
    def npoly(cls, degree, t):
        return cls(KernelKind.NORMALIZED_POLY, degree=int(degree), t=float(t))

    def to_dict(self):
        if self.kind is KernelKind.RBF:
            return {"kind": self.kind.value, "sigma2": self.sigma2}
        if self.kind is KernelKind.LINEAR:
            return {"kind": self.kind.value}
        return {"kind": self.kind.value, "degree": self.degree, "t": self.t}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "kind" not in d:
            raise ConfigError("kernel spec needs a 'kind'")
        unknown = set(d) - {"kind", "sigma2", "degree", "t"}
        if unknown:
            raise ConfigError(f"unknown kernel fields: {sorted(unknown)}")
        return cls(d.pop("kind"), **d)

    @classmethod
    def parse(cls, text):
        """Parse ``"rbf:sigma2=0.05"``, ``"linear"`` or ``"npoly:degree=2,t=1"``."""
        kind, _, rest = text.partition(":")
        fields = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"malformed kernel option {item!r} in {text!r}")
            try:
                fields[key.strip()] = float(value)
            except ValueError:
                raise ConfigError(f"non-numeric kernel option {item!r} in {text!r}") from None
        if "degree" in fields:
            fields["degree"] = int(fields["degree"])
        return cls.from_dict({"kind": kind, **fields})


@dataclass(frozen=True)
class KernelMatrix:
    omega: np.ndarray

    @property
    def n(self):
        return self.omega.shape[0]


@dataclass(frozen=True)
class DegreeMatrix:
    d: np.ndarray


@dataclass(frozen=True)
class CenteringStats:
    """Centering weights ``s`` with the cached row ``s^T Omega`` and scalar ``s^T Omega s``."""

    s: np.ndarray
    k_row: np.ndarray
    k_scalar: float


def _as_rows(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D sample matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def _check_poly_norms(spec, X):
    sq = np.einsum("ij,ij->i", X, X)
    if np.any((sq + spec.t) ** spec.degree == 0):
        raise DegenerateKernelError("normalized polynomial kernel undefined at a zero-norm point with t = 0")


def eval_kernel(spec, x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"kernel arguments differ in dimension: {x.shape[0]} vs {y.shape[0]}")
    return float(gram_cross(spec, x[None, :], y[None, :])[0, 0])


def gram_matrix(spec, X, backend=None):
    """Dense N x N Gram matrix; each unordered pair is evaluated once."""
    X = _as_rows(X)
    if X.shape[0] < 2:
        raise DimensionError("a Gram matrix needs at least 2 samples")
    if spec.kind is KernelKind.NORMALIZED_POLY:
        _check_poly_norms(spec, X)
    return KernelMatrix(_accel.gram(_KIND_CODE[spec.kind], X, *_params(spec), backend=backend))


def gram_cross(spec, Y, X, backend=None):
    """Kernel block ``K(Y_i, X_j)`` between new rows ``Y`` and training rows ``X``."""
    Y = _as_rows(Y, "Y")
    X = _as_rows(X, "X")
    if Y.shape[1] != X.shape[1]:
        raise DimensionError(f"feature dimension mismatch: {Y.shape[1]} vs {X.shape[1]}")
    if spec.kind is KernelKind.NORMALIZED_POLY:
        _check_poly_norms(spec, X)
        _check_poly_norms(spec, Y)
    return _accel.cross_gram(_KIND_CODE[spec.kind], Y, X, *_params(spec), backend=backend)


def _params(spec):
    return spec.sigma2, spec.degree, spec.t


def degree_matrix(K):
    omega = K.omega if isinstance(K, KernelMatrix) else np.asarray(K, dtype=np.float64)
    d = omega.sum(axis=0)
    if np.any(d <= 0):
        bad = int(np.argmin(d))
        raise NonPositiveDegreeError(
            f"degree {d[bad]:.3g} at sample {bad} is not positive; the kernel is unsuitable for random-walk weighting"
        )
    return DegreeMatrix(d)


def as_centering(mode):
    try:
        return Centering(mode)
    except ValueError:
        raise ConfigError(f"unknown centering mode {mode!r} (expected 'plain' or 'degree')") from None


def centering_weights(n, mode=Centering.DEGREE_WEIGHTED, D=None):
    mode = as_centering(mode)
    if mode is Centering.PLAIN:
        return np.full(n, 1.0 / n)
    if D is None:
        raise ConfigError("degree-weighted centering requires the degree matrix")
    inv = 1.0 / D.d
    return inv / inv.sum()


def center_gram(K, mode=Centering.DEGREE_WEIGHTED, D=None):
    """Double-centre ``Omega`` with weights ``s``: ``(I - 1 s^T) Omega (I - s 1^T)``.

    Returns the centred matrix and the statistics needed to centre test
    kernels consistently. The centred matrix is computed through the same
    expression as :func:`center_gram_test`, so feeding the training Gram back
    in reproduces it bit for bit.
    """
    omega = K.omega if isinstance(K, KernelMatrix) else np.asarray(K, dtype=np.float64)
    s = centering_weights(omega.shape[0], mode, D)
    k_row = omega @ s  # equals s^T Omega for symmetric Omega
    stats = CenteringStats(s=s, k_row=k_row, k_scalar=float(s @ k_row))
    return center_gram_test(omega, stats), stats


def center_gram_test(K_test, stats, omega_train=None):
    """Centre an Nte x N test kernel block with the training statistics.

    ``omega_train`` is accepted for interface symmetry; everything needed is
    already cached in ``stats``.
    """
    K_test = np.asarray(K_test, dtype=np.float64)
    if K_test.ndim != 2 or K_test.shape[1] != stats.s.shape[0]:
        raise DimensionError(
            f"test kernel has shape {K_test.shape}, expected (*, {stats.s.shape[0]})"
        )
    if omega_train is not None and np.shape(omega_train) != (stats.s.shape[0],) * 2:
        raise DimensionError("training Gram does not match the centering statistics")
    row_means = K_test @ stats.s
    # Omega_ij - (a_i + b_j) + c keeps the training result exactly symmetric.
    return K_test - (row_means[:, None] + stats.k_row[None, :]) + stats.k_scalar
