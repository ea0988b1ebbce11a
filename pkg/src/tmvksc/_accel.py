"""Hot numeric kernels: pairwise kernel evaluation and Hamming decoding.

Each kernel exists twice, a numba ``@njit`` loop and a vectorised numpy
twin. The numba path is used when numba imports and the environment
variable ``TMVKSC_DISABLE_NUMBA`` is unset (or ``0``). Both paths evaluate
every kernel entry with the same sequence of floating point operations, so
within one backend ``gram(X)`` and ``cross_gram(X, X)`` are bit-identical
and exactly symmetric.
"""
import math
import os

import numpy as np

RBF, LINEAR, NPOLY = 0, 1, 2

_BLOCK = 256  # rows per numpy block, bounds the N x B x d temporaries


def _env_disabled():
    return os.environ.get("TMVKSC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


try:
    if _env_disabled():
        raise ImportError("numba disabled by TMVKSC_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def default_backend():
    return "numba" if HAVE_NUMBA else "numpy"


def _resolve(backend):
    backend = backend or default_backend()
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def _entry_nb(kind, x, y, sigma2, degree, t):
    acc = 0.0
    if kind == 0:
        for k in range(x.shape[0]):
            diff = x[k] - y[k]
            acc += diff * diff
        return math.exp(-acc / sigma2)
    for k in range(x.shape[0]):
        acc += x[k] * y[k]
    if kind == 1:
        return acc
    xx = 0.0
    yy = 0.0
    for k in range(x.shape[0]):
        xx += x[k] * x[k]
        yy += y[k] * y[k]
    num = (acc + t) ** degree
    px = (xx + t) ** degree
    py = (yy + t) ** degree
    return num / math.sqrt(px * py)


@njit(cache=True)
def _gram_nb(kind, X, sigma2, degree, t):
    n = X.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = _entry_nb(kind, X[i], X[j], sigma2, degree, t)
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True)
def _cross_nb(kind, Y, X, sigma2, degree, t):
    m = Y.shape[0]
    n = X.shape[0]
    out = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            out[i, j] = _entry_nb(kind, Y[i], X[j], sigma2, degree, t)
    return out


@njit(cache=True)
def _hamming_nb(signs, codewords):
    m, q = signs.shape
    k = codewords.shape[0]
    labels = np.empty(m, dtype=np.int64)
    dist = np.empty(m, dtype=np.int64)
    for i in range(m):
        best = q + 1
        arg = 0
        for p in range(k):
            h = 0
            for l in range(q):
                if signs[i, l] != codewords[p, l]:
                    h += 1
            if h < best:
                best = h
                arg = p
        labels[i] = arg
        dist[i] = best
    return labels, dist


# ---------------------------------------------------------------- numpy path


def _cross_np(kind, Y, X, sigma2, degree, t):
    m, d = Y.shape
    out = np.empty((m, X.shape[0]))
    if kind == NPOLY:
        xx = np.zeros(X.shape[0])
        yy = np.zeros(m)
        for k in range(d):
            xx += X[:, k] * X[:, k]
            yy += Y[:, k] * Y[:, k]
        px = (xx + t) ** degree
        py = (yy + t) ** degree
    for start in range(0, m, _BLOCK):
        stop = min(start + _BLOCK, m)
        acc = np.zeros((stop - start, X.shape[0]))
        if kind == RBF:
            for k in range(d):
                diff = Y[start:stop, k, None] - X[None, :, k]
                acc += diff * diff
            np.exp(-acc / sigma2, out=out[start:stop])
            continue
        for k in range(d):
            acc += Y[start:stop, k, None] * X[None, :, k]
        if kind == LINEAR:
            out[start:stop] = acc
        else:
            num = (acc + t) ** degree
            out[start:stop] = num / np.sqrt(py[start:stop, None] * px[None, :])
    return out


def _hamming_np(signs, codewords):
    dist = (signs[:, None, :] != codewords[None, :, :]).sum(axis=2)
    labels = np.argmin(dist, axis=1)  # first minimum, i.e. lowest codeword index
    return labels.astype(np.int64), dist[np.arange(len(labels)), labels].astype(np.int64)


# ------------------------------------------------------------------ dispatch


def gram(kind, X, sigma2=1.0, degree=1, t=0.0, backend=None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if _resolve(backend) == "numba":
        return _gram_nb(kind, X, float(sigma2), int(degree), float(t))
    return _cross_np(kind, X, X, float(sigma2), int(degree), float(t))


def cross_gram(kind, Y, X, sigma2=1.0, degree=1, t=0.0, backend=None):
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if _resolve(backend) == "numba":
        return _cross_nb(kind, Y, X, float(sigma2), int(degree), float(t))
    return _cross_np(kind, Y, X, float(sigma2), int(degree), float(t))


def hamming_decode(signs, codewords, backend=None):
    signs = np.ascontiguousarray(signs, dtype=np.int8)
    codewords = np.ascontiguousarray(codewords, dtype=np.int8)
    if _resolve(backend) == "numba":
        return _hamming_nb(signs, codewords)
    return _hamming_np(signs, codewords)
