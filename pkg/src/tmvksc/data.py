"""Multi-view datasets: synthetic generators, CSV I/O and model persistence.

Synthetic data are drawn with numpy's PCG64 bit generator
(``np.random.Generator(np.random.PCG64(seed))``) in a fixed order:

1. ``n`` uniforms in [0, 1); sample ``i`` belongs to cluster 0 iff
   ``u_i < prior_0``.
2. for every view in order, an ``n x 2`` block of standard normals ``z``;
   the sample is ``mean[c] + L[c] @ z_i`` with ``L[c]`` the lower Cholesky
   factor of the cluster covariance.

Golden SHA-256 checksums of the generated arrays are kept in
``tests/golden/synth_checksums.json``.
"""
import csv
import hashlib
import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    CorruptModelError,
    DimensionError,
    FormatVersionError,
    InternalError,
    ParseError,
)


@dataclass
class ViewDataset:
    views: list
    labels: np.ndarray = None
    view_names: list = field(default=None)

    def __post_init__(self):
        views = []
        for v, X in enumerate(self.views):
            X = np.asarray(X, dtype=np.float64)
            if X.ndim == 1:
                X = X[:, None]
            if X.ndim != 2:
                raise DimensionError(f"view {v} must be a 2-D matrix, got shape {X.shape}")
            views.append(X)
        if not views:
            raise ConfigError("a dataset needs at least one view")
        n = views[0].shape[0]
        for v, X in enumerate(views):
            if X.shape[0] != n:
                raise DimensionError(f"view {v} has {X.shape[0]} samples, view 0 has {n}")
        self.views = views
        if self.labels is not None:
            self.labels = np.asarray(self.labels).astype(np.int64).ravel()
            if self.labels.shape[0] != n:
                raise DimensionError(f"{self.labels.shape[0]} labels for {n} samples")
        if self.view_names is None:
            self.view_names = [f"view{v + 1}" for v in range(len(views))]
        elif len(self.view_names) != len(views):
            raise ConfigError("one name per view is required")

    @property
    def n(self):
        return self.views[0].shape[0]

    @property
    def n_views(self):
        return len(self.views)

    @property
    def dims(self):
        return [X.shape[1] for X in self.views]

    def subset(self, idx):
        idx = np.asarray(idx)
        return ViewDataset(
            [X[idx] for X in self.views],
            None if self.labels is None else self.labels[idx],
            list(self.view_names),
        )

    def reorder_views(self, order):
        return ViewDataset([self.views[i] for i in order], self.labels, [self.view_names[i] for i in order])


# ------------------------------------------------------------------ synthetic


class Synth(str, Enum):
    SYNTH1 = "synth1"
    SYNTH2 = "synth2"


# view -> (means per cluster, covariances per cluster)
_SYNTH = {
    Synth.SYNTH1: {
        "priors": (0.5, 0.5),
        "views": [
            (([1, 1], [3, 4]), ([[1, 0.5], [0.5, 1.5]], [[0.3, 0.2], [0.2, 0.6]])),
            (([1, 2], [2, 2]), ([[1, -0.2], [-0.2, 1]], [[0.6, 0.1], [0.1, 0.5]])),
            (([1, 1], [3, 3]), ([[1.2, 0.2], [0.2, 1]], [[1, 0.4], [0.4, 0.7]])),
        ],
    },
    Synth.SYNTH2: {
        "priors": (0.8, 0.2),
        "views": [
            (([1, 1], [2, 2]), ([[0.1, 0], [0, 0.3]], [[1.5, 0.4], [0.4, 1.2]])),
            (([2, 2], [1, 1]), ([[0.3, 0], [0, 0.6]], [[1, 0.5], [0.5, 0.9]])),
        ],
    },
}


@dataclass(frozen=True)
class SynthSpec:
    which: Synth = Synth.SYNTH1
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "which", Synth(str(getattr(self.which, "value", self.which)).lower()))
        except ValueError:
            raise ConfigError(f"unknown synthetic dataset {self.which!r}") from None
        if int(self.n) < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")


def generate_synth(spec):
    cfg = _SYNTH[spec.which]
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    n = int(spec.n)
    labels = (rng.random(n) >= cfg["priors"][0]).astype(np.int64)
    views = []
    for means, covs in cfg["views"]:
        means = np.asarray(means, dtype=np.float64)
        try:
            chol = np.stack([np.linalg.cholesky(np.asarray(c, dtype=np.float64)) for c in covs])
        except np.linalg.LinAlgError as exc:
            raise InternalError(f"non-PSD covariance in generator table: {exc}") from exc
        z = rng.standard_normal((n, 2))
        views.append(means[labels] + np.einsum("nij,nj->ni", chol[labels], z))
    return ViewDataset(views, labels)


def dataset_checksum(data):
    h = hashlib.sha256()
    if data.labels is not None:
        h.update(data.labels.astype("<i8").tobytes())
    for X in data.views:
        h.update(np.ascontiguousarray(X, dtype="<f8").tobytes())
    return h.hexdigest()


# ------------------------------------------------------------------------ CSV


def _read_rows(path, header):
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(path, None, f"cannot open: {exc.strerror}") from exc
    rows = []
    width = None
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise ParseError(path, lineno, f"non-numeric cell {bad!r}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(path, lineno, f"expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise ParseError(path, None, "no data rows")
    return np.array(rows, dtype=np.float64)


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv_views(paths, label_path=None, header=False):
    views = [_read_rows(p, header) for p in paths]
    n = views[0].shape[0]
    for p, X in zip(paths, views):
        if X.shape[0] != n:
            raise ParseError(p, None, f"has {X.shape[0]} rows, {paths[0]} has {n}")
    labels = None
    if label_path is not None:
        raw = _read_rows(label_path, header)
        if raw.shape[1] != 1 or np.any(raw != np.round(raw)):
            raise ParseError(label_path, None, "labels must be a single column of integers")
        labels = raw[:, 0].astype(np.int64)
        if labels.shape[0] != n:
            raise ParseError(label_path, None, f"has {labels.shape[0]} labels for {n} samples")
    names = [Path(p).stem for p in paths]
    if len(set(names)) != len(names):
        names = None
    return ViewDataset(views, labels, names)


def write_matrix_csv(path, X, header=None):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    fmt = "%d" if np.issubdtype(X.dtype, np.integer) else "%.17g"
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in X:
            fh.write(",".join(fmt % x for x in row) + "\n")


def write_csv_views(data, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, X in zip(data.view_names, data.views):
        p = out_dir / f"{name}.csv"
        write_matrix_csv(p, X)
        paths.append(p)
    label_path = None
    if data.labels is not None:
        label_path = out_dir / "labels.csv"
        write_matrix_csv(label_path, data.labels)
    return paths, label_path


# ---------------------------------------------------------------- persistence

MAGIC = b"TMVKSCM\n"
FORMAT_VERSION = 1
_HEAD = struct.Struct("<8sQ")


def save_model(model, path):
    """Write ``model`` as: magic, u64 header length, JSON header, float64 blob.

    Arrays are little-endian IEEE-754 float64 in row-major order; their
    names, shapes and byte offsets are listed in the header.
    """
    meta, arrays = model.to_state()
    entries = []
    offset = 0
    blobs = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": arr.nbytes})
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    meta = {"format": "tmvksc-model", "version": FORMAT_VERSION, **meta, "arrays": entries}
    header = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, len(header)))
        fh.write(header)
        for b in blobs:
            fh.write(b)


def load_model(path):
    from .model import TmvkscrModel

    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise CorruptModelError(f"{path}: file too short for a model header")
    magic, hlen = _HEAD.unpack_from(raw)
    if magic != MAGIC:
        raise CorruptModelError(f"{path}: not a model archive")
    if _HEAD.size + hlen > len(raw):
        raise CorruptModelError(f"{path}: truncated header")
    try:
        meta = json.loads(raw[_HEAD.size:_HEAD.size + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModelError(f"{path}: unreadable header ({exc})") from exc
    if meta.get("format") != "tmvksc-model":
        raise CorruptModelError(f"{path}: unknown format tag {meta.get('format')!r}")
    if meta.get("version") != FORMAT_VERSION:
        raise FormatVersionError(f"{path}: format version {meta.get('version')}, this build reads {FORMAT_VERSION}")
    blob = raw[_HEAD.size + hlen:]
    expected = sum(e["nbytes"] for e in meta["arrays"])
    if len(blob) != expected:
        raise CorruptModelError(f"{path}: array section holds {len(blob)} bytes, header declares {expected}")
    arrays = {}
    for e in meta["arrays"]:
        shape = tuple(e["shape"])
        if int(np.prod(shape, dtype=np.int64)) * 8 != e["nbytes"]:
            raise CorruptModelError(f"{path}: array {e['name']} shape {shape} disagrees with its size")
        chunk = blob[e["offset"]:e["offset"] + e["nbytes"]]
        arrays[e["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).astype(np.float64)
    return TmvkscrModel.from_state(meta, arrays)
