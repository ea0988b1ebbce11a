"""Training and out-of-sample inference for the fused multi-view model."""
from dataclasses import dataclass, field

import numpy as np

from .data import ViewDataset
from .encoding import (
    ClusterAssignment,
    Codebook,
    assign,
    build_codebook,
    normalize_beta,
    scores,
    sign_encode,
)
from .errors import ConfigError, DimensionError
from .kernels import (
    CenteringStats,
    DegreeMatrix,
    KernelSpec,
    as_centering,
    center_gram,
    center_gram_test,
    degree_matrix,
    gram_cross,
    gram_matrix,
)
from .spectral import FusionConfig, fuse_kernels, objective_value, residuals, solve_latent

ENSEMBLE = "ensemble"
PER_VIEW = "per_view"


@dataclass
class TmvkscrModel:
    specs: tuple
    centering: object
    cfg: FusionConfig
    k: int
    H_all: np.ndarray  # N x q, first k-1 columns drive the clustering
    lambdas: np.ndarray  # eigenvalues of the eta-scaled problem, descending
    dsum: np.ndarray
    train_views: list
    stats: list
    degrees: list
    codebook: Codebook
    beta: np.ndarray
    train_labels: np.ndarray
    view_names: list
    subset_indices: np.ndarray = None
    assignment: str = ENSEMBLE
    view_codebooks: list = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def H(self):
        return self.H_all[:, : self.k - 1]

    @property
    def n_train(self):
        return self.H_all.shape[0]

    @property
    def n_views(self):
        return len(self.specs)

    @property
    def q(self):
        return self.H_all.shape[1]

    # persistence helpers used by data.save_model / data.load_model
    def to_state(self):
        meta = {
            "k": self.k,
            "centering": self.centering.value,
            "rho": self.cfg.rho,
            "kappa": list(self.cfg.kappa_for(self.n_views)),
            "eta": self.cfg.eta,
            "beta": self.beta.tolist(),
            "kernels": [s.to_dict() for s in self.specs],
            "view_names": list(self.view_names),
            "codebook": {
                "codewords": self.codebook.codewords.astype(int).tolist(),
                "counts": self.codebook.counts.astype(int).tolist(),
            },
            "view_codebooks": None
            if self.view_codebooks is None
            else [
                {"codewords": cb.codewords.astype(int).tolist(), "counts": cb.counts.astype(int).tolist()}
                for cb in self.view_codebooks
            ],
            "assignment": self.assignment,
            "train_labels": self.train_labels.astype(int).tolist(),
            "subset_indices": None if self.subset_indices is None else self.subset_indices.astype(int).tolist(),
            "diagnostics": self.diagnostics,
        }
        arrays = [("H", self.H_all), ("lambdas", self.lambdas), ("dsum", self.dsum)]
        for v in range(self.n_views):
            st = self.stats[v]
            arrays += [
                (f"X{v}", self.train_views[v]),
                (f"s{v}", st.s),
                (f"k_row{v}", st.k_row),
                (f"k_scalar{v}", np.array([st.k_scalar])),
                (f"degree{v}", self.degrees[v].d),
            ]
        return meta, arrays

    @classmethod
    def from_state(cls, meta, arrays):
        def codebook(d):
            return Codebook(np.array(d["codewords"], dtype=np.int8), np.array(d["counts"], dtype=np.int64))

        n_views = len(meta["kernels"])
        stats = [
            CenteringStats(arrays[f"s{v}"], arrays[f"k_row{v}"], float(arrays[f"k_scalar{v}"][0]))
            for v in range(n_views)
        ]
        return cls(
            specs=tuple(KernelSpec.from_dict(d) for d in meta["kernels"]),
            centering=as_centering(meta["centering"]),
            cfg=FusionConfig(rho=meta["rho"], kappa=tuple(meta["kappa"]), eta=meta["eta"]),
            k=int(meta["k"]),
            H_all=arrays["H"],
            lambdas=arrays["lambdas"],
            dsum=arrays["dsum"],
            train_views=[arrays[f"X{v}"] for v in range(n_views)],
            stats=stats,
            degrees=[DegreeMatrix(arrays[f"degree{v}"]) for v in range(n_views)],
            codebook=codebook(meta["codebook"]),
            beta=np.array(meta["beta"], dtype=np.float64),
            train_labels=np.array(meta["train_labels"], dtype=np.int64),
            view_names=list(meta["view_names"]),
            subset_indices=None if meta["subset_indices"] is None else np.array(meta["subset_indices"], dtype=np.int64),
            assignment=meta["assignment"],
            view_codebooks=None if meta["view_codebooks"] is None else [codebook(d) for d in meta["view_codebooks"]],
            diagnostics=meta.get("diagnostics") or {},
        )


def _check_specs(data, specs):
    specs = tuple(specs)
    if len(specs) != data.n_views:
        missing = data.view_names[len(specs)] if len(specs) < data.n_views else None
        if missing is not None:
            raise ConfigError(f"no kernel spec for view '{missing}' ({len(specs)} specs for {data.n_views} views)")
        raise ConfigError(f"{len(specs)} kernel specs for {data.n_views} views")
    return specs


def fit(data, specs, cfg=None, k=2, centering="degree", beta=None, q=None, assignment=ENSEMBLE, diagnostics=False):
    """Fit the fused model on ``data`` and label the training samples.

    ``q`` components are computed (default ``k - 1``); only the leading
    ``k - 1`` are used for clustering, the rest feed explained-variance
    reports. With ``diagnostics=True`` the stationarity objective, the
    spectral norm of the fused operator and the eigen-residuals are stored
    in ``model.diagnostics``.
    """
    if not isinstance(data, ViewDataset):
        data = ViewDataset(list(data))
    cfg = cfg or FusionConfig()
    specs = _check_specs(data, specs)
    k = int(k)
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if data.n < k:
        raise ConfigError(f"{data.n} samples cannot form {k} clusters")
    if assignment not in (ENSEMBLE, PER_VIEW):
        raise ConfigError(f"unknown assignment mode {assignment!r}")
    centering = as_centering(centering)
    kappa = cfg.kappa_for(data.n_views)
    beta = normalize_beta(beta, data.n_views)
    q = k - 1 if q is None else max(int(q), k - 1)
    if q > data.n:
        raise ConfigError(f"q={q} exceeds the {data.n} training samples")

    omega_c, stats, degrees = [], [], []
    for spec, X in zip(specs, data.views):
        K = gram_matrix(spec, X)
        D = degree_matrix(K)
        oc, st = center_gram(K, centering, D)
        omega_c.append(oc)
        stats.append(st)
        degrees.append(D)

    A = fuse_kernels(omega_c, cfg)
    dsum = np.sum([D.d for D in degrees], axis=0)
    sol = solve_latent(A, dsum, q)
    lambdas = sol.lambdas / cfg.eta

    H = sol.H[:, : k - 1]
    block = scores(omega_c, H, beta)
    codebook = build_codebook(sign_encode(block.e_mean), k)
    train = assign(sign_encode(block.e_mean), codebook)

    view_codebooks = None
    if assignment == PER_VIEW:
        view_codebooks = [build_codebook(sign_encode(e), k) for e in block.e]

    model = TmvkscrModel(
        specs=specs,
        centering=centering,
        cfg=FusionConfig(rho=cfg.rho, kappa=kappa, eta=cfg.eta),
        k=k,
        H_all=sol.H,
        lambdas=lambdas,
        dsum=dsum,
        train_views=[X.copy() for X in data.views],
        stats=stats,
        degrees=degrees,
        codebook=codebook,
        beta=beta,
        train_labels=train.labels,
        view_names=list(data.view_names),
        assignment=assignment,
        view_codebooks=view_codebooks,
    )
    if diagnostics:
        from scipy.sparse.linalg import eigsh

        a_norm = float(np.max(np.abs(eigsh(A, k=1, which="LM", return_eigenvectors=False))))
        clustering = type(sol)(H=H, lambdas=lambdas[: k - 1], dsum=dsum)
        J = objective_value(clustering, omega_c, [D.d for D in degrees], model.cfg)
        model.diagnostics = {
            "objective": J,
            "a_norm": a_norm,
            "objective_residual": abs(J) / a_norm,
            "max_eig_residual": float(np.max(residuals(A, sol)) / a_norm),
        }
    return model


def _check_test(model, data_test):
    if not isinstance(data_test, ViewDataset):
        data_test = ViewDataset(list(data_test))
    if data_test.n_views != model.n_views:
        raise DimensionError(f"model has {model.n_views} views, data has {data_test.n_views}")
    for v, (X, Xtr) in enumerate(zip(data_test.views, model.train_views)):
        if X.shape[1] != Xtr.shape[1]:
            raise DimensionError(
                f"view {v} ({model.view_names[v]}): {X.shape[1]} features, model was trained on {Xtr.shape[1]}"
            )
    return data_test


def centered_test_kernels(model, data_test):
    """Centred test kernel blocks, one Nte x N matrix per view."""
    data_test = _check_test(model, data_test)
    return [
        center_gram_test(gram_cross(spec, X, Xtr), st)
        for spec, X, Xtr, st in zip(model.specs, data_test.views, model.train_views, model.stats)
    ]


def score_views(model, data_test):
    return scores(centered_test_kernels(model, data_test), model.H, model.beta)


def predict(model, data_test):
    """Cluster unseen samples against the training codebook (ensemble scores)."""
    block = score_views(model, data_test)
    out = assign(sign_encode(block.e_mean), model.codebook)
    return ClusterAssignment(labels=out.labels, hamming=out.hamming, scores=block.e_mean)


def predict_per_view(model, data_test):
    """One assignment per view, each decoded with that view's codebook."""
    if model.view_codebooks is None:
        raise ConfigError("model was fitted without per-view codebooks (assignment='per_view')")
    block = score_views(model, data_test)
    result = []
    for e, cb in zip(block.e, model.view_codebooks):
        out = assign(sign_encode(e), cb)
        result.append(ClusterAssignment(labels=out.labels, hamming=out.hamming, scores=e))
    return result


def fit_fixed_size(data, specs, cfg=None, k=2, m=None, seed=0, centering="degree", beta=None, q=None, **kwargs):
    """Fit on ``m`` uniformly drawn samples, then label all ``N`` out of sample.

    Indices are drawn without replacement by ``np.random.default_rng(seed)``
    (PCG64) and kept in ascending order.
    """
    if not isinstance(data, ViewDataset):
        data = ViewDataset(list(data))
    m = data.n if m is None else int(m)
    if m < k:
        raise ConfigError(f"subset size m={m} is smaller than k={k}")
    if m > data.n:
        raise ConfigError(f"subset size m={m} exceeds N={data.n}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(data.n, size=m, replace=False))
    model = fit(data.subset(idx), specs, cfg, k, centering, beta, q, **kwargs)
    model.subset_indices = idx
    return model, predict(model, data)


@dataclass(frozen=True)
class ExplainedVariance:
    shares: np.ndarray
    cumulative: np.ndarray
    n_negative: int


def explained_variance(model_or_lambdas):
    """Share of each computed eigenvalue in their (nonnegative) total.

    Negative eigenvalues contribute a zero share and are counted in
    ``n_negative``.
    """
    lam = getattr(model_or_lambdas, "lambdas", model_or_lambdas)
    lam = np.asarray(lam, dtype=np.float64)
    pos = np.clip(lam, 0.0, None)
    total = pos.sum()
    shares = pos / total if total > 0 else np.zeros_like(pos)
    return ExplainedVariance(shares=shares, cumulative=np.cumsum(shares), n_negative=int(np.sum(lam < 0)))
