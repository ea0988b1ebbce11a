"""Exhaustive hyperparameter grids scored by ARI/NMI against known labels."""
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TmvkscError
from .kernels import KernelKind, KernelSpec
from .metrics import ari, nmi
from .model import fit
from .spectral import FusionConfig

FULL_SIGMA2 = tuple(math.exp(e) for e in range(-7, 8))
FULL_T = tuple(math.exp(e) for e in range(-5, 6))
FULL_DEGREE = (1, 2)
FULL_RHO = (0.0, 0.25, 0.5, 0.75, 1.0)

SMALL_SIGMA2 = (0.05, 0.2, 1.0, 5.0, 20.0)
SMALL_RHO = (0.25, 0.5, 1.0)


@dataclass
class Grid:
    """Candidate values; each view receives the same kernel, kappa varies per view."""

    kind: KernelKind = KernelKind.RBF
    sigma2: tuple = FULL_SIGMA2
    degree: tuple = FULL_DEGREE
    t: tuple = FULL_T
    rho: tuple = FULL_RHO
    kappa: tuple = (1.0,)
    centering: tuple = ("degree",)

    @classmethod
    def preset(cls, name, kind=KernelKind.RBF):
        if name == "full":
            return cls(kind=KernelKind(kind))
        if name == "small":
            return cls(kind=KernelKind(kind), sigma2=SMALL_SIGMA2, rho=SMALL_RHO, t=(1.0,), degree=(1, 2))
        raise ConfigError(f"unknown grid preset {name!r}")

    def kernels(self):
        if self.kind is KernelKind.RBF:
            return [KernelSpec.rbf(s) for s in self.sigma2]
        if self.kind is KernelKind.LINEAR:
            return [KernelSpec.linear()]
        return [KernelSpec.npoly(d, t) for d in self.degree for t in self.t]

    def points(self, n_views):
        for r in self.rho:
            if not (0.0 <= float(r) <= 1.0):
                raise ConfigError(f"rho grid value {r} outside [0, 1]")
        for kp in self.kappa:
            if not (float(kp) > 0.0):
                raise ConfigError(f"kappa grid value {kp} must be positive")
        kernels = self.kernels()
        pts = []
        for centering, spec, rho in itertools.product(self.centering, kernels, self.rho):
            # kappa is irrelevant when the weighted sum is switched off
            kappas = [(1.0,) * n_views] if rho == 0 else itertools.product(self.kappa, repeat=n_views)
            for kappa in kappas:
                pts.append(GridPoint(spec, FusionConfig(rho=float(rho), kappa=tuple(kappa)), centering))
        if not pts:
            raise ConfigError("tuning grid is empty")
        return pts


@dataclass(frozen=True)
class GridPoint:
    spec: KernelSpec
    cfg: FusionConfig
    centering: str

    def describe(self):
        return {
            "kernel": self.spec.to_dict(),
            "rho": self.cfg.rho,
            "kappa": list(self.cfg.kappa),
            "centering": self.centering,
        }


@dataclass
class TuneResult:
    index: int
    point: GridPoint
    ari: float = float("nan")
    nmi: float = float("nan")
    seconds: float = 0.0
    error: str = None

    def row(self):
        return {**self.point.describe(), "ari": self.ari, "nmi": self.nmi, "seconds": self.seconds, "error": self.error}


def default_jobs():
    try:
        return max(1, int(os.environ.get("TMVKSC_JOBS", "1")))
    except ValueError:
        return 1


def _evaluate(index, point, data, k, beta):
    t0 = time.perf_counter()
    res = TuneResult(index, point)
    try:
        model = fit(data, [point.spec] * data.n_views, point.cfg, k, point.centering, beta)
        res.ari = ari(data.labels, model.train_labels)
        res.nmi = nmi(data.labels, model.train_labels)
    except TmvkscError as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    res.seconds = time.perf_counter() - t0
    return res


def tune(data, grid, k=2, beta=None, jobs=None):
    """Evaluate every grid point; return results ranked by ARI (grid order on ties)."""
    if data.labels is None:
        raise ConfigError("tuning needs ground-truth labels")
    points = grid.points(data.n_views)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1:
        results = [_evaluate(i, p, data, k, beta) for i, p in enumerate(points)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda ip: _evaluate(ip[0], ip[1], data, k, beta), enumerate(points)))
    results.sort(key=lambda r: r.index)

    def key(r):
        return (-(r.ari if np.isfinite(r.ari) else -np.inf), r.index)

    return sorted(results, key=key)
