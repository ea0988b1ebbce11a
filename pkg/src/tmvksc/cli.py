"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 1 runtime failure.
"""
import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path


from .data import (
    SynthSpec,
    dataset_checksum,
    generate_synth,
    load_csv_views,
    load_model,
    save_model,
    write_csv_views,
    write_matrix_csv,
)
from .errors import ConfigError, ParseError, TmvkscError
from .kernels import KernelKind, KernelSpec, as_centering
from .metrics import ari, nmi
from .model import ENSEMBLE, PER_VIEW, fit, fit_fixed_size, predict
from .report import write_report
from .spectral import FusionConfig
from .tuning import Grid, default_jobs, tune


@dataclass
class RunConfig:
    """Fit configuration, loadable from a JSON document; CLI flags override it."""

    views: list = None
    synth: dict = None
    labels: str = None
    header: bool = False
    kernels: list = field(default_factory=list)
    centering: str = "degree"
    k: int = 2
    rho: float = 1.0
    kappa: list = None
    beta: list = None
    q: int = None
    fixed_size: int = None
    seed: int = 0
    assignment: str = ENSEMBLE
    model_out: str = None
    summary_out: str = None
    labels_out: str = None

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from exc

    def dataset(self):
        if self.views and self.synth:
            raise ConfigError("give either view files or a synthetic dataset, not both")
        if self.synth:
            return generate_synth(SynthSpec(**self.synth))
        if not self.views:
            raise ConfigError("no input data: pass --views or --synth")
        return load_csv_views(self.views, self.labels, self.header)

    def kernel_specs(self, data):
        specs = [k if isinstance(k, KernelSpec) else _kernel_from(k) for k in self.kernels]
        if not specs:
            raise ConfigError("no kernel spec given (use --kernel)")
        if len(specs) == 1 and data.n_views > 1:
            specs = specs * data.n_views
        if len(specs) < data.n_views:
            raise ConfigError(
                f"no kernel spec for view '{data.view_names[len(specs)]}' "
                f"({len(specs)} specs for {data.n_views} views)"
            )
        if len(specs) > data.n_views:
            raise ConfigError(f"{len(specs)} kernel specs for {data.n_views} views")
        return specs


def _kernel_from(obj):
    if isinstance(obj, str):
        return KernelSpec.parse(obj)
    if isinstance(obj, dict):
        return KernelSpec.from_dict(obj)
    raise ConfigError(f"cannot interpret kernel spec {obj!r}")


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text)
    if path:
        Path(path).write_text(text + "\n")


# ------------------------------------------------------------------ commands


def cmd_generate(args):
    data = generate_synth(SynthSpec(args.dataset, args.n, args.seed))
    paths, label_path = write_csv_views(data, args.out)
    _emit(
        {
            "dataset": args.dataset,
            "n": data.n,
            "seed": args.seed,
            "sha256": dataset_checksum(data),
            "files": [str(p) for p in paths] + [str(label_path)],
        }
    )
    return 0


def _data_args_into(cfg, args):
    for name in ("views", "labels", "kernels", "centering", "k", "rho", "kappa", "beta", "q", "fixed_size", "seed",
                 "model_out", "summary_out", "labels_out"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "header", False):
        cfg.header = True
    if getattr(args, "per_view", False):
        cfg.assignment = PER_VIEW
    if getattr(args, "synth", None):
        cfg.synth = {"which": args.synth, "n": args.n, "seed": args.synth_seed}
    return cfg


def cmd_fit(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    cfg = _data_args_into(cfg, args)
    data = cfg.dataset()
    specs = cfg.kernel_specs(data)
    fusion = FusionConfig(rho=float(cfg.rho), kappa=None if cfg.kappa is None else tuple(cfg.kappa))

    t0 = time.perf_counter()
    if cfg.fixed_size is not None:
        model, result = fit_fixed_size(
            data, specs, fusion, cfg.k, cfg.fixed_size, cfg.seed, cfg.centering, cfg.beta, cfg.q,
            assignment=cfg.assignment, diagnostics=True,
        )
        labels = result.labels
    else:
        model = fit(data, specs, fusion, cfg.k, cfg.centering, cfg.beta, cfg.q, cfg.assignment, diagnostics=True)
        labels = model.train_labels
    wall_ms = (time.perf_counter() - t0) * 1e3

    if cfg.model_out:
        save_model(model, cfg.model_out)
    if cfg.labels_out:
        write_matrix_csv(cfg.labels_out, labels)
    summary = {
        "n": data.n,
        "v": data.n_views,
        "k": model.k,
        "eigenvalues": model.lambdas.tolist(),
        "objective_residual": model.diagnostics["objective_residual"],
        "wall_time_ms": wall_ms,
        "subset_size": model.n_train,
        "kernels": [s.to_dict() for s in model.specs],
        "rho": model.cfg.rho,
        "kappa": list(model.cfg.kappa),
        "centering": model.centering.value,
    }
    if data.labels is not None:
        summary["train_ari"] = ari(data.labels, labels)
        summary["train_nmi"] = nmi(data.labels, labels)
    _emit(summary, cfg.summary_out)
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    data = load_csv_views(args.views, args.labels, args.header)
    result = predict(model, data)
    write_matrix_csv(args.out, result.labels)
    if args.scores:
        write_matrix_csv(args.scores, result.scores)
    summary = {"n": data.n, "out": args.out}
    if data.labels is not None:
        summary["ari"] = ari(data.labels, result.labels)
        summary["nmi"] = nmi(data.labels, result.labels)
    _emit(summary)
    return 0


def cmd_evaluate(args):
    truth = load_csv_views([args.truth], header=args.header).views[0]
    pred = load_csv_views([args.pred], header=args.header).views[0]
    _emit({"ari": ari(truth.ravel(), pred.ravel()), "nmi": nmi(truth.ravel(), pred.ravel())})
    return 0


def cmd_tune(args):
    cfg = _data_args_into(RunConfig.load(args.config) if args.config else RunConfig(), args)
    data = cfg.dataset()
    try:
        kind = KernelKind(args.kernel_kind)
    except ValueError:
        raise ConfigError(f"unknown kernel kind {args.kernel_kind!r}") from None
    grid = Grid.preset(args.grid, kind)
    for name in ("sigma2", "degree", "t", "rho", "kappa"):
        values = getattr(args, f"grid_{name}")
        if values is not None:
            setattr(grid, name, tuple(values))
    if args.grid_centering:
        grid.centering = tuple(as_centering(c).value for c in args.grid_centering)
    else:
        grid.centering = (as_centering(cfg.centering).value,)

    results = tune(data, grid, cfg.k, cfg.beta, args.jobs)
    rows = [r.row() for r in results]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("rank,kernel,rho,kappa,centering,ari,nmi,seconds,error\n")
            for rank, row in enumerate(rows, start=1):
                fh.write(
                    f"{rank},\"{json.dumps(row['kernel'])}\",{row['rho']},\"{row['kappa']}\",{row['centering']},"
                    f"{row['ari']:.17g},{row['nmi']:.17g},{row['seconds']:.4f},{row['error'] or ''}\n"
                )
    best = rows[0]
    best_cfg = {
        "kernels": [best["kernel"]],
        "rho": best["rho"],
        "kappa": best["kappa"],
        "centering": best["centering"],
        "k": cfg.k,
    }
    if args.best:
        Path(args.best).write_text(json.dumps(best_cfg, indent=2) + "\n")
    for rank, row in enumerate(rows[: args.top], start=1):
        print(
            f"{rank:3d}  ari={row['ari']:.4f}  nmi={row['nmi']:.4f}  rho={row['rho']:<5} "
            f"kappa={row['kappa']}  {row['kernel']}  {row['seconds']:.2f}s",
            file=sys.stderr,
        )
    _emit({"evaluated": len(rows), "best": {**best_cfg, "ari": best["ari"], "nmi": best["nmi"]}})
    return 0


def cmd_report(args):
    model = load_model(args.model)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        info = write_report(model, args.out_dir, svg=args.svg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(info)
    return 0


# -------------------------------------------------------------------- parser


def _add_data_args(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--views", nargs="+", help="one CSV file per view")
    p.add_argument("--labels", help="CSV with one integer label per row")
    p.add_argument("--header", action="store_true", help="skip one header row in every CSV")
    p.add_argument("--synth", choices=["synth1", "synth2"], help="use a generated dataset instead of CSVs")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--synth-seed", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--centering", choices=["plain", "degree"])
    p.add_argument("--beta", type=float, nargs="+")


def build_parser():
    parser = argparse.ArgumentParser(prog="tmvksc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic multi-view dataset as CSVs")
    g.add_argument("--dataset", required=True, choices=["synth1", "synth2"])
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit a model and write the archive")
    _add_data_args(f)
    f.add_argument("--kernel", dest="kernels", action="append",
                   help="kernel per view, e.g. rbf:sigma2=0.05, linear, npoly:degree=2,t=1 (one value = all views)")
    f.add_argument("--rho", type=float)
    f.add_argument("--kappa", type=float, nargs="+")
    f.add_argument("--q", type=int, help="eigenpairs to compute (>= k-1, extra ones feed reports)")
    f.add_argument("--fixed-size", dest="fixed_size", type=int, help="train on this many random samples")
    f.add_argument("--seed", type=int, help="subset seed for --fixed-size")
    f.add_argument("--per-view", action="store_true", help="also build per-view codebooks")
    f.add_argument("--model", dest="model_out")
    f.add_argument("--summary", dest="summary_out")
    f.add_argument("--labels-out")
    f.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="label new samples with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--views", nargs="+", required=True)
    p.add_argument("--labels")
    p.add_argument("--header", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--scores", help="write the N x (k-1) mean-score matrix here")
    p.set_defaults(func=cmd_predict)

    e = sub.add_parser("evaluate", help="ARI/NMI between two label files")
    e.add_argument("--truth", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--header", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    t = sub.add_parser("tune", help="grid search scored by ARI against labels")
    _add_data_args(t)
    t.add_argument("--grid", choices=["full", "small"], default="full")
    t.add_argument("--kernel-kind", default="rbf", choices=["rbf", "linear", "npoly"])
    t.add_argument("--sigma2", dest="grid_sigma2", type=float, nargs="+")
    t.add_argument("--degree", dest="grid_degree", type=int, nargs="+")
    t.add_argument("--t", dest="grid_t", type=float, nargs="+")
    t.add_argument("--rho", dest="grid_rho", type=float, nargs="+")
    t.add_argument("--kappa", dest="grid_kappa", type=float, nargs="+")
    t.add_argument("--grid-centering", nargs="+", choices=["plain", "degree"])
    t.add_argument("--jobs", type=int, default=None, help=f"worker threads (default TMVKSC_JOBS={default_jobs()})")
    t.add_argument("--out", help="ranked table CSV")
    t.add_argument("--best", help="best configuration JSON")
    t.add_argument("--top", type=int, default=10)
    t.set_defaults(func=cmd_tune)

    r = sub.add_parser("report", help="explained-variance and latent-variable exports")
    r.add_argument("--model", required=True)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--svg", action="store_true")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except TmvkscError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
