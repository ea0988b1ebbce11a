"""End-to-end acceptance checks; each prints one CRITERION line."""
import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from tmvksc import (
    FusionConfig,
    KernelSpec,
    SynthSpec,
    ViewDataset,
    ari,
    center_gram,
    degree_matrix,
    explained_variance,
    fit,
    fit_fixed_size,
    fuse_kernels,
    generate_synth,
    gram_matrix,
    hadamard_equals_tensor_oracle,
    nmi,
    objective_value,
    predict,
    scores,
)
from tmvksc.data import _SYNTH, Synth
from tmvksc.spectral import EigenSolution
from tmvksc.tuning import Grid, tune

sys.path.insert(0, str(Path(__file__).parent))
from oracles import bayes_labels, pair_counting_ari, pair_indicator, set_partitions  # noqa: E402

SYNTH1_SEED = 0
SYNTH2_SEED = 0


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def synth1():
    return generate_synth(SynthSpec("synth1", 1000, SYNTH1_SEED))


@pytest.fixture(scope="module")
def synth1_tuned(synth1):
    # warm up compiled kernels so the timing covers the grid only
    fit(synth1.subset(np.arange(20)), [KernelSpec.rbf(1.0)] * 3)
    grid = Grid.preset("small")
    grid.sigma2 = (0.05, 0.2, 1.0, 5.0, 20.0)
    grid.rho = (0.25, 0.5, 1.0)
    results, seconds = _timed(tune, synth1, grid, 2, None, 1)
    return results, seconds


def test_criterion_1_synth1_small_grid(synth1, synth1_tuned, criterion):
    results, seconds = synth1_tuned
    best = results[0]
    best_nmi = max(r.nmi for r in results)
    ceiling = bayes_labels(synth1, _SYNTH[Synth.SYNTH1])
    detail = (
        f"best ARI {best.ari:.4f} (>= 0.98), best NMI {best_nmi:.4f} (>= 0.97), {seconds:.1f}s (<= 30s); "
        f"best point {best.point.describe()}; Bayes-optimal rule on the same data: "
        f"ARI {ari(synth1.labels, ceiling):.4f}, NMI {nmi(synth1.labels, ceiling):.4f}"
    )
    criterion(1, best.ari >= 0.98 and best_nmi >= 0.97 and seconds <= 30.0, detail)


def test_criterion_2_synth2_full_grid(criterion):
    data = generate_synth(SynthSpec("synth2", 1000, SYNTH2_SEED))
    fit(data.subset(np.arange(20)), [KernelSpec.rbf(1.0)] * 2)
    results, seconds = _timed(tune, data, Grid.preset("full"), 2, None, 1)
    best = results[0]
    detail = f"best ARI {best.ari:.4f} (>= 0.40) over {len(results)} points in {seconds:.1f}s (<= 60s)"
    criterion(2, best.ari >= 0.40 and seconds <= 60.0, detail)


def _random_instance(rng):
    n = int(rng.integers(8, 41))
    n_views = int(rng.integers(1, 4))
    views, specs = [], []
    for _ in range(n_views):
        d = int(rng.integers(1, 5))
        # strictly positive features keep linear-kernel degrees positive
        views.append(rng.uniform(0.2, 1.5, size=(n, d)))
        kind = rng.integers(3)
        if kind == 0:
            specs.append(KernelSpec.rbf(float(np.exp(rng.uniform(-1, 2)))))
        elif kind == 1:
            specs.append(KernelSpec.linear())
        else:
            specs.append(KernelSpec.npoly(int(rng.integers(1, 3)), float(np.exp(rng.uniform(-1, 1)))))
    cfg = FusionConfig(
        rho=float(rng.choice([0.0, 0.5, 1.0])),
        kappa=tuple(rng.uniform(0.1, 3.0, size=n_views)),
        eta=float(rng.choice([1.0, 2.5])),
    )
    centering = str(rng.choice(["plain", "degree"]))
    k = int(rng.choice([2, 3]))
    return ViewDataset(views), specs, cfg, centering, k


@pytest.fixture(scope="module")
def stationarity_instances():
    rng = np.random.default_rng(3)
    out = []
    for _ in range(50):
        data, specs, cfg, centering, k = _random_instance(rng)
        model = fit(data, specs, cfg, k, centering)
        omega_c = []
        for spec, X in zip(specs, data.views):
            K = gram_matrix(spec, X)
            omega_c.append(center_gram(K, centering, degree_matrix(K))[0])
        out.append((data, model, omega_c))
    return out


def test_criterion_3_stationarity(stationarity_instances, criterion):
    worst = 0.0
    kinds = set()
    for data, model, omega_c in stationarity_instances:
        A = fuse_kernels(omega_c, model.cfg)
        a_norm = np.linalg.norm(A, 2)
        sol = EigenSolution(H=model.H, lambdas=model.lambdas[: model.k - 1], dsum=model.dsum)
        J = objective_value(sol, omega_c, [D.d for D in model.degrees], model.cfg)
        worst = max(worst, abs(J) / a_norm)
        kinds.add((data.n_views, model.cfg.rho, model.centering.value))
    detail = f"50 instances ({len(kinds)} view/rho/centering combos), worst |J|/||A||_2 = {worst:.2e} (<= 1e-8)"
    criterion(3, worst <= 1e-8, detail)


def test_criterion_4_tensor_duality(criterion):
    rng = np.random.default_rng(4)
    passed = 0
    worst = 0.0
    for i in range(25):
        n_views = int(rng.integers(2, 4))
        n = int(rng.integers(2, 7))
        maps = [rng.standard_normal((n, int(rng.integers(1, 5)))) for _ in range(n_views)]
        centering = "plain" if i % 2 == 0 else "degree"
        if centering == "degree":
            maps = [np.abs(f) + 0.5 for f in maps]
        ok = hadamard_equals_tensor_oracle(maps, centering=centering, tol=1e-12)
        # second, fully explicit route: plain centring of the feature maps, then einsum inner products
        if centering == "plain":
            centred = [f - f.mean(axis=0) for f in maps]
            T = centred[0]
            for f in centred[1:]:
                T = np.einsum("ni,nj->nij", T, f).reshape(n, -1)
            expected = T @ T.T
            got = fuse_kernels(
                [center_gram(gram_matrix(KernelSpec.linear(), f), "plain")[0] for f in maps], FusionConfig(rho=0.0)
            )
            err = float(np.max(np.abs(got - expected) / np.maximum(1.0, np.abs(expected))))
            worst = max(worst, err)
            ok = ok and err <= 1e-12
        passed += bool(ok)
    criterion(4, passed == 25, f"{passed}/25 instances agree within 1e-12 (explicit-einsum worst {worst:.1e})")


def test_criterion_5_out_of_sample_consistency(stationarity_instances, criterion):
    label_ok = 0
    worst = 0.0
    for data, model, omega_c in stationarity_instances:
        out = predict(model, data)
        label_ok += bool(np.array_equal(out.labels, model.train_labels))
        train_scores = scores(omega_c, model.H, model.beta).e_mean
        worst = max(worst, float(np.max(np.abs(out.scores - train_scores))))
    detail = f"labels exact on {label_ok}/50, worst score deviation {worst:.1e} (<= 1e-10)"
    criterion(5, label_ok == 50 and worst <= 1e-10, detail)


def test_criterion_6_fixed_size(synth1, synth1_tuned, criterion):
    point = synth1_tuned[0][0].point
    specs = [point.spec] * 3
    fit_fixed_size(synth1, specs, point.cfg, m=50, seed=0, centering=point.centering)  # warm-up

    def best_of(fn, reps=3):
        times = []
        for _ in range(reps):
            out, t = _timed(fn)
            times.append(t)
        return out, min(times)

    (model, result), t_fixed = best_of(
        lambda: fit_fixed_size(synth1, specs, point.cfg, m=200, seed=0, centering=point.centering)
    )
    _, t_full = best_of(lambda: fit(synth1, specs, point.cfg, 2, point.centering))
    score = ari(synth1.labels, result.labels)
    bayes = ari(synth1.labels, bayes_labels(synth1, _SYNTH[Synth.SYNTH1]))
    detail = (
        f"m=200 ARI {score:.4f} on all 1000 points (>= 0.95; Bayes-optimal rule {bayes:.4f}), "
        f"fit {t_fixed:.3f}s (<= 5s) vs full fit {t_full:.3f}s"
    )
    criterion(6, score >= 0.95 and t_fixed <= 5.0 and t_fixed < t_full and model.n_train == 200, detail)


def test_criterion_7_invariances(criterion):
    data = generate_synth(SynthSpec("synth1", 300, 8))
    specs = [KernelSpec.rbf(1.0), KernelSpec.rbf(5.0), KernelSpec.npoly(2, 1.0)]
    kappa, beta = (1.0, 0.5, 2.0), (0.2, 0.3, 0.5)
    failures = []
    checks = 0

    for k in (2, 3):
        base = fit(data, specs, FusionConfig(rho=1.0, kappa=kappa), k, beta=beta)
        for c in (0.1, 7.0):
            other = fit(data, specs, FusionConfig(rho=1.0, kappa=tuple(c * x for x in kappa)), k, beta=beta)
            checks += 1
            if ari(base.train_labels, other.train_labels) != 1.0:
                failures.append(f"kappa*{c} k={k}")

        for rho in (0.0, 0.5, 1.0):
            ref = fit(data, specs, FusionConfig(rho=rho, kappa=kappa), k, beta=beta)
            for eta in (0.3, 5.0):
                other = fit(data, specs, FusionConfig(rho=rho, kappa=kappa, eta=eta), k, beta=beta)
                checks += 1
                if ari(ref.train_labels, other.train_labels) != 1.0 or not np.array_equal(ref.H_all, other.H_all):
                    failures.append(f"eta={eta} rho={rho} k={k}")

            for order in itertools.permutations(range(3)):
                other = fit(
                    data.reorder_views(order),
                    [specs[i] for i in order],
                    FusionConfig(rho=rho, kappa=tuple(kappa[i] for i in order)),
                    k,
                    beta=[beta[i] for i in order],
                )
                checks += 1
                if ari(ref.train_labels, other.train_labels) != 1.0:
                    failures.append(f"views {order} rho={rho} k={k}")

            rng = np.random.default_rng(int(rho * 10) + k)
            for _ in range(3):
                perm = rng.permutation(data.n)
                other = fit(data.subset(perm), specs, FusionConfig(rho=rho, kappa=kappa), k, beta=beta)
                checks += 1
                if ari(ref.train_labels[perm], other.train_labels) != 1.0:
                    failures.append(f"sample permutation rho={rho} k={k}")

    detail = f"{checks - len(failures)}/{checks} runs reproduce the reference partition (ARI = 1)"
    if failures:
        detail += f"; failing: {failures[:5]}"
    criterion(7, not failures, detail)


def _vectorised_pair_ari(parts):
    P = np.array([pair_indicator(p) for p in parts], dtype=np.int64)
    Q = 1 - P
    ss, sd, ds, dd = P @ P.T, P @ Q.T, Q @ P.T, Q @ Q.T
    num = 2.0 * (ss * dd - sd * ds)
    den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den == 0, 1.0, num / den)


def test_criterion_8_metrics_oracle(criterion):
    checked = 0
    worst = 0.0
    for n in range(2, 9):
        parts = [np.array(p) for p in set_partitions(n, 3)]
        oracle = _vectorised_pair_ari(parts)
        # spot-check the vectorised oracle against the scalar enumeration
        for i, j in [(0, len(parts) - 1), (len(parts) // 2, len(parts) // 3)]:
            assert abs(oracle[i, j] - pair_counting_ari(parts[i], parts[j])) <= 1e-15
        # ARI is symmetric (checked separately below), so unordered pairs cover every labeling pair
        for i in range(len(parts)):
            for j in range(i, len(parts)):
                worst = max(worst, abs(ari(parts[i], parts[j]) - oracle[i, j]))
                checked += 1

    rng = np.random.default_rng(8)
    bound_ok = sym_ok = 0
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        a = rng.integers(0, int(rng.integers(1, 6)), size=n)
        b = rng.integers(0, int(rng.integers(1, 6)), size=n)
        v, w = nmi(a, b), nmi(b, a)
        bound_ok += bool(0.0 <= v <= 1.0)
        sym_ok += bool(abs(v - w) <= 1e-12 and abs(ari(a, b) - ari(b, a)) <= 1e-12)
    detail = (
        f"ARI vs pair counting on {checked} labeling pairs (N <= 8, k <= 3), worst error {worst:.1e} (<= 1e-12); "
        f"NMI in [0, 1] on {bound_ok}/1000, symmetric on {sym_ok}/1000"
    )
    criterion(8, worst <= 1e-12 and bound_ok == 1000 and sym_ok == 1000, detail)


def test_criterion_9_explained_variance(synth1, synth1_tuned, criterion):
    point = synth1_tuned[0][0].point
    model = fit(synth1, [point.spec] * 3, point.cfg, 2, point.centering, q=5)
    shares = explained_variance(model).shares
    ratio = shares[0] / shares[1]
    detail = f"first share {shares[0]:.3f}, second {shares[1]:.3f}, ratio {ratio:.2f} (>= 2) at {point.describe()}"
    criterion(9, ratio >= 2.0, detail)
