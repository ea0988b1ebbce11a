"""Explained-variance and latent-variable exports, with minimal SVG plots."""
import warnings
from pathlib import Path

import numpy as np

from .model import explained_variance

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def latent_columns(model):
    # at least the clustering components; a second one when available for scatter plots
    return max(model.k - 1, min(model.q, 2))


def export_explained_variance(model, path):
    ev = explained_variance(model)
    rows = np.column_stack([np.arange(1, ev.shares.size + 1), ev.shares, ev.cumulative])
    with open(path, "w") as fh:
        fh.write("component,share,cumulative\n")
        for c, s, cum in rows:
            fh.write(f"{int(c)},{s:.17g},{cum:.17g}\n")
    return ev


def export_latent(model, path):
    ncol = latent_columns(model)
    H = model.H_all[:, :ncol]
    header = [f"h{j + 1}" for j in range(ncol)] + ["label"]
    table = np.column_stack([H, model.train_labels]).astype(object)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in table:
            fh.write(",".join([*(f"{x:.17g}" for x in row[:-1]), str(int(row[-1]))]) + "\n")
    return ncol


def _svg(width, height, body):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def decay_svg(shares, path, width=420, height=260, pad=36):
    shares = np.asarray(shares)
    n = max(len(shares), 1)
    bw = (width - 2 * pad) / n
    top = shares.max() if shares.size and shares.max() > 0 else 1.0
    body = [f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>']
    cum = np.cumsum(shares)
    pts = []
    for i, s in enumerate(shares):
        h = (height - 2 * pad) * s / top
        x = pad + i * bw
        body.append(
            f'<rect x="{x + 0.1 * bw:.2f}" y="{height - pad - h:.2f}" width="{0.8 * bw:.2f}" '
            f'height="{h:.2f}" fill="{_PALETTE[0]}"/>'
        )
        pts.append(f"{x + 0.5 * bw:.2f},{height - pad - (height - 2 * pad) * cum[i]:.2f}")
    body.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{_PALETTE[1]}"/>')
    body.append(f'<text x="{pad}" y="{pad - 12}" font-size="12">explained variance per component</text>')
    Path(path).write_text(_svg(width, height, body))


def scatter_svg(H, labels, path, size=360, pad=30):
    x, y = H[:, 0], H[:, 1]

    def scale(a, lo, hi):
        span = a.max() - a.min()
        return lo + (a - a.min()) / (span if span > 0 else 1.0) * (hi - lo)

    sx = scale(x, pad, size - pad)
    sy = scale(y, size - pad, pad)
    body = [
        f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2" fill="{_PALETTE[int(c) % len(_PALETTE)]}"/>'
        for a, b, c in zip(sx, sy, labels)
    ]
    body.append(f'<text x="{pad}" y="{pad - 10}" font-size="12">h1 vs h2</text>')
    Path(path).write_text(_svg(size, size, body))


def write_report(model, out_dir, svg=False):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ev = export_explained_variance(model, out_dir / "explained_variance.csv")
    if ev.n_negative:
        warnings.warn(f"{ev.n_negative} negative eigenvalue(s) excluded from explained-variance shares")
    ncol = export_latent(model, out_dir / "latent.csv")
    written = ["explained_variance.csv", "latent.csv"]
    if svg:
        decay_svg(ev.shares, out_dir / "decay.svg")
        written.append("decay.svg")
        if ncol < 2:
            warnings.warn("fewer than 2 latent components computed (use q >= 2); scatter plot skipped")
        else:
            scatter_svg(model.H_all[:, :2], model.train_labels, out_dir / "scatter.svg")
            written.append("scatter.svg")
    return {"files": written, "shares": ev.shares.tolist(), "n_negative": ev.n_negative}

