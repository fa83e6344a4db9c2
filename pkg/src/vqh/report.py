"""Plot-ready views of a dataset: marginal heatmap and energy curve PNGs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def save_figures(streams, labels, outdir) -> list[Path]:
    """Render the dataset's standard figures next to its CSV files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(8, 3.2))
    image = ax.imshow(
        streams.c.T,
        aspect="auto",
        origin="lower",
        interpolation="nearest",
        cmap="magma",
        vmin=0.0,
        vmax=1.0,
    )
    ax.set_xlabel("iteration")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=7)
    fig.colorbar(image, ax=ax, label="marginal")
    fig.tight_layout()
    path = outdir / "marginals.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(8, 2.6))
    ax.plot(streams.e, linewidth=0.9)
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    fig.tight_layout()
    path = outdir / "energy.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths
