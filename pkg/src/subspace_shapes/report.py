"""Machine-readable run reports with companion figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .palette import cluster_color
from .pipeline import SceneState


def write_report(state: SceneState, out_dir: Path, stem: str) -> Path:
    """Write <stem>_report.tsv plus projection/timing figures; returns the tsv path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    cloud = state.cloud if state.cloud is not None else state.projection()

    lines = ["section\tkey\tvalue"]
    lines.append(f"dataset\tn_points\t{cloud.n_points}")
    lines.append(f"dataset\tn_dims\t{state.dataset.n_dims}")
    lines.append(f"dataset\tn_clusters\t{int(state.labels.max()) + 1}")
    lines.append(f"dataset\tn_rejected_rows\t{state.dataset.n_rejected}")
    for stage, seconds in state.timings.items():
        lines.append(f"timing\t{stage}\t{seconds:.6f}")
    for mesh in state.meshes:
        key = f"cluster{mesh.cluster_id}_layer{mesh.layer}"
        lines.append(f"mesh\t{key}_vertices\t{mesh.n_vertices}")
        lines.append(f"mesh\t{key}_triangles\t{mesh.n_triangles}")
        lines.append(f"mesh\t{key}_iso\t{mesh.iso:.9g}")
        lines.append(f"mesh\t{key}_opacity\t{mesh.opacity:.9g}")
    lines.append(f"outliers\tcount\t{len(state.outliers)}")

    report_path = out_dir / f"{stem}_report.tsv"
    report_path.write_text("\n".join(lines) + "\n")

    _projection_figure(state, out_dir / f"{stem}_projection.png")
    if state.timings:
        _timings_figure(state, out_dir / f"{stem}_timings.png")
    return report_path


def _projection_figure(state: SceneState, path: Path) -> None:
    points = state.scatter_points()
    pos = points["positions"]
    labels = points["labels"]
    alphas = points["opacities"]
    fig, ax = plt.subplots(figsize=(6, 6))
    for cid in sorted(set(int(c) for c in labels)):
        mask = labels == cid
        rgba = np.empty((int(mask.sum()), 4))
        rgba[:, :3] = cluster_color(cid)
        rgba[:, 3] = alphas[mask]  # per-point depth cue
        ax.scatter(
            pos[mask, 0],
            pos[mask, 1],
            s=14,
            color=rgba,
            label=f"cluster {cid}",
        )
    if len(state.outliers):
        ax.scatter(
            pos[state.outliers, 0],
            pos[state.outliers, 1],
            s=40,
            facecolors="none",
            edgecolors="red",
            label="outliers",
        )
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title("projected point cloud (depth-cued)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _timings_figure(state: SceneState, path: Path) -> None:
    stages = [k for k in state.timings if k != "total"]
    seconds = [state.timings[k] for k in stages]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.barh(stages, seconds, color="#4878a8")
    ax.set_xlabel("seconds")
    ax.set_title(f"rebuild stages (total {state.timings.get('total', 0):.2f}s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
