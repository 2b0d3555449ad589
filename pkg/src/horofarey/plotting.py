"""Figure rendering for experiment reports (ECDF overlays, joint scatter).

Uses the non-interactive Agg backend: figures go to files next to the
delimited output, never to a display.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCATTER_CAP = 5000


def ecdf_overlay(samples, path, title=""):
    """Overlay the empirical CDFs of the named sample arrays and save to path."""
    if not samples:
        raise ValueError("need at least one sample array")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name in sorted(samples):
        a = np.sort(np.asarray(samples[name], float).ravel())
        ax.step(a, (np.arange(a.size) + 1.0) / a.size, where="post", label=name, lw=1.2)
    ax.set_xlabel("observable value")
    ax.set_ylabel("empirical CDF")
    ax.set_ylim(0.0, 1.0)
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def joint_figure(report, path):
    """Scatter of the observable pairs plus the two marginal ECDFs."""
    g1 = np.asarray(report.samples["pairs_plain"], float)
    g2 = np.asarray(report.samples["pairs_transported"], float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    k = min(SCATTER_CAP, g1.size)
    ax1.plot(g1[:k], g2[:k], ".", ms=1.5, alpha=0.4)
    ax1.set_xlabel("observable (plain)")
    ax1.set_ylabel("observable (transported)")
    corr = report.extras.get("correlation", float("nan"))
    ax1.set_title(f"joint (corr = {corr:.3f}, gap = {report.ks:.4f})")
    for name in ("observable_plain", "observable_transported"):
        a = np.sort(np.asarray(report.samples[name], float))
        ax2.step(a, (np.arange(a.size) + 1.0) / a.size, where="post", label=name, lw=1.2)
    ax2.set_xlabel("observable value")
    ax2.set_ylabel("empirical CDF")
    ax2.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
