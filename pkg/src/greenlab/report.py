"""Figure rendering for the report path.

Each renderer takes already-computed arrays and writes one PNG next to the
delimited output it illustrates.  Figures are diagnostics; the CSV/JSON
files remain the machine-readable contract.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 140


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def heat_column_figure(path, dist, values, t, envelope=None):
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    pos = values > 0
    ax.semilogy(dist[pos], values[pos], ".", ms=2, alpha=0.4, label=f"p_t, t={t:g}")
    if envelope is not None:
        dd = np.linspace(0, max(dist.max(), 1e-9), 200)
        ax.semilogy(dd, envelope(t, dd), "k-", lw=1, label="Gaussian envelope")
    ax.set_xlabel("distance from base point")
    ax.set_ylabel("heat column")
    ax.legend(frameon=False)
    _save(fig, path)


def green_figure(path, dist, g_heat, g_solve, h):
    fig, axes = plt.subplots(1, 2, figsize=(8.6, 3.6))
    sel = dist > 0
    axes[0].loglog(dist[sel], g_heat[sel], ".", ms=2, alpha=0.35, label="quadrature")
    axes[0].loglog(dist[sel], g_solve[sel], ".", ms=2, alpha=0.35, label="direct solve")
    dd = np.geomspace(max(dist[sel].min(), 1e-3), dist.max(), 100)
    axes[0].loglog(dd, 1 / (4 * np.pi * dd), "k-", lw=1, label="1/(4 pi d)")
    axes[0].set_xlabel("d")
    axes[0].set_ylabel("G")
    axes[0].legend(frameon=False, fontsize=8)
    win = sel & (dist > 2 * h)
    axes[1].plot(dist[win], 4 * np.pi * dist[win] * g_heat[win], ".", ms=2, alpha=0.4)
    axes[1].axhline(1.0, color="k", lw=1)
    axes[1].set_xlabel("d")
    axes[1].set_ylabel("4 pi d G (quadrature)")
    _save(fig, path)


def kato_figure(path, r, c_r):
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.loglog(r, c_r, "o-", ms=4, label="C(r, y)")
    ax.loglog(r, 1 / (4 * np.pi * np.sqrt(r)), "k--", lw=1,
              label=r"$1/(4\pi\sqrt{r})$")
    ax.set_xlabel("r")
    ax.set_ylabel("C(r, y)")
    ax.legend(frameon=False)
    _save(fig, path)


def sweep_figure(path, kappas, e0, bound, reference=None):
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    kk = np.asarray(kappas)
    ax.plot(kk, e0, "o-", ms=4, label="E0")
    ax.plot(kk, bound, "r--", lw=1, label="stability bound")
    if reference is not None:
        ax.plot(kk, reference, "k:", lw=1, label="hydrogen reference")
    ax.set_xlabel("kappa")
    ax.set_ylabel("energy")
    ax.legend(frameon=False)
    _save(fig, path)


def sobolev_figure(path, labels, ratios):
    fig, ax = plt.subplots(figsize=(6.2, 3.6))
    x = np.arange(len(ratios))
    ax.bar(x, ratios)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=70, fontsize=6)
    ax.set_ylabel("(sum w h^6)^{1/3} / q_d(h)")
    _save(fig, path)


def smoothing_figure(path, rows):
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    t = [r[0] for r in rows]
    ax.plot(t, [r[1] for r in rows], "o-", ms=4, label="sup norm")
    ax.plot(t, [r[2] for r in rows], "s--", ms=4, label="L2 norm")
    ax.set_xlabel("t")
    ax.set_ylabel("norm of shifted semigroup image")
    ax.legend(frameon=False)
    _save(fig, path)
