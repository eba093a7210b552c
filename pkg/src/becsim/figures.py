"""Matplotlib renderings of the delimited outputs.

Every report run drops a PNG next to its CSV so results can be eyeballed
without loading the data elsewhere. Pure presentation; no physics here.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_series(series, path, title: str = "") -> None:
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    axes[0].plot(series.t, series.alpha, color="tab:blue")
    axes[0].set_ylabel("contrast")
    axes[1].plot(series.t, series.purity, color="tab:orange")
    axes[1].set_ylabel("purity")
    axes[2].plot(series.t, series.n, color="tab:green")
    axes[2].set_ylabel("n")
    axes[2].set_xlabel("t [s]")
    if title:
        axes[0].set_title(title)
    _save(fig, path)


def render_ensemble(ens, path, meanfield=None) -> None:
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    axes[0].errorbar(ens.t, ens.alpha_mean, yerr=ens.alpha_se, lw=1.0, elinewidth=0.5,
                     color="tab:blue", label="trajectories")
    axes[1].plot(ens.t, (ens.s_x**2 + ens.s_y**2 + ens.s_z**2) / np.maximum(ens.n_mean, 1e-12) ** 2,
                 color="tab:orange", label="ensemble purity")
    axes[2].errorbar(ens.t, ens.n_mean, yerr=ens.n_se, color="tab:green", lw=1.0, elinewidth=0.5)
    if meanfield is not None:
        axes[0].plot(meanfield.t, meanfield.alpha, "k--", lw=1.0, label="mean field")
        axes[1].plot(meanfield.t, meanfield.purity, "k--", lw=1.0, label="mean field")
        axes[2].plot(meanfield.t, meanfield.n, "k--", lw=1.0)
    axes[0].set_ylabel("contrast")
    axes[0].legend(loc="best", fontsize=8)
    axes[1].set_ylabel("purity")
    axes[1].legend(loc="best", fontsize=8)
    axes[2].set_ylabel("n")
    axes[2].set_xlabel("t [s]")
    _save(fig, path)


def render_scan(rows, path) -> None:
    """rows: (x_label, x_values, alpha_values) per curve."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, x, y in rows:
        ax.plot(x, y, lw=1.2, label=label)
    ax.set_xscale("log")
    ax.set_xlabel(rows[0][0] if rows else "")
    ax.set_ylabel("contrast")
    if len(rows) > 1:
        ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def render_response_curve(omega, response, path, label: str = "") -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(omega, response, lw=1.2, label=label or None)
    ax.set_xlabel("omega [1/s]")
    ax.set_ylabel("response")
    if label:
        ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def render_response_surface(surface, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    mesh = ax.pcolormesh(
        surface.t1_inv, surface.j0, surface.response, shading="auto", cmap="viridis"
    )
    fig.colorbar(mesh, ax=ax, label="response")
    ax.set_xlabel("1/T1 [1/s]")
    ax.set_ylabel("J0 [1/s]")
    _save(fig, path)


def render_fixedpoints(points, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    colors = {"attractive": "tab:green", "repulsive": "tab:red",
              "saddle": "tab:orange", "elliptic": "tab:blue"}
    theta = np.linspace(0, 2 * np.pi, 200)
    ax.plot(np.cos(theta), np.sin(theta), color="0.8", lw=0.8)
    for fp in points:
        x, y, z = fp.direction
        ax.scatter([x], [y], s=80 if z >= 0 else 40,
                   color=colors.get(fp.stability, "k"),
                   marker="o" if z >= 0 else "x",
                   label=f"{fp.stability} (z={z:+.2f})")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.set_aspect("equal")
    ax.set_xlabel("s_x / n")
    ax.set_ylabel("s_y / n")
    ax.legend(loc="upper right", fontsize=7)
    _save(fig, path)


def render_histograms(dists, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].bar(dists.sz_values, dists.sz_prob,
                width=0.45 if len(dists.sz_values) > 1 else 0.9, color="tab:blue")
    axes[0].set_xlabel("s_z")
    axes[0].set_ylabel("probability")
    axes[1].bar(dists.phi_centers, dists.phi_prob,
                width=2 * np.pi / max(len(dists.phi_centers), 1), color="tab:orange")
    axes[1].set_xlabel("phi")
    axes[1].set_ylabel("probability")
    _save(fig, path)


def render_husimi(grid, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(grid.phi, grid.theta, grid.q, shading="auto", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="Q")
    ax.set_xlabel("phi")
    ax.set_ylabel("theta")
    ax.invert_yaxis()
    _save(fig, path)


def render_adiabatic(adia, path) -> None:
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(adia.t, adia.n, color="tab:green")
    axes[0].set_ylabel("n")
    axes[1].plot(adia.t, adia.alpha, color="tab:blue")
    axes[1].set_ylabel("contrast")
    axes[1].set_xlabel("t [s]")
    if adia.branch_lost and adia.t_loss is not None:
        for ax in axes:
            ax.axvline(adia.t_loss, color="tab:red", ls="--", lw=0.8)
    _save(fig, path)
