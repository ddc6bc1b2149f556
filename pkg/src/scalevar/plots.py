"""Figure rendering for solver output and convergence sweeps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_solution(t, values, theta, outfile):
    """Solution components and residual magnitude over time."""
    values = np.asarray(values)
    theta = np.asarray(theta)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for i in range(values.shape[1]):
        ax1.plot(t, values[:, i].real, label=f"Re x[{i}]")
        if np.max(np.abs(values[:, i].imag)) > 1e-14:
            ax1.plot(t, values[:, i].imag, "--", label=f"Im x[{i}]")
    ax1.set_ylabel("x(t)")
    ax1.legend(loc="best", fontsize=8)
    ax2.semilogy(t, np.maximum(np.abs(theta).max(axis=1), 1e-18))
    ax2.set_xlabel("t")
    ax2.set_ylabel("|residual|")
    fig.tight_layout()
    fig.savefig(outfile, dpi=120, metadata={"Date": None})
    plt.close(fig)


def plot_sweep(eps, errors, order, outfile):
    """Log-log error-versus-step plot with the fitted slope."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(eps, np.maximum(errors, 1e-18), "o-", label="sup error")
    if order is not None and np.all(errors > 0):
        ref = errors[0] * (eps / eps[0]) ** order
        ax.loglog(eps, ref, "k--", lw=0.8, label=f"slope {order:.2f}")
    ax.set_xlabel("step")
    ax.set_ylabel("error")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(outfile, dpi=120, metadata={"Date": None})
    plt.close(fig)
