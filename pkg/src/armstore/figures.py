"""Render simulation telemetry as figures next to the CSV output."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_memory_dynamics(snapshots, path) -> None:
    """Remembered fraction and mean strength against the logical clock."""
    steps = [s.step for s in snapshots]
    fig, ax = plt.subplots(figsize=(7, 4.3))
    ax.plot(steps, [s.remembered_fraction for s in snapshots], label="remembered fraction")
    ax.plot(steps, [s.mean_strength for s in snapshots], label="mean strength")
    ax.set_xlabel("step")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="best")
    ax.set_title("memory dynamics")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_stale_norms(snapshots, path) -> None:
    """Aggregate l2 norm of unremembered effective vectors over time."""
    steps = [s.step for s in snapshots]
    fig, ax = plt.subplots(figsize=(7, 4.3))
    ax.plot(steps, [s.stale_norm_sum for s in snapshots], color="tab:red")
    ax.set_xlabel("step")
    ax.set_ylabel("stale norm sum")
    ax.set_title("forgetting pressure")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_latency(latencies, path) -> None:
    """Per-step retrieval and update cost in microseconds."""
    steps = [r.step for r in latencies]
    fig, ax = plt.subplots(figsize=(7, 4.3))
    ax.plot(steps, [r.retrieval_micros for r in latencies], label="retrieval", alpha=0.8)
    ax.plot(steps, [r.update_micros for r in latencies], label="update", alpha=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("microseconds")
    ax.set_yscale("log")
    ax.legend(loc="best")
    ax.set_title("per-query cost")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(snapshots, latencies, out_dir) -> list[str]:
    """Write the standard figure set into ``out_dir``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if snapshots:
        dynamics = os.path.join(out_dir, "memory_dynamics.png")
        plot_memory_dynamics(snapshots, dynamics)
        written.append(dynamics)
        stale = os.path.join(out_dir, "stale_norms.png")
        plot_stale_norms(snapshots, stale)
        written.append(stale)
    if latencies:
        latency = os.path.join(out_dir, "latency.png")
        plot_latency(latencies, latency)
        written.append(latency)
    return written
