"""Matplotlib figures for the report verb (Agg backend, no display needed)."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_COLORS = {"PASS": "tab:green", "EQUALITY": "tab:blue", "FAIL": "tab:red", "SKIPPED": "tab:gray"}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # fixed metadata keeps the PNG bytes reproducible
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_slacks(rows: list[dict], path: Path) -> Path:
    """Signed slack ``rhs - lhs`` per check row on a symlog axis."""
    rows = [r for r in rows if isinstance(r["slack"], float) and math.isfinite(r["slack"])]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.22 * len(rows) + 1)))
    y = range(len(rows))
    ax.barh(list(y), [r["slack"] for r in rows], color=[_COLORS[r["verdict"]] for r in rows])
    ax.set_yticks(list(y), [f"{r['item']}:{r['check']}" for r in rows], fontsize=6)
    ax.set_xscale("symlog", linthresh=1e-8)
    ax.axvline(0.0, color="k", lw=0.6)
    ax.invert_yaxis()
    ax.set_xlabel("slack (rhs - lhs)")
    return _save(fig, path)


def plot_sweep(sweep_id: str, rows: list[dict], path: Path) -> Path:
    x = [r["parameter"] for r in rows]
    v = [r["value"] if math.isfinite(r["value"]) else math.nan for r in rows]
    e = [r["error"] if math.isfinite(r["error"]) else 0.0 for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(x, v, yerr=e, marker="o", ms=3, capsize=2)
    for xi, r in zip(x, rows):
        if math.isinf(r["value"]):
            ax.axvline(xi, color="tab:red", ls=":", lw=0.8)
    ax.set_xlabel("parameter")
    ax.set_ylabel("value")
    ax.set_title(sweep_id)
    return _save(fig, path)


def plot_solve(run_id: str, result, path: Path) -> Path:
    grid = result.grid
    x = grid.axes[0]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.5))
    it = [t["iter"] for t in result.trace]
    a1.semilogy(it, [max(t["residual_sup"], 1e-300) for t in result.trace], label="sup")
    a1.semilogy(it, [max(t["residual_l1"], 1e-300) for t in result.trace], label="L1")
    a1.set_xlabel("iteration")
    a1.set_title(f"{run_id} residual")
    a1.legend()
    fit = result.fitted_quadratic()
    a2.plot(x, grid.values, label="psi")
    a2.plot(x, 0.5 * fit["a"] * x ** 2 + fit["c"], "--", label="fitted a x^2/2 + c")
    a2.set_xlabel("x" if result.dim == 1 else "r")
    a2.legend()
    return _save(fig, path)
