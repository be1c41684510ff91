"""Figure rendering for the experiment runners.

Every runner writes one PNG next to its CSV tables.  The Agg backend is
forced so the CLI works headless.
"""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(fields_by_eps, path, title="penalized well minimizers"):
    """Overlay the minimizers of an eps sweep (the sharpening-dip picture)."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for eps, fld in fields_by_eps:
        ax.plot(fld.mesh.nodes, fld.values, label=f"eps = {eps:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("v")
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, path)


def save_recovery_figure(rows, fields_by_eps, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for eps, fld in fields_by_eps:
        ax1.plot(fld.mesh.nodes, fld.values, lw=0.9, label=f"eps = {eps:g}")
    ax1.set_xlabel("x")
    ax1.set_ylabel("w")
    ax1.set_title("recovery fields")
    ax1.legend(fontsize=8)
    eps = [r.eps for r in rows]
    ax2.semilogx(eps, [r.discrete_energy for r in rows], "o-", label="discrete energy")
    ax2.semilogx(eps, [r.limit_energy + r.mu for r in rows], "--", label="limit + mu")
    ax2.semilogx(eps, [r.graph_distance for r in rows], "s-", label="graph distance")
    ax2.set_xlabel("eps")
    ax2.invert_xaxis()
    ax2.legend(fontsize=8)
    ax2.set_title("energy and graph distance")
    _save(fig, path)


def save_kwc_figure(g, u, v, path):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(g.mesh.nodes, g.values, color="0.6", lw=1.0, label="data g")
    ax.plot(u.mesh.nodes, u.values, lw=1.4, label="u")
    ax.plot(v.mesh.nodes, v.values, lw=1.4, label="v")
    ax.set_xlabel("x")
    ax.set_title("alternating KWC minimization")
    ax.legend(fontsize=8)
    _save(fig, path)


def save_unfold_figure(field, curve, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(field.mesh.nodes, field.values, lw=1.2)
    ax1.set_xlabel("x")
    ax1.set_ylabel("u")
    ax1.set_title("graph")
    ax2.plot(curve.s, curve.U, lw=1.2, label="U(s)")
    ax2.plot(curve.s, curve.xs, lw=1.0, ls="--", label="x(s)")
    ax2.set_xlabel("s")
    ax2.set_title("arc-length unfolding")
    ax2.legend(fontsize=8)
    _save(fig, path)
