"""Figures for reports. Everything renders to files through the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_suite_residuals", "plot_bounds", "plot_coefficients", "plot_hankel_decay"]

STYLE = {"figure.figsize": (6.4, 4.0), "axes.grid": True, "grid.alpha": 0.3, "font.size": 9}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_suite_residuals(report, path) -> Path:
    """Residual of every check with a tolerance, against that tolerance (log scale)."""
    rows = [c for c in report.checks if c.residual is not None and c.tolerance and not c.skipped]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.0, max(3.0, 0.16 * len(rows) + 1)))
        y = np.arange(len(rows))
        res = np.array([max(c.residual, 1e-18) for c in rows])
        tol = np.array([c.tolerance for c in rows])
        colors = ["tab:green" if c.passed else "tab:red" for c in rows]
        ax.scatter(res, y, c=colors, s=14, zorder=3, label="residual")
        ax.scatter(tol, y, marker="|", c="k", s=60, zorder=2, label="tolerance")
        ax.set_xscale("log")
        ax.set_yticks(y)
        ax.set_yticklabels([c.id for c in rows], fontsize=5)
        ax.invert_yaxis()
        ax.set_xlabel("residual")
        ax.legend(loc="lower right", fontsize=7)
        ax.set_title(f"{report.suite}: {report.summary['pass']} pass, {report.summary['fail']} fail")
        return _save(fig, path)


def plot_bounds(tables, path) -> Path:
    """S(X) = sum |a_f(n; a)|^2 per cusp on log-log axes, with the reference bound."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for t in tables:
            ax.loglog(t.X, t.S, marker="o", ms=3, label=f"{t.form} at {t.cusp} (slope {t.slope:.3f})")
            ax.loglog(t.X, t.bound, ls="--", lw=0.8, color=ax.lines[-1].get_color())
        ax.set_xlabel("X")
        ax.set_ylabel("sum of |a(n; cusp)|^2 for n <= X")
        ax.set_title("average size of cusp coefficients (dashed: bound, theta = 7/64, constant 1)")
        ax.legend(fontsize=6)
        return _save(fig, path)


def plot_coefficients(n, reference, candidate, path, title: str = "", labels=("oracle", "product formula")) -> Path:
    """|a(n)| from two provenances and their relative difference."""
    n = np.asarray(n)
    ref = np.asarray(reference, dtype=complex)
    cand = np.asarray(candidate, dtype=complex)
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.0))
        ax1.plot(n, np.abs(ref), "o", ms=4, mfc="none", label=labels[0])
        ax1.plot(n, np.abs(cand), "x", ms=4, label=labels[1])
        ax1.set_ylabel("|a(n; cusp)|")
        ax1.legend(fontsize=7)
        ax1.set_title(title)
        ok = np.isfinite(cand)
        scale = np.maximum(np.abs(ref), 1e-300)
        diff = np.abs(cand - ref) / scale
        ax2.semilogy(n[ok], np.maximum(diff[ok], 1e-18), ".", ms=5)
        ax2.set_xlabel("n")
        ax2.set_ylabel("relative difference")
        return _save(fig, path)


def plot_hankel_decay(ys, values, path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(ys, np.maximum(np.abs(values), 1e-18), lw=0.8)
        ax.set_xlabel("y")
        ax.set_ylabel("|H F(y)|")
        ax.set_title(title)
        return _save(fig, path)
