"""Tabular and graphical output for convergence reports.

Tables are RFC-4180 CSV with '.' decimals and CRLF line endings: one row
per deformation value, then a ``fit`` footer row carrying the fitted
log-log slope (in ``value_real``) and the extrapolated limit (in the
target columns). Figures are log-log error plots with a guide line of the
fitted slope, written as PNG next to the table.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["CSV_HEADER", "write_convergence_csv", "render_convergence_figure"]

CSV_HEADER = ("h", "value_real", "value_imag", "target_real", "target_imag",
              "abs_error")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_convergence_csv(report, path: str) -> None:
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(CSV_HEADER)
        for h, value, err in zip(report.h_values, report.values, report.errors):
            writer.writerow([
                _fmt(h), _fmt(value.real), _fmt(value.imag),
                _fmt(report.target.real), _fmt(report.target.imag), _fmt(err),
            ])
        extrap = report.extrapolated_limit
        writer.writerow([
            "fit", _fmt(report.fitted_slope), "",
            _fmt(extrap.real), _fmt(extrap.imag),
            _fmt(abs(extrap - report.target)),
        ])


def render_convergence_figure(report, path: str) -> None:
    h = np.asarray(report.h_values, dtype=float)
    err = np.clip(np.asarray(report.errors, dtype=float), 1e-17, None)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(h, err, "o-", color="#1f6fb4", label="error")
    anchor = np.argmin(h)
    guide = err[anchor] * (h / h[anchor]) ** report.fitted_slope
    ax.loglog(h, guide, "--", color="#888888",
              label=f"slope {report.fitted_slope:.2f}")
    ax.set_xlabel("deformation parameter h")
    ax.set_ylabel("absolute error")
    ax.set_title(f"{report.label}: convergence to the classical limit")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
