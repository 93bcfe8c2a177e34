"""Convergence experiments: one delimited row per deformation value with a
fitted footer, and a log-log error figure rendered next to the table."""

from __future__ import annotations

import os

import numpy as np

from . import groupoid as gp
from . import presets
from . import semiclassics as sc
from .config import ExperimentConfig, UnknownSuiteError
from .manifold import TangentPoint
from .report import render_convergence_figure, write_convergence_csv

__all__ = ["EXPERIMENT_NAMES", "run_experiment", "sweep"]

EXPERIMENT_NAMES = ("trace", "character", "covariance", "haar")


def _grid(cfg: ExperimentConfig) -> gp.FiberGrid:
    m = presets.make_manifold(cfg.num_points, cfg.circumference, cfg.conformal)
    return gp.FiberGrid(m, cfg.velocity_cutoff, cfg.fiber_points)


def _trace(cfg: ExperimentConfig) -> sc.ConvergenceReport:
    grid = _grid(cfg)
    symbol = presets.make_symbol(grid, cfg.symbol_preset)
    fam = sc.groupoid_quantize(symbol, cfg.h_values)
    return sc.trace_functional(fam)


def _character(cfg: ExperimentConfig) -> sc.ConvergenceReport:
    grid = _grid(cfg)
    symbol = presets.make_symbol(grid, cfg.symbol_preset)
    fam = sc.groupoid_quantize(symbol, cfg.h_values)
    z = presets.make_algebra_element(grid.manifold, cfg.algebra_preset)
    return sc.character_pairing(fam, z)


def _covariance(cfg: ExperimentConfig) -> sc.ConvergenceReport:
    grid = _grid(cfg)
    # The narrow profile leaves room for the Jacobian stretch of the
    # transported symbol inside the truncation band.
    symbol = presets.make_symbol(grid, "gauss_narrow")
    fam = sc.groupoid_quantize(symbol, cfg.h_values)
    mover = presets.make_group_element(grid.manifold, cfg.group_preset)
    transported = gp.fiber_fourier(
        sc.symbol_transport(mover, gp.fiber_fourier_inv(symbol)))
    values = []
    for h in cfg.h_values:
        conj = sc.covariant_conjugate(mover, fam, h)
        gap = sc.dequantize(conj, h, grid).values - transported.values
        values.append(float(np.max(np.abs(gap))))
    return sc.ConvergenceReport.from_sweep("covariance", cfg.h_values, values, 0.0)


def _haar(cfg: ExperimentConfig) -> sc.ConvergenceReport:
    grid = _grid(cfg)
    m = grid.manifold
    x_ref = float(m.nodes[m.num_points // 3])
    width = 0.5 * grid.v_cutoff

    def boundary_fn(p):
        return presets.bump_profile(np.array([p.payload.component]), width)[0]

    target = gp.haar_integral(boundary_fn, 0.0, x_ref, grid)
    values = []
    for h in cfg.haar_h_values:
        def interior_fn(pt):
            xi, yi = pt.payload
            vv, ok = gp._log_masked(m, np.array([xi]), np.array([yi]))
            if not ok[0]:
                return 0.0
            val = presets.bump_profile(np.array([-vv[0] / pt.h]), width)[0]
            return val * (1.0 + pt.h * np.sin(yi))
        values.append(gp.haar_integral(interior_fn, h, x_ref, grid))
    return sc.ConvergenceReport.from_sweep("haar", cfg.haar_h_values, values, target)


_EXPERIMENTS = {
    "trace": _trace,
    "character": _character,
    "covariance": _covariance,
    "haar": _haar,
}


def run_experiment(name: str, cfg: ExperimentConfig) -> sc.ConvergenceReport:
    if name not in _EXPERIMENTS:
        raise UnknownSuiteError(
            f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENT_NAMES)}"
        )
    return _EXPERIMENTS[name](cfg)


def sweep(name: str, cfg: ExperimentConfig,
          out_dir: str | None = None) -> tuple[sc.ConvergenceReport, str, str]:
    """Run one experiment and write its CSV table and log-log figure.

    Returns the report along with the paths of the two files.
    """
    report = run_experiment(name, cfg)
    target_dir = out_dir if out_dir is not None else cfg.output
    os.makedirs(target_dir, exist_ok=True)
    csv_path = os.path.join(target_dir, f"{name}.csv")
    fig_path = os.path.join(target_dir, f"{name}.png")
    write_convergence_csv(report, csv_path)
    render_convergence_figure(report, fig_path)
    return report, csv_path, fig_path
