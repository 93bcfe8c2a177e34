"""Kernel families over the deformation parameter and their classical
limits: scaled traces against the phase-space integral, character-type
pairings with the unitary representation, the two-sided multiplier maps,
and conjugation covariance.

A fiber symbol ``b`` quantizes to the kernel family

    K_h(x, y) = h^{-1} b(x, -log_x(y) / h),

supported near the diagonal and shrinking with ``h``. Scaled traces
``h tr K_h`` recover the phase-space integral of the symbol exactly on
the diagonal; compositions with the unitary representation of
``exp(h Z)`` converge to the integral against the oscillatory weight
``exp(-2 pi i (p X + f))``. All derived kernels carry exact off-grid
evaluators so chart-side comparisons remain meaningful for deformation
scales far below the grid resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groupoid import (
    FiberGrid,
    FiberSymbol,
    PhaseSymbol,
    SupportOverflowError,
    _interp_rows,
    fiber_fourier_inv,
)
from .lie_group import AlgebraElement, GroupElement, group_exp, scale_algebra
from .manifold import (
    CutLocusError,
    GridManifold,
    ScalarField,
    _log_masked,
    differentiate,
    interpolate,
    riem_exp,
)
from .quantization import L2Operator, PointwiseOperator, operator_trace, unitary_rep

__all__ = [
    "ConvergenceReport",
    "GroupoidFamily",
    "groupoid_quantize",
    "perturb_family",
    "dequantize",
    "trace_functional",
    "character_pairing",
    "centralizer_apply",
    "covariant_conjugate",
    "symbol_transport",
    "compose_pointwise",
    "fit_loglog_slope",
    "richardson_limit",
]

_CHART_FRACTION = 0.45


def _unique_map(fn, xs: np.ndarray) -> np.ndarray:
    """Apply a pointwise map through the unique values of its argument.

    Kernel closures receive grid-product arrays whose slots repeat a
    grid's worth of distinct coordinates; deduplicating keeps the Newton
    inversions and spectral sums proportional to the grid size.
    """
    unique, inv = np.unique(xs, return_inverse=True)
    return np.asarray(fn(unique))[inv]


def fit_loglog_slope(h_values, errors, lower_fraction: float = 0.5) -> float:
    """Least-squares slope of log(error) against log(h) on the small-h half."""
    h = np.asarray(h_values, dtype=float)
    e = np.clip(np.asarray(errors, dtype=float), 1e-15, None)
    order = np.argsort(h)
    count = max(2, int(np.ceil(lower_fraction * h.size)))
    sel = order[:count]
    return float(np.polyfit(np.log(h[sel]), np.log(e[sel]), 1)[0])


def richardson_limit(h_values, values) -> complex:
    """Two-point first-order extrapolation to ``h = 0`` from the smallest pair."""
    h = np.asarray(h_values, dtype=float)
    v = np.asarray(values, dtype=complex)
    order = np.argsort(h)
    h1, h2 = h[order[0]], h[order[1]]
    v1, v2 = v[order[0]], v[order[1]]
    return complex(v1 + (v1 - v2) * h1 / (h2 - h1))


@dataclass(frozen=True)
class ConvergenceReport:
    """Aligned sweep data with the fitted rate and extrapolated limit."""

    label: str
    h_values: np.ndarray
    values: np.ndarray
    target: complex
    errors: np.ndarray
    fitted_slope: float
    extrapolated_limit: complex

    @classmethod
    def from_sweep(cls, label, h_values, values, target) -> "ConvergenceReport":
        h = np.asarray(h_values, dtype=float)
        v = np.asarray(values, dtype=complex)
        errors = np.abs(v - complex(target))
        return cls(
            label=label,
            h_values=h,
            values=v,
            target=complex(target),
            errors=errors,
            fitted_slope=fit_loglog_slope(h, errors),
            extrapolated_limit=richardson_limit(h, v),
        )


def _grid_log_components(m: GridManifold):
    """Tangent components of the pairwise geodesic logarithm on the grid."""
    arc = m.arclength(m.nodes)
    half = m.injectivity_radius
    s = arc[None, :] - arc[:, None]
    s = np.mod(s + half, m.total_length) - half
    mask = np.abs(s) < 0.999 * half
    return s / m.conformal.samples.real[:, None], mask


class GroupoidFamily:
    """A fiber symbol together with an h-indexed kernel family.

    ``kernel_fn(h, x, y)`` evaluates the integral kernel at arbitrary point
    pairs; dense operators on the grid are materialized lazily per ``h``
    and cached. ``quantization_tag`` distinguishes families whose kernels
    are exactly the chart pullback of the symbol (``canonical``) from
    deformed ones (``perturbed``). A family may carry a specialized
    ``grid_matrix_fn`` used to materialize the dense kernels faster than
    pointwise closure evaluation.
    """

    def __init__(self, symbol: FiberSymbol, h_values, kernel_fn,
                 quantization_tag: str = "canonical", grid_matrix_fn=None):
        self.symbol = symbol
        self.h_values = tuple(float(h) for h in h_values)
        if any(h <= 0 or h > 1 for h in self.h_values):
            raise ValueError("deformation parameters must lie in (0, 1]")
        self.kernel_fn = kernel_fn
        self.quantization_tag = quantization_tag
        self._grid_matrix_fn = grid_matrix_fn
        self._kernels: dict[float, L2Operator] = {}

    @property
    def manifold(self) -> GridManifold:
        return self.symbol.grid.manifold

    @property
    def grid(self) -> FiberGrid:
        return self.symbol.grid

    def kernel_at(self, h: float) -> L2Operator:
        h = float(h)
        if h not in self._kernels:
            m = self.manifold
            if self._grid_matrix_fn is not None:
                mat = self._grid_matrix_fn(h)
            else:
                xs = np.repeat(m.nodes, m.num_points)
                ys = np.tile(m.nodes, m.num_points)
                mat = self.kernel_fn(h, xs, ys).reshape(m.num_points, m.num_points)
            fn = self.kernel_fn
            self._kernels[h] = L2Operator(
                m, mat, kernel_fn=lambda x, y, _h=h: fn(_h, x, y)
            )
        return self._kernels[h]

    @property
    def kernels(self) -> dict[float, L2Operator]:
        return {h: self.kernel_at(h) for h in self.h_values}

    def __repr__(self) -> str:
        return (
            f"<GroupoidFamily tag={self.quantization_tag} "
            f"h={self.h_values[0]:g}..{self.h_values[-1]:g}>"
        )


def _check_support_rule(grid: FiberGrid, h_max: float, stretch: float = 1.0):
    m = grid.manifold
    sup_c = float(np.max(m.conformal.samples.real))
    reach = h_max * grid.v_cutoff * sup_c * stretch
    bound = _CHART_FRACTION * m.injectivity_radius
    if reach >= bound:
        raise SupportOverflowError(
            f"kernel reach {reach:.3g} exceeds the chart bound {bound:.3g}; "
            "shrink h, the velocity cutoff, or the transport"
        )


def _canonical_kernel_fn(b: FiberSymbol):
    m = b.grid.manifold
    band = b.grid.band

    def fn(h, xs, ys):
        xs = np.asarray(xs, dtype=float).reshape(-1)
        ys = np.asarray(ys, dtype=float).reshape(-1)
        v, ok = _log_masked(m, xs, ys)
        out = np.zeros(xs.size, dtype=complex)
        w = np.where(ok, -v / h, np.inf)
        inside = ok & (np.abs(w) < band)
        if inside.any():
            out[inside] = b.eval(xs[inside], w[inside]) / h
        return out

    return fn


def groupoid_quantize(b: FiberSymbol, h_values) -> GroupoidFamily:
    """Canonical kernel family of a fiber symbol.

    Kernels are the chart pullback ``K_h(x, y) = h^{-1} b(x, -log_x(y)/h)``;
    the support-radius rule guarantees every evaluation stays inside the
    chart for the largest swept ``h``.
    """
    hs = sorted(float(h) for h in h_values)
    if not hs:
        raise ValueError("empty deformation grid")
    _check_support_rule(b.grid, hs[-1])

    m = b.grid.manifold
    comp, mask = _grid_log_components(m)

    def grid_matrix(h):
        return b.eval_on_grid_rows(-comp / h, mask) / h

    return GroupoidFamily(
        b,
        sorted(hs, reverse=True),
        _canonical_kernel_fn(b),
        quantization_tag="canonical",
        grid_matrix_fn=grid_matrix,
    )


def perturb_family(fam: GroupoidFamily, modulation) -> GroupoidFamily:
    """Multiply the kernels by ``1 + h r(x, y)`` for a bounded smooth ``r``.

    The symbol slot is unchanged: the perturbation vanishes in the limit,
    so the scaled traces converge to the same target but only at first
    order, which turns the trace identity into a genuine limit.
    """
    inner = fam.kernel_fn

    def fn(h, xs, ys):
        xs = np.asarray(xs, dtype=float).reshape(-1)
        ys = np.asarray(ys, dtype=float).reshape(-1)
        return inner(h, xs, ys) * (1.0 + h * modulation(xs, ys))

    return GroupoidFamily(fam.symbol, fam.h_values, fn, quantization_tag="perturbed")


def dequantize(op: L2Operator, h: float, grid: FiberGrid) -> FiberSymbol:
    """Chart-side datum of a kernel: ``b_h(x, v) = h K(x, exp_x(-h v))``.

    Prefers the exact kernel evaluator when the operator carries one; a
    plain grid matrix falls back to spectral interpolation of its rows,
    which is only meaningful while the kernel is resolved by the grid.
    """
    m = grid.manifold
    sup_c = float(np.max(m.conformal.samples.real))
    if h * grid.v_cutoff * sup_c >= _CHART_FRACTION * m.injectivity_radius:
        raise CutLocusError("velocity grid leaves the chart at this h")
    xs = np.repeat(m.nodes, grid.fiber_points)
    vs = np.tile(grid.v_nodes, m.num_points)
    ys = riem_exp(m, xs, -h * vs)
    if op.kernel_fn is not None:
        vals = h * op.kernel_fn(xs, ys)
    else:
        vals = np.empty(xs.size, dtype=complex)
        for i in range(m.num_points):
            row = ScalarField(m, op.kernel[i])
            sl = slice(i * grid.fiber_points, (i + 1) * grid.fiber_points)
            vals[sl] = h * row(ys[sl])
    return FiberSymbol(grid, vals.reshape(m.num_points, grid.fiber_points))


def trace_functional(fam: GroupoidFamily) -> ConvergenceReport:
    """Scaled kernel traces against the phase-space integral of the symbol.

    The target is the fiber transform at zero velocity integrated over the
    manifold, which equals the phase-space integral of the symbol against
    ``dp dx``.
    """
    m = fam.manifold
    zero_col = fam.grid.fiber_points // 2
    target = complex(np.sum(fam.symbol.values[:, zero_col] * m.weights))
    values = [float(h) * operator_trace(fam.kernel_at(h)) for h in fam.h_values]
    return ConvergenceReport.from_sweep("trace", fam.h_values, values, target)


def _rep_at(z: AlgebraElement, h: float) -> tuple[GroupElement, PointwiseOperator]:
    elem = group_exp(scale_algebra(z, h))
    return elem, unitary_rep(h, elem)


def compose_pointwise(rep: PointwiseOperator, op: L2Operator) -> L2Operator:
    """Left composition of the lazy unitary with an integral kernel."""
    return rep.compose_left(op)


def character_pairing(fam: GroupoidFamily, z: AlgebraElement) -> ConvergenceReport:
    """Scaled traces of the unitary of ``exp(hZ)`` against the kernel slices.

    The target is the phase-space quadrature of the symbol against
    ``exp(-2 pi i (p X(x) + f(x)))`` with Liouville weights; the per-h
    value applies the lazy unitary to the kernel rows and takes the
    diagonal quadrature of the composition.
    """
    m = fam.manifold
    grid = fam.grid
    a_sym = fiber_fourier_inv(fam.symbol)
    x_at = np.real(z.field.samples)
    f_at = np.real(z.func.samples)
    phases = np.exp(-2j * np.pi * (np.outer(x_at, grid.p_nodes) + f_at[:, None]))
    cell = grid.p_step * m.circumference / m.num_points
    target = complex(np.sum(a_sym.values * phases) * cell)

    values = []
    for h in fam.h_values:
        _, rep = _rep_at(z, h)
        sigma = rep.shift(m.nodes)
        front = rep.multiplier_at(m.nodes) * rep.scale_at(m.nodes)
        diag = front * fam.kernel_fn(h, sigma, m.nodes)
        values.append(float(h) * complex(np.sum(diag * m.weights)))
    return ConvergenceReport.from_sweep("character", fam.h_values, values, target)


def _shift_symbol(z: AlgebraElement, b: FiberSymbol) -> FiberSymbol:
    """Fiber-side multiplier action: phase by ``f`` and velocity shift by ``X``."""
    m = b.grid.manifold
    x_at = np.real(z.field.samples)
    f_at = np.real(z.func.samples)
    shifted = b.eval_on_grid_rows(b.grid.v_nodes[None, :] - x_at[:, None])
    return FiberSymbol(b.grid, np.exp(-2j * np.pi * f_at)[:, None] * shifted)


def centralizer_apply(side: str, z: AlgebraElement, fam: GroupoidFamily) -> GroupoidFamily:
    """One side of the multiplier pair attached to an algebra element.

    The symbol slot is multiplied by the oscillatory weight
    ``exp(-2 pi i (p X + f))``, realized on the fiber side as a phase and
    a velocity shift; the kernel slot is composed with the unitary of
    ``exp(hZ)`` on the chosen side.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    new_symbol = _shift_symbol(z, fam.symbol)
    inner = fam.kernel_fn
    reps: dict[float, tuple[GroupElement, PointwiseOperator]] = {}

    def rep_for(h):
        if h not in reps:
            reps[h] = _rep_at(z, h)
        return reps[h]

    if side == "left":
        def fn(h, xs, ys):
            xs = np.asarray(xs, dtype=float).reshape(-1)
            ys = np.asarray(ys, dtype=float).reshape(-1)
            _, rep = rep_for(h)
            front = _unique_map(
                lambda u: rep.multiplier_at(u) * rep.scale_at(u), xs
            )
            moved = _unique_map(rep.shift, xs)
            return front * inner(h, moved, ys)
    else:
        def fn(h, xs, ys):
            xs = np.asarray(xs, dtype=float).reshape(-1)
            ys = np.asarray(ys, dtype=float).reshape(-1)
            elem, rep = rep_for(h)
            moved = _unique_map(elem.diffeo, ys)
            back = _unique_map(
                lambda u: rep.multiplier_at(u) / rep.scale_at(u), moved
            )
            return inner(h, xs, moved) * back

    return GroupoidFamily(new_symbol, fam.h_values, fn, quantization_tag="perturbed")


def symbol_transport(a: GroupElement, sym: PhaseSymbol) -> PhaseSymbol:
    """Phase-space pushforward of a symbol by a group element.

    The transported symbol evaluates the original at the pulled-back
    covector: base ``phi^{-1}(x)``, momentum ``(p + f'(x)) phi'(phi^{-1}(x))``.
    """
    m = a.manifold
    grid = sym.grid
    xq = a.diffeo.inverse_at(m.nodes)
    jac = a.diffeo.jacobian_at(xq)
    fprime = np.real(differentiate(a.func).samples)
    p_targets = (grid.p_nodes[None, :] + fprime[:, None]) * jac[:, None]
    # The dual grid represents symbols periodically in momentum, so the
    # essential dual support stretched by the Jacobian and shifted by the
    # phase gradient must stay inside the window or it would alias.
    peak = float(np.abs(sym.values).max())
    alive = np.abs(sym.values).max(axis=0) > 1e-12 * max(peak, 1e-300)
    support_p = float(np.abs(grid.p_nodes[alive]).max()) if alive.any() else 0.0
    needed = support_p * float(np.max(jac)) + float(np.max(np.abs(fprime)))
    half_window = 0.5 * grid.fiber_points * grid.p_step
    if needed > half_window:
        raise SupportOverflowError(
            "transported dual support leaves the momentum window; enlarge "
            "fiber_points or soften the group element"
        )
    vals = _eval_phase_rows(sym, xq, p_targets)
    return PhaseSymbol(grid, vals)


def _eval_phase_rows(sym: PhaseSymbol, x_rows, p_matrix) -> np.ndarray:
    """Evaluate a phase symbol on one momentum row per base point."""
    grid = sym.grid
    m = grid.manifold
    fiber = sym._fiber_values()
    rows = _interp_rows(fiber, m.circumference, x_rows)
    out = np.empty(p_matrix.shape, dtype=complex)
    step = max(1, 8192 // grid.fiber_points)
    for start in range(0, p_matrix.shape[0], step):
        sl = slice(start, start + step)
        phases = np.exp(-2j * np.pi * p_matrix[sl][:, :, None]
                        * grid.v_nodes[None, None, :])
        out[sl] = np.einsum("qj,qkj->qk", rows[sl], phases)
    return grid.v_step * m.conformal_at(np.asarray(x_rows, dtype=float))[:, None] * out


def covariant_conjugate(a: GroupElement, fam: GroupoidFamily, h: float) -> L2Operator:
    """Conjugate one kernel slice by the unitary of ``a``.

    The conjugated kernel is ``exp(-2 pi i (f(x) - f(y))/h)`` times the
    geometric mean of the measure densities at both slots times the
    original kernel at the pulled-back pair.
    """
    m = fam.manifold
    jac_min = float(np.min(a.diffeo._jacobian.samples.real))
    _check_support_rule(fam.grid, float(h), stretch=1.0 / jac_min)
    rep = unitary_rep(h, a)
    inner = fam.kernel_fn

    def fn(xs, ys):
        xs = np.asarray(xs, dtype=float).reshape(-1)
        ys = np.asarray(ys, dtype=float).reshape(-1)
        fx = _unique_map(lambda u: np.real(interpolate(a.func, u)), xs)
        fy = _unique_map(lambda u: np.real(interpolate(a.func, u)), ys)
        phase = np.exp(-2j * np.pi * (fx - fy) / h)
        dens = _unique_map(rep.scale_at, xs) * _unique_map(rep.scale_at, ys)
        return phase * dens * inner(
            h, _unique_map(a.diffeo.inverse_at, xs), _unique_map(a.diffeo.inverse_at, ys)
        )

    xs = np.repeat(m.nodes, m.num_points)
    ys = np.tile(m.nodes, m.num_points)
    mat = fn(xs, ys).reshape(m.num_points, m.num_points)
    return L2Operator(m, mat, kernel_fn=fn)
