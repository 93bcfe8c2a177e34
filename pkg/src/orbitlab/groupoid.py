"""Convolution structures over the pair groupoid and the tangent bundle,
glued by the deformation chart built on the geodesic exponential.

Symbols on phase space are stored through their fiberwise Fourier
transform on velocity space: the fiber measure carries the metric density
``c(x) dv`` while the dual measure carries ``dp / c(x)``, so that the
phase-space integral against d p d x splits as fiber integrals against
the Riemannian measure. With ``M`` velocity and momentum nodes in exact
reciprocity (``2 V dp = 1``) the discrete transforms form a unitary pair
and round-trip to machine precision.

The deformation chart sends ``(h, v at x)`` to the pair ``(x,
exp_x(-h v))`` for ``h > 0`` and is the identity on the tangent bundle at
``h = 0``; its Haar weights are the fiber measure at the boundary and
``h^{-1}`` times the Riemannian measure in the interior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lie_group import Diffeo, VectorField, flow
from .manifold import (
    GridManifold,
    ScalarField,
    TangentPoint,
    _eval_table,
    _log_masked,
    _mode_table,
    differentiate,
    riem_exp,
    riem_log,
)
from .quantization import L2Operator

__all__ = [
    "GridMismatchError",
    "SupportOverflowError",
    "FiberGrid",
    "FiberSymbol",
    "PhaseSymbol",
    "TangentGroupoidPoint",
    "fiber_fourier",
    "fiber_fourier_inv",
    "pair_convolve",
    "fiber_convolve",
    "deformation_chart",
    "deformation_chart_inverse",
    "haar_integral",
    "DiffeoFamily",
    "extend_diffeo",
    "extend_scalar",
]

# Fiber data below this magnitude counts as zero for support bookkeeping.
_SUPPORT_TOL = 1e-12
_BAND_FRACTION = 0.9
_CHUNK = 4096


class GridMismatchError(ValueError):
    """Velocity/momentum grids violate reciprocity or do not match."""


class SupportOverflowError(RuntimeError):
    """Fiber support left the admissible truncation band."""


class FiberGrid:
    """Paired velocity and momentum grids over the manifold nodes.

    Velocity nodes are ``v_j = (j - M/2) dv`` with ``dv = 2V/M``; momentum
    nodes are ``p_k = (k - M/2) dp``. The reciprocity requirement
    ``2 V dp <= 1`` makes the fiber quadratures Nyquist-consistent, and
    the default ``dp = 1/(2V)`` realizes the transforms as an exact
    unitary DFT pair.
    """

    __slots__ = (
        "manifold", "v_cutoff", "fiber_points", "v_step", "p_step",
        "v_nodes", "p_nodes", "_dft",
    )

    def __init__(self, manifold: GridManifold, v_cutoff: float,
                 fiber_points: int = 256, momentum_step: float | None = None):
        if v_cutoff <= 0:
            raise ValueError("velocity cutoff must be positive")
        if fiber_points < 8 or fiber_points % 2:
            raise ValueError("fiber_points must be even and at least 8")
        self.manifold = manifold
        self.v_cutoff = float(v_cutoff)
        self.fiber_points = int(fiber_points)
        self.v_step = 2.0 * self.v_cutoff / self.fiber_points
        self.p_step = float(momentum_step) if momentum_step is not None \
            else 1.0 / (2.0 * self.v_cutoff)
        if 2.0 * self.v_cutoff * self.p_step > 1.0 + 1e-12:
            raise GridMismatchError(
                "momentum step too coarse: 2 V dp must not exceed 1"
            )
        idx = np.arange(self.fiber_points) - self.fiber_points // 2
        self.v_nodes = idx * self.v_step
        self.p_nodes = idx * self.p_step
        self.v_nodes.setflags(write=False)
        self.p_nodes.setflags(write=False)
        self._dft = None

    @property
    def band(self) -> float:
        return _BAND_FRACTION * self.v_cutoff

    def dft_matrix(self) -> np.ndarray:
        """``F[k, j] = exp(-2 pi i p_k v_j)``."""
        if self._dft is None:
            mat = np.exp(-2j * np.pi * np.outer(self.p_nodes, self.v_nodes))
            mat.setflags(write=False)
            self._dft = mat
        return self._dft

    def compatible(self, other: "FiberGrid") -> bool:
        return (
            self.manifold is other.manifold
            and self.fiber_points == other.fiber_points
            and abs(self.v_cutoff - other.v_cutoff) < 1e-14
            and abs(self.p_step - other.p_step) < 1e-14
        )

    def __repr__(self) -> str:
        return (
            f"FiberGrid(V={self.v_cutoff:g}, M={self.fiber_points}, "
            f"dp={self.p_step:g})"
        )


def _require_same_grid(a, b):
    if not a.grid.compatible(b.grid):
        raise GridMismatchError("operands live on incompatible fiber grids")


def _interp_rows(values: np.ndarray, circumference: float, x) -> np.ndarray:
    """Trigonometric interpolation of each column of a (N, M) array in x."""
    n = values.shape[0]
    coef = np.fft.fft(values, axis=0) / n
    freq = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        ny = n // 2
        coef = np.vstack([coef, 0.5 * coef[ny]])
        coef[ny] *= 0.5
        freq = np.append(freq, float(ny))
    x = np.asarray(x, dtype=float).reshape(-1)
    out = np.empty((x.size, values.shape[1]), dtype=complex)
    rate = 2j * np.pi / circumference
    for start in range(0, x.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        out[sl] = np.exp(rate * np.outer(x[sl], freq)) @ coef
    return out


class _SymbolBase:
    __slots__ = ("grid", "values", "_dual", "_rowtable")

    def __init__(self, grid: FiberGrid, values):
        data = np.asarray(values)
        n = grid.manifold.num_points
        if data.shape != (n, grid.fiber_points):
            raise ValueError(
                f"expected shape {(n, grid.fiber_points)}, got {data.shape}"
            )
        data = data.astype(complex)
        self.grid = grid
        self.values = data
        self._dual = None
        self._rowtable = None

    def __repr__(self) -> str:
        peak = float(np.abs(self.values).max())
        return f"<{type(self).__name__} peak={peak:.3g} on {self.grid!r}>"


class FiberSymbol(_SymbolBase):
    """Velocity-side samples ``b(x_i, v_j)`` with a compact fiber band.

    Values beyond nine tenths of the cutoff must already be negligible
    (at most 1e-12); they are truncated to exact zeros so that kernel
    evaluations vanish identically outside the admissible band.
    """

    def __init__(self, grid: FiberGrid, values):
        super().__init__(grid, values)
        outside = np.abs(grid.v_nodes) >= grid.band - 1e-14
        tail = np.abs(self.values[:, outside])
        if tail.size and tail.max() > _SUPPORT_TOL:
            raise SupportOverflowError(
                f"fiber data reaches {tail.max():.3e} outside the "
                f"truncation band |v| < {grid.band:g}"
            )
        self.values[:, outside] = 0.0
        self.values.setflags(write=False)

    @property
    def support_extent(self) -> float:
        """Largest |v_j| carrying non-negligible data."""
        alive = np.abs(self.values).max(axis=0) > _SUPPORT_TOL
        if not alive.any():
            return 0.0
        return float(np.abs(self.grid.v_nodes[alive]).max())

    def _dual_values(self) -> np.ndarray:
        """Momentum-side coefficients of each row (used for evaluation)."""
        if self._dual is None:
            g = self.grid
            c = g.manifold.conformal.samples.real
            self._dual = (c[:, None] * g.v_step) * (self.values @ g.dft_matrix().T)
        return self._dual

    def eval(self, x, v) -> np.ndarray:
        """Evaluate at point pairs; spectral in x, exact trig in v.

        Repeated base points are interpolated once: closures evaluate
        kernels row by row, so the base array typically carries only a
        grid's worth of distinct values.
        """
        g = self.grid
        x = np.asarray(x, dtype=float).reshape(-1)
        v = np.asarray(v, dtype=float).reshape(-1)
        out = np.zeros(x.size, dtype=complex)
        inside = np.abs(v) < g.band
        if not inside.any():
            return out
        xs, vs = x[inside], v[inside]
        unique_x, inv = np.unique(xs, return_inverse=True)
        dual = self._dual_values()
        rows = _interp_rows(dual, g.manifold.circumference, unique_x)
        vals = np.empty(xs.size, dtype=complex)
        for start in range(0, xs.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            phases = np.exp(2j * np.pi * np.outer(vs[sl], g.p_nodes))
            vals[sl] = (rows[inv[sl]] * phases).sum(axis=1)
        scale = g.p_step / g.manifold.conformal_at(xs)
        out[inside] = scale * vals
        return out

    def eval_on_grid_rows(self, v_matrix: np.ndarray,
                          mask: np.ndarray | None = None) -> np.ndarray:
        """Evaluate ``b(x_i, v_matrix[i, j])`` without x-interpolation."""
        g = self.grid
        n = g.manifold.num_points
        if v_matrix.shape[0] != n:
            raise ValueError("row count must match the manifold grid")
        dual = self._dual_values()
        out = np.zeros(v_matrix.shape, dtype=complex)
        use = np.abs(v_matrix) < g.band
        if mask is not None:
            use &= mask
        rows, cols = np.nonzero(use)
        vs = v_matrix[rows, cols]
        vals = np.empty(vs.size, dtype=complex)
        for start in range(0, vs.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            phases = np.exp(2j * np.pi * np.outer(vs[sl], g.p_nodes))
            vals[sl] = (dual[rows[sl]] * phases).sum(axis=1)
        scale = g.p_step / g.manifold.conformal.samples.real[rows]
        out[rows, cols] = scale * vals
        return out


class PhaseSymbol(_SymbolBase):
    """Momentum-side samples ``a(x_i, p_k)`` of a phase-space symbol."""

    def _fiber_values(self) -> np.ndarray:
        if self._dual is None:
            g = self.grid
            c = g.manifold.conformal.samples.real
            self._dual = (g.p_step / c[:, None]) * (
                self.values @ np.conj(g.dft_matrix())
            )
        return self._dual

    def eval(self, x, p) -> np.ndarray:
        """Evaluate at point pairs; spectral in x, exact trig in p."""
        g = self.grid
        x = np.asarray(x, dtype=float).reshape(-1)
        p = np.asarray(p, dtype=float).reshape(-1)
        fiber = self._fiber_values()
        out = np.empty(x.size, dtype=complex)
        for start in range(0, x.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            rows = _interp_rows(fiber, g.manifold.circumference, x[sl])
            phases = np.exp(-2j * np.pi * np.outer(p[sl], g.v_nodes))
            out[sl] = (rows * phases).sum(axis=1)
        return g.v_step * g.manifold.conformal_at(x) * out

    def liouville_integral(self) -> complex:
        """Phase-space integral against ``dp dx``."""
        g = self.grid
        m = g.manifold
        return complex(
            np.sum(self.values) * g.p_step * m.circumference / m.num_points
        )


def fiber_fourier(a: PhaseSymbol) -> FiberSymbol:
    """Velocity-side transform ``b(x, v) = int a(x, p) e^{2 pi i p v} dp / c(x)``."""
    g = a.grid
    c = g.manifold.conformal.samples.real
    vals = (g.p_step / c[:, None]) * (a.values @ np.conj(g.dft_matrix()))
    return FiberSymbol(g, vals)


def fiber_fourier_inv(b: FiberSymbol) -> PhaseSymbol:
    """Momentum-side transform ``a(x, p) = c(x) int b(x, v) e^{-2 pi i p v} dv``."""
    g = b.grid
    c = g.manifold.conformal.samples.real
    vals = (c[:, None] * g.v_step) * (b.values @ g.dft_matrix().T)
    return PhaseSymbol(g, vals)


def pair_convolve(k1: L2Operator, k2: L2Operator) -> L2Operator:
    """Groupoid convolution of integral kernels: the weighted matrix product
    ``(K1 * K2)(x, y) = sum_z K1(x, z) K2(z, y) w_z``."""
    return k1.compose(k2)


def fiber_convolve(b1: FiberSymbol, b2: FiberSymbol) -> FiberSymbol:
    """Fiberwise linear convolution against the fiber measure ``c(x) dv``."""
    _require_same_grid(b1, b2)
    g = b1.grid
    if b1.support_extent + b2.support_extent >= g.band:
        raise SupportOverflowError(
            "convolution support would leave the truncation band"
        )
    m = g.fiber_points
    pad = 2 * m
    spec = np.fft.fft(b1.values, pad, axis=1) * np.fft.fft(b2.values, pad, axis=1)
    full = np.fft.ifft(spec, axis=1)
    out = full[:, m // 2 : m // 2 + m]
    c = g.manifold.conformal.samples.real
    return FiberSymbol(g, out * (c[:, None] * g.v_step))


@dataclass(frozen=True)
class TangentGroupoidPoint:
    """A point of the glued groupoid: a tangent vector at ``h = 0`` or an
    ordered pair of manifold points for ``h > 0``."""

    h: float
    payload: object

    def __post_init__(self):
        if self.h < 0 or self.h > 1:
            raise ValueError("h must lie in [0, 1]")
        if self.h == 0:
            if not isinstance(self.payload, TangentPoint):
                raise ValueError("h = 0 payload must be a TangentPoint")
        else:
            if not (isinstance(self.payload, tuple) and len(self.payload) == 2):
                raise ValueError("h > 0 payload must be a coordinate pair")

    @property
    def is_boundary(self) -> bool:
        return self.h == 0


def deformation_chart(m: GridManifold, h: float, x: float, v: float) -> TangentGroupoidPoint:
    """Chart gluing the tangent bundle to the pair groupoid:
    ``(h, v at x) -> (h, x, exp_x(-h v))`` for ``h > 0``, identity at ``h = 0``."""
    if h == 0:
        return TangentGroupoidPoint(0.0, TangentPoint(float(x), float(v)))
    y = float(riem_exp(m, x, -h * v))
    return TangentGroupoidPoint(float(h), (float(x), y))


def deformation_chart_inverse(m: GridManifold, h: float, x: float, y: float) -> float:
    """Inverse chart: recover the velocity, ``v = -log_x(y) / h`` for ``h > 0``.

    At ``h = 0`` the chart is the identity on the tangent bundle, so the
    third argument is already the velocity and is returned unchanged.
    """
    if h == 0:
        return float(y)
    return float(-riem_log(m, x, y) / h)


def haar_integral(F: Callable[[TangentGroupoidPoint], complex],
                  h: float, x: float, grid: FiberGrid) -> complex:
    """Integrate a groupoid function over the fiber through ``(h, x)``.

    At ``h = 0`` this is the fiber quadrature against ``c(x) dv``; for
    ``h > 0`` it is ``h^{-1}`` times the Riemannian quadrature in the
    second slot.
    """
    m = grid.manifold
    if h == 0:
        weights = m.conformal_at(float(x)) * grid.v_step
        vals = [F(TangentGroupoidPoint(0.0, TangentPoint(float(x), float(v))))
                for v in grid.v_nodes]
        return complex(weights * np.sum(vals))
    vals = [F(TangentGroupoidPoint(float(h), (float(x), float(y))))
            for y in m.nodes]
    return complex(np.sum(np.asarray(vals) * m.weights) / h)


class DiffeoFamily:
    """Smooth family ``F(h, x)`` of circle maps over ``h`` in ``[0, 1]``.

    Two constructions cover the cases the extension machinery needs:
    displacement families polynomial in ``h`` and backward flow families
    ``F(h, x) = Fl^{-X}_h(x)``.
    """

    def __init__(self, manifold: GridManifold):
        self.manifold = manifold
        self._cache: dict[float, Diffeo] = {}

    @classmethod
    def from_h_polynomial(cls, manifold: GridManifold, coeffs) -> "DiffeoFamily":
        fam = cls(manifold)
        fam._coeffs = list(coeffs)
        for c in fam._coeffs:
            if c.manifold is not manifold:
                raise ValueError("coefficient fields on the wrong manifold")
        fam._field = None
        return fam

    @classmethod
    def from_backward_flow(cls, field: VectorField) -> "DiffeoFamily":
        fam = cls(field.manifold)
        fam._coeffs = None
        fam._field = field
        return fam

    @classmethod
    def constant(cls, diffeo: Diffeo) -> "DiffeoFamily":
        return cls.from_h_polynomial(diffeo.manifold, [diffeo.displacement])

    def at(self, h: float) -> Diffeo:
        key = float(h)
        if key not in self._cache:
            if self._field is not None:
                self._cache[key] = (
                    Diffeo.identity(self.manifold) if key == 0.0
                    else flow(VectorField(self.manifold, -self._field.samples), key)
                )
            else:
                disp = np.zeros(self.manifold.num_points)
                for k, c in enumerate(self._coeffs):
                    disp = disp + (key ** k) * c.samples.real
                self._cache[key] = Diffeo(self.manifold, ScalarField(self.manifold, disp))
        return self._cache[key]

    def map(self, h: float, x):
        return self.at(h)(x)

    def boundary_velocity(self, x):
        """``d/dh F(h, x)`` at ``h = 0``."""
        if self._field is not None:
            return -self._field(x)
        if len(self._coeffs) > 1:
            return self._coeffs[1](x)
        return np.zeros_like(np.asarray(x, dtype=float))

    def boundary_jacobian(self, x):
        """``d/dx F(0, x)``."""
        if self._field is not None:
            return np.ones_like(np.asarray(x, dtype=float))
        return 1.0 + differentiate(self._coeffs[0])(x)


def extend_diffeo(family: DiffeoFamily, pt: TangentGroupoidPoint) -> TangentGroupoidPoint:
    """Extend a family of circle maps to the glued groupoid.

    Interior points map as ``(h, x, y) -> (h, F(h, x), F(0, y))``; boundary
    tangent vectors map through the total derivative of ``F`` at ``(0, x)``
    applied to ``(1, v)``.
    """
    if pt.is_boundary:
        tp = pt.payload
        base = float(family.map(0.0, tp.base))
        comp = float(family.boundary_velocity(tp.base)
                     + family.boundary_jacobian(tp.base) * tp.component)
        return TangentGroupoidPoint(0.0, TangentPoint(base, comp))
    x, y = pt.payload
    return TangentGroupoidPoint(
        pt.h, (float(family.map(pt.h, x)), float(family.map(0.0, y)))
    )


def extend_scalar(g: Callable[[float, float], complex],
                  pt: TangentGroupoidPoint) -> complex:
    """Extend a scalar family ``g(h, x)`` to the glued groupoid: boundary
    tangent vectors see ``g(0, x)`` independently of the velocity, interior
    pairs see ``g(h, x)``."""
    if pt.is_boundary:
        return g(0.0, pt.payload.base)
    return g(pt.h, pt.payload[0])
