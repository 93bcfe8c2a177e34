"""Spectral machinery for 1-D periodic Riemannian manifolds.

The reference geometry is the circle ``[0, L)`` carrying the conformal
metric ``c(x)^2 dx^2``, sampled on ``N`` equispaced nodes. Interpolation
and differentiation are trigonometric, geodesics come from the
closed-form cumulative-arclength change of variables, and integrals are
node sums against the Riemannian weights ``w_i = c(x_i) L / N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CutLocusError",
    "GridManifold",
    "ScalarField",
    "VectorField",
    "TangentPoint",
    "CotangentPoint",
    "interpolate",
    "differentiate",
    "integrate",
    "riem_exp",
    "riem_log",
]

# Query points are evaluated against the full mode table in chunks of this
# size to bound the temporary phase matrix.
_CHUNK = 4096


class CutLocusError(ValueError):
    """Geodesic inversion requested at or beyond half the total length."""


def _mode_table(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fourier modes of periodic samples, Nyquist mode split symmetrically.

    Returns integer frequencies ``k`` and coefficients ``c_k`` so that the
    interpolant is ``sum_k c_k exp(2 pi i k x / L)``. The symmetric Nyquist
    split keeps real data real off the grid and the table exact at nodes.
    """
    n = samples.size
    coef = np.fft.fft(samples) / n
    freq = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        ny = n // 2
        coef = np.append(coef, 0.5 * coef[ny])
        coef[ny] = 0.5 * coef[ny]
        freq = np.append(freq, float(ny))
    # Dropping relatively negligible modes keeps off-grid evaluation cheap
    # for band-limited data without moving node values past 1e-13.
    keep = np.abs(coef) > 1e-15 * max(1.0, float(np.abs(coef).max()))
    keep[0] = True
    return freq[keep], coef[keep]


def _eval_table(
    freq: np.ndarray,
    coef: np.ndarray,
    circumference: float,
    x,
    real_out: bool,
):
    """Evaluate ``sum_k c_k exp(2 pi i k x / L)`` at arbitrary points.

    Real data takes a half-spectrum path (conjugate symmetry of the table)
    with real trigonometric kernels; this is the hot loop of every flow
    integration.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    flat = arr.reshape(-1)
    rate = 2.0 * np.pi / circumference
    if real_out:
        positive = freq > 0
        base = float(np.real(coef[freq == 0].sum()))
        fpos = freq[positive]
        re2 = 2.0 * np.real(coef[positive])
        im2 = 2.0 * np.imag(coef[positive])
        out = np.empty(flat.size, dtype=float)
        for start in range(0, flat.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            theta = rate * np.outer(flat[sl], fpos)
            out[sl] = base + np.cos(theta) @ re2 - np.sin(theta) @ im2
        result = out
    else:
        out = np.empty(flat.size, dtype=complex)
        for start in range(0, flat.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            out[sl] = np.exp(1j * rate * np.outer(flat[sl], freq)) @ coef
        result = out
    if scalar:
        return float(result[0]) if real_out else complex(result[0])
    return result.reshape(arr.shape)


class ScalarField:
    """Periodic samples on the manifold grid with spectral evaluation."""

    __slots__ = ("manifold", "samples", "_table")

    def __init__(self, manifold: "GridManifold", samples) -> None:
        data = np.asarray(samples)
        if data.shape != (manifold.num_points,):
            raise ValueError(
                f"expected {manifold.num_points} samples, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("field samples must be finite")
        data = data.astype(complex if np.iscomplexobj(data) else float)
        data.setflags(write=False)
        self.manifold = manifold
        self.samples = data
        self._table = None

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    def _modes(self):
        if self._table is None:
            self._table = _mode_table(self.samples)
        return self._table

    def __call__(self, x):
        freq, coef = self._modes()
        return _eval_table(freq, coef, self.manifold.circumference, x, self.is_real)

    def derivative(self) -> "ScalarField":
        return differentiate(self)

    # Small arithmetic surface so tests and presets read naturally.
    def _coerce(self, other):
        if isinstance(other, ScalarField):
            if other.manifold is not self.manifold:
                raise ValueError("fields belong to different manifolds")
            return other.samples
        return other

    def __add__(self, other):
        return ScalarField(self.manifold, self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.manifold, self.samples - self._coerce(other))

    def __mul__(self, other):
        return ScalarField(self.manifold, self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.manifold, -self.samples)

    def __repr__(self) -> str:
        kind = "complex" if not self.is_real else "real"
        return f"<{type(self).__name__} {kind} N={self.samples.size}>"


class VectorField(ScalarField):
    """Coefficient samples of a vector field ``X(x) d/dx``."""


@dataclass(frozen=True)
class TangentPoint:
    """A tangent vector ``v d/dx`` anchored at coordinate ``base``."""

    base: float
    component: float


@dataclass(frozen=True)
class CotangentPoint:
    """A covector ``p dx`` anchored at coordinate ``base``."""

    base: float
    component: float


class GridManifold:
    """Equispaced periodic grid on the circle with metric ``c(x)^2 dx^2``.

    Parameters
    ----------
    num_points:
        Even number of grid nodes.
    circumference:
        Coordinate length ``L`` of the circle, default ``2 pi``.
    conformal:
        ``None`` for the flat metric, a callable evaluated at the nodes,
        or an array of ``num_points`` positive samples.
    """

    def __init__(self, num_points: int, circumference: float = 2.0 * np.pi, conformal=None):
        if num_points < 8 or num_points % 2:
            raise ValueError("num_points must be even and at least 8")
        if circumference <= 0:
            raise ValueError("circumference must be positive")
        self.num_points = int(num_points)
        self.circumference = float(circumference)
        self.dimension = 1
        nodes = self.circumference * np.arange(self.num_points) / self.num_points
        nodes.setflags(write=False)
        self.nodes = nodes

        if conformal is None:
            c = np.ones(self.num_points)
        elif callable(conformal):
            c = np.asarray(conformal(nodes), dtype=float)
        else:
            c = np.asarray(conformal, dtype=float)
        if c.shape != (self.num_points,):
            raise ValueError("conformal factor has wrong shape")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("conformal factor must be positive at every node")
        self.conformal = ScalarField(self, c)
        weights = c * self.circumference / self.num_points
        weights.setflags(write=False)
        self.weights = weights
        self.total_length = float(weights.sum())
        self.mean_conformal = self.total_length / self.circumference
        self.is_flat = bool(np.allclose(c, c.mean(), rtol=0.0, atol=1e-14))
        self._arc_table = None
        self._conformal_prime = None
        self._diff_matrix = None

    # -- basic geometry -------------------------------------------------

    @property
    def injectivity_radius(self) -> float:
        return 0.5 * self.total_length

    def wrap(self, x):
        # np.mod maps negative values within one ulp of zero to exactly L;
        # fold that boundary case back so results stay in [0, L).
        out = np.mod(x, self.circumference)
        return np.where(out >= self.circumference, 0.0, out) if np.ndim(out) \
            else (0.0 if out >= self.circumference else out)

    def conformal_at(self, x):
        if self.is_flat:
            base = float(self.conformal.samples[0].real)
            arr = np.asarray(x, dtype=float)
            return base if arr.ndim == 0 else np.full(arr.shape, base)
        return self.conformal(x)

    def conformal_prime(self) -> ScalarField:
        if self._conformal_prime is None:
            self._conformal_prime = differentiate(self.conformal)
        return self._conformal_prime

    def arclength(self, y):
        """Cumulative Riemannian arclength ``A(y) = int_0^y c`` for real ``y``.

        The antiderivative splits into the linear mean part plus a periodic
        spectral part, so the formula is valid for unwrapped coordinates.
        """
        if self.is_flat:
            arr = np.asarray(y, dtype=float)
            out = self.mean_conformal * arr
            return float(out) if arr.ndim == 0 else out
        if self._arc_table is None:
            freq, coef = _mode_table(np.asarray(self.conformal.samples.real))
            nonzero = freq != 0
            freq = freq[nonzero]
            coef = coef[nonzero] * self.circumference / (2j * np.pi * freq)
            periodic0 = complex(coef.sum())  # value of the periodic part at 0
            self._arc_table = (freq, coef, periodic0)
        freq, coef, periodic0 = self._arc_table
        arr = np.asarray(y, dtype=float)
        periodic = _eval_table(freq, coef, self.circumference, arr, False)
        out = self.mean_conformal * arr + np.real(periodic - periodic0)
        return float(out) if arr.ndim == 0 else out

    def diff_matrix(self) -> np.ndarray:
        """Dense spectral differentiation matrix on the nodes."""
        if self._diff_matrix is None:
            n = self.num_points
            idx = np.arange(n)
            delta = idx[:, None] - idx[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = 0.5 * (-1.0) ** delta / np.tan(np.pi * delta / n)
            np.fill_diagonal(vals, 0.0)
            mat = vals * (2.0 * np.pi / self.circumference)
            mat.setflags(write=False)
            self._diff_matrix = mat
        return self._diff_matrix

    def field(self, values) -> ScalarField:
        """Sample a callable (or wrap an array) into a :class:`ScalarField`."""
        if callable(values):
            values = values(self.nodes)
        return ScalarField(self, values)

    def vector_field(self, values) -> VectorField:
        if callable(values):
            values = values(self.nodes)
        return VectorField(self, values)

    def zero_field(self) -> ScalarField:
        return ScalarField(self, np.zeros(self.num_points))

    def __repr__(self) -> str:
        kind = "flat" if self.is_flat else "conformal"
        return (
            f"GridManifold(N={self.num_points}, L={self.circumference:.6g}, {kind})"
        )


# -- module-level operations ---------------------------------------------


def interpolate(field: ScalarField, x):
    """Trigonometric interpolation; exact on trig polynomials of degree < N/2."""
    return field(x)


def differentiate(field: ScalarField) -> ScalarField:
    """Spectral derivative sampled back onto the grid (Nyquist mode dropped)."""
    n = field.samples.size
    length = field.manifold.circumference
    coef = np.fft.fft(field.samples)
    freq = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        freq[n // 2] = 0.0
    dcoef = coef * (2j * np.pi / length) * freq
    deriv = np.fft.ifft(dcoef)
    if field.is_real:
        deriv = deriv.real
    return type(field)(field.manifold, deriv)


def integrate(field: ScalarField):
    """Riemannian integral: node sum against the quadrature weights."""
    total = np.sum(field.samples * field.manifold.weights)
    return float(total.real) if field.is_real else complex(total)


def riem_exp(m: GridManifold, x, v):
    """Point at signed Riemannian arclength ``c(x) v`` from ``x``, mod L.

    For the flat metric this is the rotation ``x + v``; otherwise the unique
    solution of ``A(y) = A(x) + c(x) v`` for the cumulative arclength ``A``.
    """
    x_arr = np.asarray(x, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if m.is_flat:
        return m.wrap(x_arr + v_arr)
    target = m.arclength(x_arr) + m.conformal_at(x_arr) * v_arr
    y = x_arr + m.conformal_at(x_arr) * v_arr / m.mean_conformal
    tol = 1e-13 * max(1.0, m.total_length)
    for _ in range(80):
        resid = m.arclength(y) - target
        if np.max(np.abs(resid)) < tol:
            break
        y = y - resid / m.conformal_at(m.wrap(y))
    else:
        raise RuntimeError("arclength inversion did not converge")
    return m.wrap(y)


def _log_masked(m: GridManifold, x, y, cut_fraction: float = 1.0 - 1e-10):
    """Vectorized geodesic logarithm with a validity mask instead of raising."""
    half = m.injectivity_radius
    s = m.arclength(np.asarray(y, dtype=float)) - m.arclength(np.asarray(x, dtype=float))
    s = np.mod(s + half, m.total_length) - half
    ok = np.abs(s) < cut_fraction * half
    return s / m.conformal_at(x), ok


def riem_log(m: GridManifold, x, y):
    """Tangent component ``v`` with ``riem_exp(m, x, v) = y``, minimal length.

    Raises
    ------
    CutLocusError
        If the Riemannian distance from ``x`` to ``y`` is not strictly less
        than half the total length (antipodal ambiguity).
    """
    v, ok = _log_masked(m, x, y)
    if not np.all(ok):
        raise CutLocusError("points separated by at least half the total length")
    if np.asarray(v).ndim == 0:
        return float(v)
    return v
