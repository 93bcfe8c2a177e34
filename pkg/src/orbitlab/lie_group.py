"""The semidirect product of compactly supported circle diffeomorphisms
with real scalar fields, together with its Lie algebra.

Group elements are pairs ``(phi, f)``; algebra elements are pairs
``(X, f)``. The product is ``(phi, f)(theta, g) = (phi o theta,
g o phi^{-1} + f)``, the exponential sends ``(X, f)`` to the time-one
flow of ``X`` paired with the time average of ``f`` pulled back along
the reverse flow, and the bracket is ``(-[X, Y], -Xg + Yf)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .manifold import (
    GridManifold,
    ScalarField,
    VectorField,
    differentiate,
    interpolate,
)

__all__ = [
    "NonInvertibleError",
    "Diffeo",
    "GroupElement",
    "AlgebraElement",
    "multiply",
    "inverse",
    "flow",
    "flow_at_times",
    "group_exp",
    "bracket",
    "adjoint",
    "scale_algebra",
]


class NonInvertibleError(RuntimeError):
    """Newton inversion of a circle map failed to converge."""


class Diffeo:
    """Orientation-preserving circle map stored as a periodic displacement.

    ``phi(x) = x + u(x) mod L`` with ``1 + u'(x) > 0`` at every node, so the
    map is a degree-one diffeomorphism. Inverses are computed per node by
    Newton iteration on ``y + u(y) = x`` and cached.
    """

    __slots__ = ("manifold", "displacement", "_jacobian", "_inverse")

    def __init__(self, manifold: GridManifold, displacement: ScalarField):
        if displacement.manifold is not manifold:
            raise ValueError("displacement sampled on a different manifold")
        if not displacement.is_real:
            raise ValueError("displacement must be real")
        jac = 1.0 + differentiate(displacement).samples
        if np.min(jac) <= 0.0:
            raise ValueError("displacement is not orientation-preserving")
        self.manifold = manifold
        self.displacement = displacement
        self._jacobian = ScalarField(manifold, jac)
        self._inverse = None

    @classmethod
    def identity(cls, manifold: GridManifold) -> "Diffeo":
        return cls(manifold, manifold.zero_field())

    @classmethod
    def rotation(cls, manifold: GridManifold, shift: float) -> "Diffeo":
        return cls(manifold, manifold.field(np.full(manifold.num_points, float(shift))))

    def __call__(self, x):
        return self.manifold.wrap(np.asarray(x, dtype=float) + self.displacement(x))

    def jacobian_at(self, x):
        return self._jacobian(x)

    def inverse_at(self, x):
        """Solve ``y + u(y) = x`` by Newton; works for arbitrary points."""
        u = self.displacement
        x_arr = np.asarray(x, dtype=float)
        y = x_arr - u(x_arr)
        converged = False
        for _ in range(50):
            resid = y + u(y) - x_arr
            if np.max(np.abs(resid)) < 1e-13 * max(1.0, self.manifold.circumference):
                converged = True
                break
            y = y - resid / self._jacobian(y)
        if not converged:
            raise NonInvertibleError("circle-map inversion stalled after 50 iterations")
        return self.manifold.wrap(y)

    def inverse(self) -> "Diffeo":
        if self._inverse is None:
            m = self.manifold
            y = self.inverse_at(m.nodes)
            # Displacement of the inverse map, unwrapped to the short branch.
            v = np.mod(y - m.nodes + 0.5 * m.circumference, m.circumference)
            v -= 0.5 * m.circumference
            inv = Diffeo(m, ScalarField(m, v))
            inv._inverse = self
            self._inverse = inv
        return self._inverse

    def compose(self, other: "Diffeo") -> "Diffeo":
        """Resample ``self o other`` onto the grid."""
        if other.manifold is not self.manifold:
            raise ValueError("diffeos live on different manifolds")
        m = self.manifold
        inner = other.displacement.samples.real
        w = inner + self.displacement(m.nodes + inner)
        return Diffeo(m, ScalarField(m, w))

    def __repr__(self) -> str:
        amp = float(np.max(np.abs(self.displacement.samples)))
        return f"<Diffeo max|u|={amp:.3g}>"


@dataclass(frozen=True)
class GroupElement:
    """A pair ``(phi, f)`` of a circle diffeomorphism and a real field."""

    diffeo: Diffeo
    func: ScalarField

    def __post_init__(self):
        if self.func.manifold is not self.diffeo.manifold:
            raise ValueError("components live on different manifolds")
        if not self.func.is_real:
            raise ValueError("the scalar slot must be real")

    @property
    def manifold(self) -> GridManifold:
        return self.diffeo.manifold

    @classmethod
    def identity(cls, manifold: GridManifold) -> "GroupElement":
        return cls(Diffeo.identity(manifold), manifold.zero_field())


@dataclass(frozen=True)
class AlgebraElement:
    """A pair ``(X, f)`` of a vector field and a real field."""

    field: VectorField
    func: ScalarField

    def __post_init__(self):
        if self.func.manifold is not self.field.manifold:
            raise ValueError("components live on different manifolds")

    @property
    def manifold(self) -> GridManifold:
        return self.field.manifold

    @classmethod
    def zero(cls, manifold: GridManifold) -> "AlgebraElement":
        return cls(VectorField(manifold, np.zeros(manifold.num_points)),
                   manifold.zero_field())


def scale_algebra(z: AlgebraElement, t: float) -> AlgebraElement:
    return AlgebraElement(
        VectorField(z.manifold, t * z.field.samples),
        ScalarField(z.manifold, t * z.func.samples),
    )


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group product ``(phi, f)(theta, g) = (phi o theta, g o phi^{-1} + f)``."""
    if a.manifold is not b.manifold:
        raise ValueError("elements live on different manifolds")
    m = a.manifold
    diffeo = a.diffeo.compose(b.diffeo)
    pulled = interpolate(b.func, a.diffeo.inverse()(m.nodes))
    return GroupElement(diffeo, ScalarField(m, pulled + a.func.samples))


def inverse(a: GroupElement) -> GroupElement:
    """Group inverse ``(phi, f)^{-1} = (phi^{-1}, -f o phi)``."""
    m = a.manifold
    phi_inv = a.diffeo.inverse()
    pushed = interpolate(a.func, a.diffeo(m.nodes))
    return GroupElement(phi_inv, ScalarField(m, -pushed))


def _rk4_positions(x0: np.ndarray, field: VectorField, t_end: float, steps: int) -> np.ndarray:
    dt = t_end / steps
    y = np.array(x0, dtype=float)
    for _ in range(steps):
        k1 = field(y)
        k2 = field(y + 0.5 * dt * k1)
        k3 = field(y + 0.5 * dt * k2)
        k4 = field(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _integrate_through(field: VectorField, times: np.ndarray, rate: int) -> list[np.ndarray]:
    """Integrate the node cloud through an ascending list of positive times."""
    m = field.manifold
    y = np.array(m.nodes, dtype=float)
    snapshots = []
    prev = 0.0
    for t in times:
        gap = t - prev
        if gap > 0:
            steps = max(2, int(np.ceil(gap * rate)))
            y = _rk4_positions(y, field, gap, steps)
        snapshots.append(y.copy())
        prev = t
    return snapshots


def flow_at_times(field: VectorField, times) -> list[Diffeo]:
    """Flow maps ``Fl^X_t`` of a vector field at several times ``t >= 0``.

    One RK4 path is threaded through the sorted times; substeps are doubled
    until the final snapshots move by less than 1e-10.
    """
    ts = np.asarray(times, dtype=float)
    if np.any(ts < 0):
        raise ValueError("times must be non-negative; flow with -X for t < 0")
    order = np.argsort(ts)
    sorted_ts = ts[order]
    m = field.manifold
    speed = float(np.max(np.abs(field.samples.real))) if field.samples.size else 0.0
    rate = max(8.0, 8.0 * speed) / max(sorted_ts[-1], 1e-3) if sorted_ts[-1] > 0 else 8.0
    rate = max(rate, 8.0)
    snaps = _integrate_through(field, sorted_ts, int(np.ceil(rate)))
    for _ in range(10):
        finer = _integrate_through(field, sorted_ts, int(np.ceil(rate * 2)))
        drift = max(np.max(np.abs(a - b)) for a, b in zip(snaps, finer))
        snaps = finer
        rate *= 2
        if drift < 1e-10:
            break
    diffeos = [None] * len(sorted_ts)
    for pos, idx in enumerate(order):
        u = snaps[pos] - m.nodes
        diffeos[idx] = Diffeo(m, ScalarField(m, u))
    return diffeos


def flow(field: VectorField, t: float) -> Diffeo:
    """Time-``t`` flow of a vector field; complete since fields are periodic."""
    if t == 0:
        return Diffeo.identity(field.manifold)
    if t < 0:
        return flow(VectorField(field.manifold, -field.samples), -t)
    return flow_at_times(field, [t])[0]


_GAUSS_NODES, _GAUSS_WEIGHTS = leggauss(16)
_GAUSS_T = 0.5 * (_GAUSS_NODES + 1.0)
_GAUSS_W = 0.5 * _GAUSS_WEIGHTS


def group_exp(z: AlgebraElement) -> GroupElement:
    """Exponential ``(X, f) -> (Fl^X_1, int_0^1 f o Fl^{-X}_t dt)``.

    The scalar slot is a 16-node Gauss-Legendre average in ``t`` of the
    pullbacks of ``f`` along the reverse flow, each evaluated spectrally.
    """
    m = z.manifold
    neg = VectorField(m, -z.field.samples)
    snapshots = flow_at_times(neg, _GAUSS_T)
    acc = np.zeros(m.num_points)
    for w, snap in zip(_GAUSS_W, snapshots):
        acc = acc + w * interpolate(z.func, snap(m.nodes))
    return GroupElement(flow(z.field, 1.0), ScalarField(m, acc))


def bracket(z1: AlgebraElement, z2: AlgebraElement) -> AlgebraElement:
    """Lie bracket ``[(X, f), (Y, g)] = (-[X, Y], -Xg + Yf)``."""
    m = z1.manifold
    x, f = z1.field.samples, z1.func.samples
    y, g = z2.field.samples, z2.func.samples
    xp = differentiate(z1.field).samples
    yp = differentiate(z2.field).samples
    fp = differentiate(z1.func).samples
    gp = differentiate(z2.func).samples
    commutator = x * yp - y * xp
    return AlgebraElement(
        VectorField(m, -commutator),
        ScalarField(m, -x * gp + y * fp),
    )


def adjoint(a: GroupElement, z: AlgebraElement) -> AlgebraElement:
    """Adjoint action ``(Ad_phi X, g o phi^{-1} + df(Ad_phi X))``.

    ``Ad_phi X`` is the pushforward ``T phi o X o phi^{-1}``, evaluated
    node-wise as ``phi'(phi^{-1}(x)) X(phi^{-1}(x))``.
    """
    m = a.manifold
    y = a.diffeo.inverse()(m.nodes)
    pushed = a.diffeo.jacobian_at(y) * interpolate(z.field, y)
    fprime = differentiate(a.func).samples
    second = interpolate(z.func, y) + pushed * fprime
    return AlgebraElement(VectorField(m, pushed), ScalarField(m, second))
