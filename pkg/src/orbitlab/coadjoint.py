"""Phase-space action of the group on covectors, the moment pairing, the
coadjoint action recovered through dual pairings, and the symplectic form.

A covector ``p dx`` at ``x`` transforms under ``(phi, f)`` to the covector
``p / phi'(x) - f'(phi(x))`` at ``phi(x)``: pull back along the inverse
map, then subtract the differential of the scalar slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lie_group import AlgebraElement, GroupElement, VectorField, adjoint, inverse
from .manifold import CotangentPoint, ScalarField, differentiate, interpolate

__all__ = [
    "CovectorPoint",
    "PhaseTangent",
    "cotangent_action",
    "moment_pairing",
    "coadjoint_action",
    "derived_action",
    "symplectic_form",
]

# The covector records used throughout this module are plain cotangent
# points; the alias keeps the phase-space vocabulary at call sites.
CovectorPoint = CotangentPoint


@dataclass(frozen=True)
class PhaseTangent:
    """Tangent vector ``v d/dx + w d/dp`` to the cotangent bundle."""

    v: float
    w: float


def cotangent_action(a: GroupElement, eta: CovectorPoint) -> CovectorPoint:
    """Push a covector forward: base ``phi(x)``, momentum ``p/phi'(x) - f'(phi(x))``."""
    x, p = eta.base, eta.component
    y = float(a.diffeo(x))
    fprime = differentiate(a.func)
    p_new = p / float(a.diffeo.jacobian_at(x)) - float(fprime(y))
    return CovectorPoint(y, p_new)


def moment_pairing(eta: CovectorPoint, z: AlgebraElement) -> float:
    """Evaluate the affine Hamiltonian ``p X(x) + f(x)`` of ``(X, f)`` at ``eta``."""
    x, p = eta.base, eta.component
    return float(p * interpolate(z.field, x) + interpolate(z.func, x))


def coadjoint_action(a: GroupElement, eta: CovectorPoint) -> CovectorPoint:
    """Dual of the adjoint action, reconstructed through pairings.

    The new base point is ``phi(x)``; the new momentum is read off by
    pairing against the constant unit vector field transported by the
    adjoint action of the inverse element. This route never touches the
    pullback Jacobian used by :func:`cotangent_action`.
    """
    m = a.manifold
    y = float(a.diffeo(eta.base))
    unit = AlgebraElement(
        VectorField(m, np.ones(m.num_points)), m.zero_field()
    )
    transported = adjoint(inverse(a), unit)
    p_new = moment_pairing(eta, transported)
    return CovectorPoint(y, p_new)


def derived_action(z: AlgebraElement, eta: CovectorPoint) -> PhaseTangent:
    """Infinitesimal phase-space action ``(X(x), -p X'(x) - f'(x))``."""
    x, p = eta.base, eta.component
    xprime = differentiate(z.field)
    fprime = differentiate(z.func)
    return PhaseTangent(
        float(interpolate(z.field, x)),
        float(-p * xprime(x) - fprime(x)),
    )


def symplectic_form(eta: CovectorPoint, v1: PhaseTangent, v2: PhaseTangent) -> float:
    """Canonical two-form ``dx ^ dp`` evaluated on a pair of phase tangents."""
    return v1.v * v2.w - v2.v * v1.w
