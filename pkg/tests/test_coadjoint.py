import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitlab import (
    AlgebraElement,
    CovectorPoint,
    Diffeo,
    GroupElement,
    PhaseTangent,
    ScalarField,
    VectorField,
    adjoint,
    bracket,
    coadjoint_action,
    cotangent_action,
    derived_action,
    group_exp,
    inverse,
    moment_pairing,
    scale_algebra,
    symplectic_form,
)
from orbitlab.presets import random_algebra_element, random_group_element


def test_identity_acts_trivially(curved128):
    eta = CovectorPoint(1.3, -0.7)
    out = cotangent_action(GroupElement.identity(curved128), eta)
    assert out.base == pytest.approx(eta.base, abs=1e-12)
    assert out.component == pytest.approx(eta.component, abs=1e-12)


def test_pure_function_shifts_momentum_by_gradient(flat64):
    m = flat64
    f = m.field(np.sin(m.nodes))
    a = GroupElement(Diffeo.identity(m), f)
    eta = CovectorPoint(0.9, 0.25)
    out = cotangent_action(a, eta)
    assert out.base == pytest.approx(0.9, abs=1e-12)
    assert out.component == pytest.approx(0.25 - np.cos(0.9), abs=1e-10)


def test_rotation_translates_base_keeps_momentum(flat64):
    a = GroupElement(Diffeo.rotation(flat64, 0.6), flat64.zero_field())
    out = cotangent_action(a, CovectorPoint(1.0, 2.0))
    assert out.base == pytest.approx(1.6, abs=1e-12)
    assert out.component == pytest.approx(2.0, abs=1e-12)


def test_moment_pairing_cases(flat64):
    m = flat64
    f = m.field(np.cos(m.nodes))
    pure = AlgebraElement(VectorField(m, np.zeros(64)), f)
    eta = CovectorPoint(1.0, 2.0)
    assert moment_pairing(eta, pure) == pytest.approx(np.cos(1.0), abs=1e-10)

    z = AlgebraElement(VectorField(m, np.sin(m.nodes)), f)
    expected = 2.0 * np.sin(1.0) + np.cos(1.0)
    assert moment_pairing(eta, z) == pytest.approx(expected, abs=1e-10)

    still = AlgebraElement(VectorField(m, np.sin(m.nodes)), m.zero_field())
    assert moment_pairing(CovectorPoint(0.0, 0.0), still) == pytest.approx(0.0)


def test_coadjoint_equals_cotangent_action(curved256, rng):
    m = curved256
    worst = 0.0
    for _ in range(60):
        a = random_group_element(m, rng)
        eta = CovectorPoint(float(rng.uniform(0, m.circumference)),
                            float(rng.normal()))
        lhs = coadjoint_action(a, eta)
        rhs = cotangent_action(a, eta)
        worst = max(worst, abs(lhs.base - rhs.base),
                    abs(lhs.component - rhs.component))
    assert worst < 1e-9


def test_dual_pairing_equivariance(curved256, rng):
    m = curved256
    worst = 0.0
    for _ in range(40):
        a = random_group_element(m, rng)
        z = random_algebra_element(m, rng)
        eta = CovectorPoint(float(rng.uniform(0, m.circumference)),
                            float(rng.normal()))
        lhs = moment_pairing(cotangent_action(a, eta), z)
        rhs = moment_pairing(eta, adjoint(inverse(a), z))
        worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-8


def test_derived_action_cases(flat64):
    m = flat64
    f = m.field(np.sin(m.nodes))
    eta = CovectorPoint(0.7, 1.5)
    pure = derived_action(AlgebraElement(VectorField(m, np.zeros(64)), f), eta)
    assert pure.v == pytest.approx(0.0, abs=1e-12)
    assert pure.w == pytest.approx(-np.cos(0.7), abs=1e-10)

    const = derived_action(
        AlgebraElement(VectorField(m, np.full(64, 0.4)), m.zero_field()), eta)
    assert const.v == pytest.approx(0.4, abs=1e-12)
    assert const.w == pytest.approx(0.0, abs=1e-12)


def test_derived_action_matches_flow_quotients(curved128, rng):
    m = curved128
    z = random_algebra_element(m, rng)
    eta = CovectorPoint(2.0, -0.8)
    d = derived_action(z, eta)
    ts = [2.0**-k for k in range(2, 7)]
    errs = []
    for t in ts:
        plus = cotangent_action(group_exp(scale_algebra(z, t)), eta)
        minus = cotangent_action(group_exp(scale_algebra(z, -t)), eta)
        errs.append(max(abs((plus.base - minus.base) / (2 * t) - d.v),
                        abs((plus.component - minus.component) / (2 * t) - d.w)))
    slope = np.polyfit(np.log(ts), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


@settings(max_examples=30, deadline=None)
@given(v1=st.floats(-3, 3), w1=st.floats(-3, 3),
       v2=st.floats(-3, 3), w2=st.floats(-3, 3))
def test_symplectic_form_antisymmetry(v1, w1, v2, w2):
    eta = CovectorPoint(0.0, 0.0)
    t1, t2 = PhaseTangent(v1, w1), PhaseTangent(v2, w2)
    assert symplectic_form(eta, t1, t1) == 0.0
    assert symplectic_form(eta, t1, t2) == -symplectic_form(eta, t2, t1)


def test_symplectic_canonical_pairing():
    eta = CovectorPoint(0.0, 0.0)
    assert symplectic_form(eta, PhaseTangent(1, 0), PhaseTangent(0, 1)) == 1.0


def test_symplectic_pairing_equals_bracket_pairing(curved128, rng):
    m = curved128
    worst = 0.0
    for _ in range(40):
        z1 = random_algebra_element(m, rng)
        z2 = random_algebra_element(m, rng)
        eta = CovectorPoint(float(rng.uniform(0, m.circumference)),
                            float(rng.normal()))
        lhs = symplectic_form(eta, derived_action(z1, eta),
                              derived_action(z2, eta))
        rhs = moment_pairing(eta, bracket(z1, z2))
        worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-8


def test_comoment_identity_by_central_differences(curved128, rng):
    m = curved128
    eps = 1e-5
    worst = 0.0
    for _ in range(100):
        z = random_algebra_element(m, rng)
        eta = CovectorPoint(float(rng.uniform(0, m.circumference)),
                            float(rng.normal()))
        d = derived_action(z, eta)
        dhx = (moment_pairing(CovectorPoint(eta.base + eps, eta.component), z)
               - moment_pairing(CovectorPoint(eta.base - eps, eta.component), z)) / (2 * eps)
        dhp = (moment_pairing(CovectorPoint(eta.base, eta.component + eps), z)
               - moment_pairing(CovectorPoint(eta.base, eta.component - eps), z)) / (2 * eps)
        worst = max(worst,
                    abs(dhx - symplectic_form(eta, d, PhaseTangent(1.0, 0.0))),
                    abs(dhp - symplectic_form(eta, d, PhaseTangent(0.0, 1.0))))
    assert worst < 1e-7
