import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial.legendre import leggauss

from orbitlab import (
    CutLocusError,
    GridManifold,
    ScalarField,
    differentiate,
    integrate,
    interpolate,
    riem_exp,
    riem_log,
)


def test_nodes_weights_and_total_length(curved128):
    m = curved128
    assert m.nodes[0] == 0.0
    assert np.all(np.diff(m.nodes) > 0)
    np.testing.assert_allclose(
        m.weights, (1 + 0.3 * np.cos(m.nodes)) * m.circumference / m.num_points
    )
    # total Riemannian length of 1 + 0.3 cos over a full period is 2 pi
    assert m.total_length == pytest.approx(2 * np.pi, abs=1e-12)


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        GridManifold(63)
    with pytest.raises(ValueError):
        GridManifold(64, conformal=lambda x: np.cos(x))  # vanishes
    with pytest.raises(ValueError):
        GridManifold(64, circumference=-1.0)


def test_interpolation_exact_at_nodes_and_on_trig_polys(flat64):
    m = flat64
    f = m.field(lambda x: 3.0 + np.sin(5 * x) - 2 * np.cos(11 * x))
    assert np.max(np.abs(f(m.nodes) - f.samples)) < 1e-12
    xs = np.linspace(0, m.circumference, 37, endpoint=False) + 0.0123
    exact = 3.0 + np.sin(5 * xs) - 2 * np.cos(11 * xs)
    assert np.max(np.abs(f(xs) - exact)) < 1e-12


def test_interpolate_constant(flat64):
    f = flat64.field(np.full(64, 3.0))
    assert interpolate(f, 1.2345) == pytest.approx(3.0, abs=1e-13)


def test_differentiate_sin(flat64):
    m = flat64
    d = differentiate(m.field(np.sin(m.nodes)))
    assert np.max(np.abs(d.samples - np.cos(m.nodes))) < 1e-10


def test_differentiate_complex_exponential_vs_central_differences(flat64):
    m = flat64
    f = m.field(np.exp(3j * m.nodes))
    d = differentiate(f)
    assert abs(d(0.0) - 3j) < 1e-10
    step = 1e-5
    fd = (f(step) - f(-step)) / (2 * step)
    assert abs(d(0.0) - fd) < 1e-9


def test_differentiate_matches_fourth_order_differences(curved128):
    # log-log slope of the disagreement with 4th-order central stencils
    m = curved128
    f = m.field(lambda x: np.exp(np.sin(x)))
    d = differentiate(f)
    steps = [0.1 / 2**k for k in range(5)]
    errs = []
    for s in steps:
        stencil = (-f(m.nodes + 2 * s) + 8 * f(m.nodes + s)
                   - 8 * f(m.nodes - s) + f(m.nodes - 2 * s)) / (12 * s)
        errs.append(np.max(np.abs(stencil - d(m.nodes))))
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.3)


def test_integrate_oracles(flat64):
    m = flat64
    assert integrate(m.field(np.ones(64))) == pytest.approx(2 * np.pi, abs=1e-12)
    assert integrate(m.field(np.cos(m.nodes))) == pytest.approx(0.0, abs=1e-12)
    assert integrate(m.field(np.cos(m.nodes) ** 2)) == pytest.approx(np.pi, abs=1e-12)


def test_quadrature_exact_for_band_limited_times_density(curved128):
    m = curved128
    # analytic integral of cos(3x)^2 * (1 + 0.3 cos x) over [0, 2 pi) is pi
    val = integrate(m.field(np.cos(3 * m.nodes) ** 2))
    assert val == pytest.approx(np.pi, abs=1e-10)


def test_riem_exp_flat_cases(flat64):
    assert riem_exp(flat64, 1.0, 0.0) == pytest.approx(1.0)
    assert riem_exp(flat64, 1.0, 0.5) == pytest.approx(1.5)


def test_riem_exp_curved_against_arclength_oracle(curved128):
    m = curved128
    y = riem_exp(m, 0.0, 1.0)
    t, w = leggauss(200)
    arc = np.sum(0.5 * y * w * (1 + 0.3 * np.cos(0.5 * y * (t + 1))))
    assert arc == pytest.approx(1.3 * 1.0, abs=1e-12)


def test_riem_log_flat_and_identity(flat64):
    assert riem_log(flat64, 0.0, 0.4) == pytest.approx(0.4, abs=1e-12)
    assert riem_log(flat64, 1.1, 1.1) == pytest.approx(0.0, abs=1e-12)


def test_riem_log_round_trip_curved(curved128):
    m = curved128
    v = riem_log(m, 0.0, riem_exp(m, 0.0, 0.7))
    assert v == pytest.approx(0.7, abs=1e-10)


def test_cut_locus_raises(flat64):
    with pytest.raises(CutLocusError):
        riem_log(flat64, 0.0, np.pi)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0, 2 * np.pi - 1e-9), v=st.floats(-1.5, 1.5))
def test_exp_log_round_trip_property(x, v):
    m = GridManifold(64, conformal=lambda t: 1.0 + 0.25 * np.sin(t))
    y = riem_exp(m, x, v)
    back = riem_log(m, x, y)
    gap = abs(float(riem_exp(m, x, back)) - float(y))
    assert min(gap, m.circumference - gap) < 1e-10


def test_field_validation(flat64):
    with pytest.raises(ValueError):
        ScalarField(flat64, np.ones(7))
    with pytest.raises(ValueError):
        ScalarField(flat64, np.full(64, np.nan))


def test_field_arithmetic(flat64):
    f = flat64.field(np.sin(flat64.nodes))
    g = flat64.field(np.cos(flat64.nodes))
    assert np.allclose((f + g).samples, f.samples + g.samples)
    assert np.allclose((f * 2.0).samples, 2.0 * f.samples)
    assert np.allclose((-f).samples, -f.samples)
    assert np.allclose((f - g).samples, f.samples - g.samples)
