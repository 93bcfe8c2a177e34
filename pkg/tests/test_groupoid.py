import numpy as np
import pytest

from orbitlab import (
    CutLocusError,
    DiffeoFamily,
    Diffeo,
    FiberGrid,
    FiberSymbol,
    GridMismatchError,
    L2Operator,
    PhaseSymbol,
    ScalarField,
    SupportOverflowError,
    TangentGroupoidPoint,
    TangentPoint,
    VectorField,
    deformation_chart,
    deformation_chart_inverse,
    extend_diffeo,
    extend_scalar,
    fiber_convolve,
    fiber_fourier,
    fiber_fourier_inv,
    haar_integral,
    pair_convolve,
    riem_exp,
)
from orbitlab.presets import bump_profile, gaussian_profile


@pytest.fixture(scope="module")
def mgrid(curved128):
    return FiberGrid(curved128, 4.0, 128)


def gauss_symbol(grid, width_frac=1 / 9):
    m = grid.manifold
    profile = 1.0 + 0.4 * np.cos(m.nodes)
    return FiberSymbol(grid, profile[:, None]
                       * gaussian_profile(grid.v_nodes,
                                          width_frac * grid.v_cutoff)[None, :])


def test_grid_reciprocity_guard(curved128):
    FiberGrid(curved128, 4.0, 128, momentum_step=1.0 / 8.0)  # exactly 2V dp = 1
    with pytest.raises(GridMismatchError):
        FiberGrid(curved128, 4.0, 128, momentum_step=0.2)


def test_band_enforcement(mgrid):
    wide = np.ones((mgrid.manifold.num_points, mgrid.fiber_points))
    with pytest.raises(SupportOverflowError):
        FiberSymbol(mgrid, wide)
    b = gauss_symbol(mgrid)
    outside = np.abs(mgrid.v_nodes) >= mgrid.band
    assert np.max(np.abs(b.values[:, outside])) == 0.0


def test_round_trips(mgrid):
    b = gauss_symbol(mgrid)
    a = fiber_fourier_inv(b)
    assert np.max(np.abs(fiber_fourier(a).values - b.values)) < 1e-9
    assert np.max(np.abs(fiber_fourier_inv(fiber_fourier(a)).values
                         - a.values)) < 1e-9


def test_real_even_symbol_transforms_to_real_even(mgrid):
    profile = np.ones(mgrid.manifold.num_points)
    a = PhaseSymbol(mgrid, profile[:, None]
                    * gaussian_profile(mgrid.p_nodes, 0.5)[None, :])
    b = fiber_fourier(a)
    assert np.max(np.abs(b.values.imag)) < 1e-12
    # v_nodes[M-j] = -v_nodes[j] for j >= 1, so evenness mirrors columns
    mirrored = b.values[:, 1:][:, ::-1]
    assert np.max(np.abs(b.values[:, 1:] - mirrored)) < 1e-9


def test_gaussian_self_duality_flat(flat128):
    grid = FiberGrid(flat128, 4.0, 128)
    u = 1 + 0.4 * np.cos(flat128.nodes)
    a = PhaseSymbol(grid, u[:, None] * np.exp(-np.pi * grid.p_nodes**2)[None, :])
    b = fiber_fourier(a)
    oracle = u[:, None] * np.exp(-np.pi * grid.v_nodes**2)[None, :]
    assert np.max(np.abs(b.values - oracle)) < 1e-8


def test_parseval(mgrid):
    b = gauss_symbol(mgrid)
    a = fiber_fourier_inv(b)
    c = mgrid.manifold.conformal.samples.real
    lhs = np.sum(np.abs(b.values) ** 2 * c[:, None] * mgrid.v_step)
    rhs = np.sum(np.abs(a.values) ** 2 * mgrid.p_step / c[:, None])
    assert abs(lhs - rhs) / lhs < 1e-8


def test_convolution_identities(mgrid):
    m = mgrid.manifold
    c = m.conformal.samples.real
    b1 = FiberSymbol(mgrid, (1 + 0.4 * np.cos(m.nodes))[:, None]
                     * bump_profile(mgrid.v_nodes, 0.8)[None, :])
    b2 = FiberSymbol(mgrid, (1 + 0.3 * np.sin(m.nodes))[:, None]
                     * bump_profile(mgrid.v_nodes, 0.7, 0.2)[None, :])
    conv = fiber_convolve(b1, b2)

    # pointwise multiplication on the dual side
    prod = PhaseSymbol(mgrid, fiber_fourier_inv(b1).values
                       * fiber_fourier_inv(b2).values)
    assert np.max(np.abs(conv.values - fiber_fourier(prod).values)) < 1e-8
    assert np.max(np.abs(fiber_fourier_inv(conv).values - prod.values)) < 1e-8

    # quadratic brute force on a few rows
    M = mgrid.fiber_points
    for i in (0, 41, 97):
        for l in range(0, M, 29):
            acc = 0.0
            for j in range(M):
                k = l - j + M // 2
                if 0 <= k < M:
                    acc += b1.values[i, j] * b2.values[i, k]
            acc *= c[i] * mgrid.v_step
            assert conv.values[i, l] == pytest.approx(acc, abs=1e-10)

    # discrete delta is a convolution identity
    delta = np.zeros((m.num_points, M))
    delta[:, M // 2] = 1.0 / (c * mgrid.v_step)
    assert np.max(np.abs(fiber_convolve(b1, FiberSymbol(mgrid, delta)).values
                         - b1.values)) < 1e-9


def test_convolution_support_guard(mgrid):
    wide = FiberSymbol(mgrid, np.ones(mgrid.manifold.num_points)[:, None]
                       * bump_profile(mgrid.v_nodes, 2.4)[None, :])
    with pytest.raises(SupportOverflowError):
        fiber_convolve(wide, wide)


def test_grid_mismatch_between_symbols(curved128, mgrid):
    other = FiberGrid(curved128, 2.0, 128)
    b1 = gauss_symbol(mgrid)
    b2 = gauss_symbol(other)
    with pytest.raises(GridMismatchError):
        fiber_convolve(b1, b2)


def test_pair_convolution_matches_composition(curved128, rng):
    m = curved128
    k1 = L2Operator(m, rng.normal(size=(128, 128)))
    k2 = L2Operator(m, rng.normal(size=(128, 128)))
    conv = pair_convolve(k1, k2)
    assert np.max(np.abs(conv.kernel
                         - (k1.kernel * m.weights[None, :]) @ k2.kernel)) == 0.0
    # involution reverses order
    lhs = pair_convolve(k1, k2).adjoint()
    rhs = pair_convolve(k2.adjoint(), k1.adjoint())
    assert np.max(np.abs(lhs.kernel - rhs.kernel)) < 1e-12


def test_chart_cases(curved128, flat64):
    m = curved128
    pt = deformation_chart(m, 0.0, 1.0, 2.5)
    assert pt.is_boundary and pt.payload == TangentPoint(1.0, 2.5)

    diag = deformation_chart(m, 0.25, 1.0, 0.0)
    x, y = diag.payload
    assert x == pytest.approx(1.0) and y == pytest.approx(1.0, abs=1e-12)

    flat_pt = deformation_chart(flat64, 0.1, 1.0, 0.7)
    x, y = flat_pt.payload
    assert y == pytest.approx(1.0 - 0.1 * 0.7, abs=1e-12)


def test_chart_inverse_round_trip_and_cut_locus(curved128):
    m = curved128
    v = deformation_chart_inverse(m, 0.15, 1.0,
                                  float(riem_exp(m, 1.0, -0.15 * 1.9)))
    assert v == pytest.approx(1.9, abs=1e-10)
    assert deformation_chart_inverse(m, 0.0, 1.0, 0.33) == pytest.approx(0.33)
    with pytest.raises(CutLocusError):
        deformation_chart_inverse(m, 1.0, 0.0, np.pi)


def test_groupoid_point_validation():
    with pytest.raises(ValueError):
        TangentGroupoidPoint(0.0, (1.0, 2.0))
    with pytest.raises(ValueError):
        TangentGroupoidPoint(0.5, TangentPoint(0.0, 1.0))
    with pytest.raises(ValueError):
        TangentGroupoidPoint(2.0, (1.0, 2.0))


def test_haar_zero_function(mgrid):
    assert haar_integral(lambda p: 0.0, 0.3, 1.0, mgrid) == 0.0


def test_haar_flat_gaussian(flat128):
    # sigma small enough that the tail beyond the velocity cutoff is ~1e-12
    grid = FiberGrid(flat128, 4.0, 128)
    sigma = 0.55

    def fn(p):
        if p.is_boundary:
            return np.exp(-p.payload.component**2 / (2 * sigma**2))
        x, y = p.payload
        d = (x - y + np.pi) % (2 * np.pi) - np.pi
        return np.exp(-(d / p.h) ** 2 / (2 * sigma**2))

    target = np.sqrt(2 * np.pi) * sigma
    for h in (0.5, 0.25, 0.125):
        assert haar_integral(fn, h, 1.0, grid) == pytest.approx(target, abs=1e-9)
    assert haar_integral(fn, 0.0, 1.0, grid) == pytest.approx(target, abs=1e-9)


def test_extend_scalar(curved128, mgrid):
    g = lambda h, x: np.sin(x) * (1 + 2 * h)
    boundary = extend_scalar(g, TangentGroupoidPoint(0.0, TangentPoint(1.0, 7.0)))
    assert boundary == pytest.approx(np.sin(1.0))
    interior = extend_scalar(g, TangentGroupoidPoint(0.5, (1.0, 2.0)))
    assert interior == pytest.approx(2 * np.sin(1.0))


def test_extend_constant_family_is_identity(curved128):
    m = curved128
    fam = DiffeoFamily.from_h_polynomial(m, [m.zero_field()])
    pt = TangentGroupoidPoint(0.0, TangentPoint(1.5, -0.4))
    out = extend_diffeo(fam, pt)
    assert out.payload.base == pytest.approx(1.5)
    assert out.payload.component == pytest.approx(-0.4)
    inner = extend_diffeo(fam, TangentGroupoidPoint(0.3, (1.0, 2.0)))
    assert inner.payload == (1.0, 2.0)


def test_extend_backward_flow_boundary_value(curved128):
    m = curved128
    field = VectorField(m, 0.3 * np.sin(m.nodes))
    fam = DiffeoFamily.from_backward_flow(field)
    out = extend_diffeo(fam, TangentGroupoidPoint(0.0, TangentPoint(1.0, 2.0)))
    assert out.payload.base == pytest.approx(1.0)
    assert out.payload.component == pytest.approx(2.0 - 0.3 * np.sin(1.0), abs=1e-12)


def test_extend_h_polynomial_boundary_derivative(curved128):
    m = curved128
    u0 = ScalarField(m, 0.1 * np.sin(m.nodes))
    u1 = ScalarField(m, 0.2 * np.cos(m.nodes))
    fam = DiffeoFamily.from_h_polynomial(m, [u0, u1])
    out = extend_diffeo(fam, TangentGroupoidPoint(0.0, TangentPoint(1.0, 0.5)))
    jac = 1.0 + 0.1 * np.cos(1.0)
    assert out.payload.base == pytest.approx(float(Diffeo(m, u0)(1.0)))
    assert out.payload.component == pytest.approx(
        0.2 * np.cos(1.0) + jac * 0.5, abs=1e-10)


def test_extension_chart_continuity(curved128):
    m = curved128
    fam = DiffeoFamily.from_backward_flow(VectorField(m, 0.3 * np.sin(m.nodes)))
    boundary = extend_diffeo(fam, TangentGroupoidPoint(0.0, TangentPoint(1.0, 2.0)))
    hs = [2.0**-k for k in range(2, 8)]
    errs = []
    for h in hs:
        interior = extend_diffeo(fam, deformation_chart(m, h, 1.0, 2.0))
        x, y = interior.payload
        errs.append(abs(deformation_chart_inverse(m, h, x, y)
                        - boundary.payload.component))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope > 0.9
