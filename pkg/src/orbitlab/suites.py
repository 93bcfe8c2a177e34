"""Verification suites: each module's invariant list as executable checks.

A check records a scalar ``value`` compared against a ``threshold`` in one
of two modes: ``max`` checks pass when the value (a residual) stays at or
below the threshold, ``min`` checks pass when the value (a fitted slope or
a separation) stays at or above it. Suites are deterministic functions of
the configuration seed; every paper-mapped identity in the coverage table
is owned by exactly one check.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import coadjoint as co
from . import groupoid as gp
from . import induction as ind
from . import lie_group as lg
from . import presets
from . import quantization as qz
from . import semiclassics as sc
from .config import ExperimentConfig, UnknownSuiteError
from .manifold import (
    CotangentPoint,
    GridManifold,
    ScalarField,
    TangentPoint,
    VectorField,
    differentiate,
    integrate,
    interpolate,
    riem_exp,
    riem_log,
)

__all__ = [
    "CheckResult",
    "SuiteResult",
    "SUITE_NAMES",
    "run_suite",
    "coverage_table",
]

SUITE_NAMES = ("group", "coadjoint", "quantization", "induction", "groupoid",
               "semiclassics")


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    description: str
    value: float
    threshold: float
    mode: str  # 'max': pass iff value <= threshold; 'min': pass iff value >= threshold
    anchor: str | None = None

    @property
    def passed(self) -> bool:
        if self.mode == "max":
            return bool(self.value <= self.threshold)
        return bool(self.value >= self.threshold)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        rel = "<=" if self.mode == "max" else ">="
        return (f"[{status}] {self.check_id}: value={self.value:.12e} "
                f"{rel} {self.threshold:.12e} ({self.description})")


@dataclass(frozen=True)
class SuiteResult:
    name: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        status = "PASS" if self.passed else "FAIL"
        out.append(f"suite {self.name}: {status} "
                   f"({sum(c.passed for c in self.checks)}/{len(self.checks)})")
        return out


def _rng(cfg: ExperimentConfig, lane: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, lane])


def _manifold(cfg: ExperimentConfig) -> GridManifold:
    return presets.make_manifold(cfg.num_points, cfg.circumference, cfg.conformal)


def _sup(arr) -> float:
    return float(np.max(np.abs(arr)))


def _alg_add(z1, z2):
    return lg.AlgebraElement(
        VectorField(z1.manifold, z1.field.samples + z2.field.samples),
        ScalarField(z1.manifold, z1.func.samples + z2.func.samples),
    )


def _alg_sup(z) -> float:
    return max(_sup(z.field.samples), _sup(z.func.samples))


def _elem_dist(a, b) -> float:
    return max(
        _sup(a.diffeo.displacement.samples - b.diffeo.displacement.samples),
        _sup(a.func.samples - b.func.samples),
    )


def _fd_slope(ts, errs) -> float:
    return float(np.polyfit(np.log(ts), np.log(np.clip(errs, 1e-16, None)), 1)[0])


# ---------------------------------------------------------------------------
# group suite
# ---------------------------------------------------------------------------


def suite_group(cfg: ExperimentConfig) -> SuiteResult:
    m = _manifold(cfg)
    rng = _rng(cfg, 1)
    checks = []

    worst = 0.0
    for _ in range(8):
        a = presets.random_group_element(m, rng)
        b = presets.random_group_element(m, rng)
        c = presets.random_group_element(m, rng)
        worst = max(worst, _elem_dist(lg.multiply(lg.multiply(a, b), c),
                                      lg.multiply(a, lg.multiply(b, c))))
    checks.append(CheckResult(
        "group.associativity", "product of random triples associates",
        worst, 1e-8, "max", anchor="semidirect-product-law"))

    worst = 0.0
    for _ in range(8):
        a = presets.random_group_element(m, rng)
        worst = max(worst, _elem_dist(lg.multiply(a, lg.inverse(a)),
                                      lg.GroupElement.identity(m)))
    checks.append(CheckResult(
        "group.inverse", "a * a^{-1} is the identity pair",
        worst, 1e-9, "max", anchor="semidirect-inverse-law"))

    worst = 0.0
    for _ in range(4):
        z = presets.random_algebra_element(m, rng)
        lhs = lg.multiply(lg.group_exp(lg.scale_algebra(z, 0.3)),
                          lg.group_exp(lg.scale_algebra(z, 0.45)))
        rhs = lg.group_exp(lg.scale_algebra(z, 0.75))
        worst = max(worst, _elem_dist(lhs, rhs))
    checks.append(CheckResult(
        "group.one_parameter", "exp(tZ) exp(sZ) = exp((t+s)Z)",
        worst, 1e-8, "max", anchor="one-parameter-subgroup"))

    # Scalar slot of the exponential against the substitution oracle: for a
    # constant field on the flat circle the pullback average telescopes to a
    # sliding window integral of f.
    flat = GridManifold(cfg.num_points, cfg.circumference)
    speed = 0.8
    f = presets.random_scalar_field(flat, rng, 0.5)
    ex = lg.group_exp(lg.AlgebraElement(
        VectorField(flat, np.full(flat.num_points, speed)), f))
    t_nodes, t_weights = np.polynomial.legendre.leggauss(64)
    resid = 0.0
    for x in flat.nodes[:: flat.num_points // 16]:
        s = x - speed + 0.5 * speed * (t_nodes + 1.0)
        oracle = float(np.sum(0.5 * speed * t_weights * f(s).real)) / speed
        resid = max(resid, abs(float(interpolate(ex.func, x)) - oracle))
    # Quadrature refinement stability of the scalar slot (flow pullbacks).
    z = presets.random_algebra_element(m, rng)
    coarse = lg.group_exp(z)
    fine_nodes, fine_weights = np.polynomial.legendre.leggauss(24)
    acc = np.zeros(m.num_points)
    neg = VectorField(m, -z.field.samples)
    snaps = lg.flow_at_times(neg, 0.5 * (fine_nodes + 1.0))
    for w, snap in zip(0.5 * fine_weights, snaps):
        acc = acc + w * interpolate(z.func, snap(m.nodes)).real
    resid = max(resid, _sup(coarse.func.samples - acc))
    checks.append(CheckResult(
        "group.exp_scalar_slot", "exponential scalar slot matches quadrature oracle",
        resid, 1e-9, "max", anchor="exponential-flow-average"))

    worst = 0.0
    for _ in range(6):
        z1 = presets.random_algebra_element(m, rng)
        z2 = presets.random_algebra_element(m, rng)
        z3 = presets.random_algebra_element(m, rng)
        jac = _alg_add(_alg_add(lg.bracket(z1, lg.bracket(z2, z3)),
                                lg.bracket(z2, lg.bracket(z3, z1))),
                       lg.bracket(z3, lg.bracket(z1, z2)))
        worst = max(worst, _alg_sup(jac))
    checks.append(CheckResult(
        "group.jacobi", "bracket satisfies the Jacobi identity",
        worst, 1e-8, "max", anchor="semidirect-lie-bracket"))

    z1 = presets.random_algebra_element(m, rng)
    z2 = presets.random_algebra_element(m, rng)
    br = lg.bracket(z1, z2)
    ts = [2.0 ** -k for k in range(2, 7)]
    errs = []
    for t in ts:
        plus = lg.adjoint(lg.group_exp(lg.scale_algebra(z1, t)), z2)
        minus = lg.adjoint(lg.group_exp(lg.scale_algebra(z1, -t)), z2)
        fd = lg.AlgebraElement(
            VectorField(m, (plus.field.samples - minus.field.samples) / (2 * t)),
            ScalarField(m, (plus.func.samples - minus.func.samples) / (2 * t)),
        )
        errs.append(max(_sup(fd.field.samples - br.field.samples),
                        _sup(fd.func.samples - br.func.samples)))
    checks.append(CheckResult(
        "group.bracket_from_adjoint",
        "bracket is the derivative of the adjoint orbit (slope 2 +- 0.2)",
        abs(_fd_slope(ts, errs) - 2.0), 0.2, "max"))

    a = presets.random_group_element(m, rng)
    z = presets.random_algebra_element(m, rng)
    ad = lg.adjoint(a, z)
    a_inv = lg.inverse(a)
    errs = []
    fd_fields = []
    for t in ts:
        plus = lg.multiply(a, lg.multiply(lg.group_exp(lg.scale_algebra(z, t)), a_inv))
        minus = lg.multiply(a, lg.multiply(lg.group_exp(lg.scale_algebra(z, -t)), a_inv))
        fd_x = (plus.diffeo.displacement.samples - minus.diffeo.displacement.samples) / (2 * t)
        fd_f = (plus.func.samples - minus.func.samples) / (2 * t)
        fd_fields.append((fd_x, fd_f))
        errs.append(max(_sup(fd_x - ad.field.samples), _sup(fd_f - ad.func.samples)))
    checks.append(CheckResult(
        "group.adjoint_slope",
        "adjoint formula vs difference-quotient conjugation (slope 2 +- 0.2)",
        abs(_fd_slope(ts, errs) - 2.0), 0.2, "max", anchor="adjoint-action-formula"))
    # Second-order Richardson extrapolation of the conjugation quotients.
    (x1, f1), (x2, f2) = fd_fields[-2], fd_fields[-1]
    extrap = max(_sup((4 * x2 - x1) / 3 - ad.field.samples),
                 _sup((4 * f2 - f1) / 3 - ad.func.samples))
    checks.append(CheckResult(
        "group.adjoint_extrapolated",
        "extrapolated conjugation quotients match the adjoint formula",
        extrap, 1e-6, "max"))

    worst = 0.0
    for _ in range(4):
        a = presets.random_group_element(m, rng)
        b = presets.random_group_element(m, rng)
        z = presets.random_algebra_element(m, rng)
        lhs = lg.adjoint(lg.multiply(a, b), z)
        rhs = lg.adjoint(a, lg.adjoint(b, z))
        worst = max(worst, _alg_sup(_alg_add(lhs, lg.scale_algebra(rhs, -1.0))))
    checks.append(CheckResult(
        "group.adjoint_homomorphism", "Ad(ab) = Ad(a) Ad(b)",
        worst, 1e-8, "max"))

    # Closed-form flow of the separable field sin(x) d/dx on the flat circle.
    flow_map = lg.flow(VectorField(flat, np.sin(flat.nodes)), 0.7)
    x0 = float(flat.nodes[flat.num_points // 4])
    exact = 2.0 * np.arctan(np.exp(0.7) * np.tan(0.5 * x0))
    checks.append(CheckResult(
        "group.flow_separable", "flow of sin(x) d/dx matches the separable solution",
        abs(float(flow_map(x0)) - exact), 1e-9, "max", anchor="flow-generator"))

    return SuiteResult("group", tuple(checks))


# ---------------------------------------------------------------------------
# coadjoint suite
# ---------------------------------------------------------------------------


def suite_coadjoint(cfg: ExperimentConfig) -> SuiteResult:
    m = _manifold(cfg)
    rng = _rng(cfg, 2)
    checks = []

    elements = [presets.random_group_element(m, rng) for _ in range(50)]
    algebras = [presets.random_algebra_element(m, rng) for _ in range(50)]

    worst_match = 0.0
    worst_equiv = 0.0
    for i in range(1000):
        a = elements[i % 50]
        eta = co.CovectorPoint(float(rng.uniform(0, m.circumference)),
                               float(rng.normal()))
        via_action = co.cotangent_action(a, eta)
        via_pairing = co.coadjoint_action(a, eta)
        worst_match = max(worst_match,
                          abs(via_action.base - via_pairing.base),
                          abs(via_action.component - via_pairing.component))
        z = algebras[(i * 7 + 3) % 50]
        lhs = co.moment_pairing(via_action, z)
        rhs = co.moment_pairing(eta, lg.adjoint(lg.inverse(a), z))
        worst_equiv = max(worst_equiv, abs(lhs - rhs))
    checks.append(CheckResult(
        "coadjoint.matches_action",
        "dual-pairing coadjoint action equals the covector pushforward (1000 pairs)",
        worst_match, 1e-9, "max", anchor="coadjoint-orbit-action"))
    checks.append(CheckResult(
        "coadjoint.equivariance",
        "moment pairing intertwines the actions (1000 pairs)",
        worst_equiv, 1e-8, "max", anchor="moment-map-equivariance"))

    eps = 1e-5
    worst_com = 0.0
    worst_symp = 0.0
    for i in range(1000):
        eta = co.CovectorPoint(float(rng.uniform(0, m.circumference)),
                               float(rng.normal()))
        z = algebras[i % 50]
        d = co.derived_action(z, eta)
        dhx = (co.moment_pairing(co.CovectorPoint(eta.base + eps, eta.component), z)
               - co.moment_pairing(co.CovectorPoint(eta.base - eps, eta.component), z)) / (2 * eps)
        dhp = (co.moment_pairing(co.CovectorPoint(eta.base, eta.component + eps), z)
               - co.moment_pairing(co.CovectorPoint(eta.base, eta.component - eps), z)) / (2 * eps)
        worst_com = max(
            worst_com,
            abs(dhx - co.symplectic_form(eta, d, co.PhaseTangent(1.0, 0.0))),
            abs(dhp - co.symplectic_form(eta, d, co.PhaseTangent(0.0, 1.0))),
        )
        z2 = algebras[(i * 11 + 5) % 50]
        lhs = co.symplectic_form(eta, co.derived_action(z, eta),
                                 co.derived_action(z2, eta))
        rhs = co.moment_pairing(eta, lg.bracket(z, z2))
        worst_symp = max(worst_symp, abs(lhs - rhs))
    checks.append(CheckResult(
        "coadjoint.comoment",
        "difference quotients of the pairing match the symplectic gradient",
        worst_com, 1e-7, "max", anchor="comoment-hamiltonian"))
    checks.append(CheckResult(
        "coadjoint.symplectic_pairing",
        "two-form on derived directions equals the bracket pairing",
        worst_symp, 1e-8, "max", anchor="orbit-symplectic-form"))

    z = presets.random_algebra_element(m, rng)
    eta = co.CovectorPoint(float(rng.uniform(0, m.circumference)), float(rng.normal()))
    d = co.derived_action(z, eta)
    ts = [2.0 ** -k for k in range(2, 7)]
    errs = []
    for t in ts:
        plus = co.cotangent_action(lg.group_exp(lg.scale_algebra(z, t)), eta)
        minus = co.cotangent_action(lg.group_exp(lg.scale_algebra(z, -t)), eta)
        errs.append(max(abs((plus.base - minus.base) / (2 * t) - d.v),
                        abs((plus.component - minus.component) / (2 * t) - d.w)))
    checks.append(CheckResult(
        "coadjoint.derived_action_slope",
        "derived action matches flow difference quotients (slope 2 +- 0.2)",
        abs(_fd_slope(ts, errs) - 2.0), 0.2, "max", anchor="derived-cotangent-action"))

    # Transitivity: a rotation moves the base point, a linear phase fixes
    # the momentum gap.
    worst = 0.0
    ang = 2.0 * np.pi / m.circumference
    for _ in range(100):
        x1, x2 = rng.uniform(0, m.circumference, size=2)
        p1, p2 = rng.normal(size=2)
        shift = x2 - x1
        f = ScalarField(m, ((p1 - p2) / ang) * np.sin(ang * (m.nodes - x2)))
        mover = lg.GroupElement(lg.Diffeo.rotation(m, shift), f)
        out = co.cotangent_action(mover, co.CovectorPoint(x1, p1))
        worst = max(worst,
                    abs(m.wrap(out.base - x2)) if abs(m.wrap(out.base - x2)) < m.circumference / 2
                    else m.circumference - abs(m.wrap(out.base - x2)),
                    abs(out.component - p2))
    checks.append(CheckResult(
        "coadjoint.transitivity",
        "constructed rotation plus linear phase maps any covector to any other",
        worst, 1e-9, "max", anchor="orbit-transitivity"))

    # Separation: a fixed finite family of pairings distinguishes distinct
    # lattice covectors.
    family = [
        lg.AlgebraElement(VectorField(m, np.ones(m.num_points)), m.zero_field()),
        lg.AlgebraElement(VectorField(m, np.zeros(m.num_points)),
                          ScalarField(m, np.sin(ang * m.nodes))),
        lg.AlgebraElement(VectorField(m, np.zeros(m.num_points)),
                          ScalarField(m, np.cos(ang * m.nodes))),
        lg.AlgebraElement(VectorField(m, np.sin(ang * m.nodes)), m.zero_field()),
    ]
    xs = m.nodes[:: m.num_points // 16]
    ps = np.linspace(-2.0, 2.0, 9)
    covs = [co.CovectorPoint(float(x), float(p)) for x in xs for p in ps]
    pairings = np.array([[co.moment_pairing(c, zk) for zk in family] for c in covs])
    min_sep = np.inf
    for i in range(len(covs)):
        gaps = np.abs(pairings[i + 1:] - pairings[i]).max(axis=1)
        if gaps.size:
            min_sep = min(min_sep, float(gaps.min()))
    checks.append(CheckResult(
        "coadjoint.separation",
        "fixed test family separates distinct lattice covectors",
        float(min_sep), 1e-9, "min", anchor="moment-map-injectivity"))

    return SuiteResult("coadjoint", tuple(checks))


# ---------------------------------------------------------------------------
# quantization suite
# ---------------------------------------------------------------------------


def suite_quantization(cfg: ExperimentConfig) -> SuiteResult:
    m = _manifold(cfg)
    rng = _rng(cfg, 3)
    checks = []
    h = 0.5

    worst = 0.0
    for _ in range(20):
        a = presets.random_group_element(m, rng)
        psi = presets.random_wavefunction(m, rng)
        moved = qz.unitary_rep(h, a).apply(psi)
        worst = max(worst, abs(qz.l2_norm(moved, m) - qz.l2_norm(psi, m)))
    checks.append(CheckResult(
        "quantization.unitarity", "representation preserves the quadrature norm",
        worst, 1e-8, "max", anchor="unitary-representation"))

    worst = 0.0
    for _ in range(10):
        a = presets.random_group_element(m, rng)
        b = presets.random_group_element(m, rng)
        psi = presets.random_wavefunction(m, rng)
        lhs = qz.unitary_rep(h, lg.multiply(a, b)).apply(psi)
        rhs = qz.unitary_rep(h, a).apply(qz.unitary_rep(h, b).apply(psi))
        worst = max(worst, _sup(lhs - rhs))
    checks.append(CheckResult(
        "quantization.homomorphism", "rep of a product is the composition",
        worst, 1e-7, "max", anchor="representation-homomorphism"))

    z = presets.random_algebra_element(m, rng, f_amplitude=0.3)
    psi = presets.random_wavefunction(m, rng)
    target = -(2j * np.pi / h) * qz.quantize_affine(h, z).apply(psi)

    def quotient(t):
        up = qz.unitary_rep(h, lg.group_exp(lg.scale_algebra(z, t))).apply(psi)
        dn = qz.unitary_rep(h, lg.group_exp(lg.scale_algebra(z, -t))).apply(psi)
        return (up - dn) / (2 * t)

    ts = [2.0 ** -k for k in range(2, 8)]
    quots = [quotient(t) for t in ts]
    errs = [_sup(q - target) for q in quots]
    checks.append(CheckResult(
        "quantization.derived_rep_slope",
        "difference quotients approach the quantized generator (slope 2 +- 0.2)",
        abs(_fd_slope(ts, errs) - 2.0), 0.2, "max",
        anchor="derived-representation-quantization"))
    # Two Richardson levels kill the t^2 and t^4 terms of the quotients.
    r1 = [(4 * quots[i + 1] - quots[i]) / 3 for i in range(len(quots) - 1)]
    r2 = (16 * r1[-1] - r1[-2]) / 15
    checks.append(CheckResult(
        "quantization.derived_rep_extrapolated",
        "extrapolated quotients match the quantized generator",
        _sup(r2 - target), 1e-6, "max"))

    phi = presets.random_diffeo(m, rng)
    xs = m.nodes[:: m.num_points // 32]
    delta = 1e-4
    rn = qz.radon_nikodym(phi, xs)
    pulled = np.array([
        m.arclength(phi.inverse_at(x + delta)) - m.arclength(phi.inverse_at(x - delta))
        for x in xs])
    plain = np.array([m.arclength(x + delta) - m.arclength(x - delta) for x in xs])
    checks.append(CheckResult(
        "quantization.radon_nikodym",
        "density formula vs measure-pullback difference quotients (relative)",
        _sup((rn - pulled / plain) / rn), 1e-6, "max",
        anchor="radon-nikodym-density"))

    worst = 0.0
    for _ in range(6):
        z1 = presets.random_algebra_element(m, rng)
        op = qz.quantize_affine(h, z1)
        psi1 = presets.random_wavefunction(m, rng)
        chi = presets.random_wavefunction(m, rng)
        worst = max(worst, abs(qz.l2_inner(op.apply(psi1), chi, m)
                               - qz.l2_inner(psi1, op.apply(chi), m)))
    checks.append(CheckResult(
        "quantization.formal_symmetry",
        "quantized affine Hamiltonians are symmetric for the quadrature pairing",
        worst, 1e-8, "max", anchor="quantized-operator-symmetry"))

    worst = 0.0
    scale = -(2j * np.pi / h)
    for _ in range(4):
        z1 = presets.random_algebra_element(m, rng)
        z2 = presets.random_algebra_element(m, rng)
        q1 = qz.quantize_affine(h, z1)
        q2 = qz.quantize_affine(h, z2)
        qb = qz.quantize_affine(h, lg.bracket(z1, z2))
        psi1 = presets.random_wavefunction(m, rng)
        lhs = scale * scale * (q1.apply(q2.apply(psi1)) - q2.apply(q1.apply(psi1)))
        worst = max(worst, _sup(lhs - scale * qb.apply(psi1)))
    checks.append(CheckResult(
        "quantization.bracket_compatibility",
        "commutators of generators realize the bracket",
        worst, 1e-5, "max", anchor="quantization-bracket-compatibility"))

    a = presets.random_group_element(m, rng)
    rep = qz.unitary_rep(h, a)
    psi = presets.random_wavefunction(m, rng)
    checks.append(CheckResult(
        "quantization.lazy_materialization",
        "lazy multiplier/shift/scale action agrees with the dense kernel",
        _sup(rep.materialize().apply(psi) - rep.apply(psi)), 1e-10, "max"))

    ident = qz.L2Operator.identity(m)
    u = presets.random_scalar_field(m, rng, 1.0)
    v = presets.random_scalar_field(m, rng, 1.0)
    rank_one = qz.L2Operator(m, np.outer(u.samples, v.samples))
    resid = max(
        abs(qz.operator_trace(ident) - m.num_points),
        abs(qz.operator_trace(rank_one)
            - integrate(ScalarField(m, u.samples * v.samples))),
    )
    checks.append(CheckResult(
        "quantization.kernel_trace",
        "diagonal quadrature traces: identity kernel and rank-one oracle",
        resid, 1e-8, "max", anchor="kernel-trace-quadrature"))

    return SuiteResult("quantization", tuple(checks))


# ---------------------------------------------------------------------------
# induction suite
# ---------------------------------------------------------------------------


def suite_induction(cfg: ExperimentConfig) -> SuiteResult:
    m = _manifold(cfg)
    rng = _rng(cfg, 4)
    checks = []
    basepoint = float(m.nodes[m.num_points // 5])
    h = 0.5

    psi = presets.random_wavefunction(m, rng)
    vec = ind.InducedVector(psi, basepoint, h)

    descended = ind.descend(vec, lambda g: ind.lift(vec, g))
    checks.append(CheckResult(
        "induction.bijection",
        "descending the lift recovers the wavefunction at the nodes",
        _sup(descended.samples - psi.samples), 1e-12, "max",
        anchor="induced-function-space"))

    worst = 0.0
    for _ in range(5):
        a = presets.random_group_element(m, rng)
        b = presets.random_group_element(m, rng)
        one_shot = ind.translate_descend(vec, lg.multiply(a, b))
        inner = ind.InducedVector(ind.translate_descend(vec, b), basepoint, h)
        two_step = ind.translate_descend(inner, a)
        worst = max(worst, _sup(one_shot.samples - two_step.samples))
    checks.append(CheckResult(
        "induction.translation_homomorphism",
        "translating by a product equals translating twice",
        worst, 1e-9, "max", anchor="induced-translation-law"))

    worst = 0.0
    for _ in range(50):
        stab = presets.stabilizer_element(m, rng, basepoint)
        a = presets.random_group_element(m, rng)
        lhs = ind.lift(vec, lg.multiply(a, stab))
        character = np.exp(2j * np.pi * float(interpolate(stab.func, basepoint)) / h)
        worst = max(worst, abs(lhs - character * ind.lift(vec, a)))
    checks.append(CheckResult(
        "induction.stabilizer_equivariance",
        "lifts transform by the scalar character under basepoint stabilizers",
        worst, 1e-10, "max", anchor="stabilizer-character-equivariance"))

    worst = 0.0
    for _ in range(10):
        a = presets.random_group_element(m, rng)
        translated = ind.translate_descend(vec, a)
        half_density = np.sqrt(qz.radon_nikodym(a.diffeo, m.nodes))
        via_rep = qz.unitary_rep(h, a).apply(psi)
        worst = max(worst, _sup(translated.samples * half_density - via_rep))
    checks.append(CheckResult(
        "induction.recovers_representation",
        "descended translates times the half-density equal the unitary action",
        worst, 1e-10, "max", anchor="induction-recovers-representation"))

    return SuiteResult("induction", tuple(checks))


# ---------------------------------------------------------------------------
# groupoid suite
# ---------------------------------------------------------------------------


def suite_groupoid(cfg: ExperimentConfig) -> SuiteResult:
    m = _manifold(cfg)
    rng = _rng(cfg, 5)
    checks = []
    grid = gp.FiberGrid(m, cfg.velocity_cutoff, cfg.fiber_points)

    b = presets.random_symbol(grid, rng)
    a_sym = gp.fiber_fourier_inv(b)
    round_b = gp.fiber_fourier(a_sym)
    round_a = gp.fiber_fourier_inv(gp.fiber_fourier(a_sym))
    checks.append(CheckResult(
        "groupoid.fourier_round_trip",
        "fiber transforms invert each other on the reciprocity grids",
        max(_sup(round_b.values - b.values), _sup(round_a.values - a_sym.values)),
        1e-9, "max", anchor="fiberwise-fourier-inversion"))

    c = m.conformal.samples.real
    lhs = np.sum(np.abs(b.values) ** 2 * c[:, None] * grid.v_step)
    rhs = np.sum(np.abs(a_sym.values) ** 2 * grid.p_step / c[:, None])
    checks.append(CheckResult(
        "groupoid.parseval",
        "fiber and dual quadratures carry equal energy",
        abs(lhs - rhs) / abs(lhs), 1e-8, "max",
        anchor="fiberwise-fourier-isometry"))

    width = 0.2 * grid.v_cutoff
    b1 = gp.FiberSymbol(grid, (1 + 0.4 * np.cos(m.nodes))[:, None]
                        * presets.bump_profile(grid.v_nodes, width)[None, :])
    b2 = gp.FiberSymbol(grid, (1 + 0.3 * np.sin(m.nodes))[:, None]
                        * presets.bump_profile(grid.v_nodes, width, 0.05 * grid.v_cutoff)[None, :])
    conv = gp.fiber_convolve(b1, b2)
    prod = gp.PhaseSymbol(grid, gp.fiber_fourier_inv(b1).values
                          * gp.fiber_fourier_inv(b2).values)
    resid = _sup(conv.values - gp.fiber_fourier(prod).values)
    resid = max(resid, _sup(gp.fiber_fourier_inv(conv).values - prod.values))
    checks.append(CheckResult(
        "groupoid.convolution_to_multiplication",
        "fiber convolution is dual to pointwise symbol multiplication",
        resid, 1e-8, "max", anchor="convolution-to-multiplication"))

    # Pair-groupoid convolution: associativity plus an independent cubic
    # triple-loop on a small grid.
    small = presets.make_manifold(32, cfg.circumference, cfg.conformal)
    rng_small = _rng(cfg, 55)
    k1 = qz.L2Operator(small, rng_small.normal(size=(32, 32))
                       + 1j * rng_small.normal(size=(32, 32)))
    k2 = qz.L2Operator(small, rng_small.normal(size=(32, 32))
                       + 1j * rng_small.normal(size=(32, 32)))
    k3 = qz.L2Operator(small, rng_small.normal(size=(32, 32))
                       + 1j * rng_small.normal(size=(32, 32)))
    assoc = _sup(gp.pair_convolve(gp.pair_convolve(k1, k2), k3).kernel
                 - gp.pair_convolve(k1, gp.pair_convolve(k2, k3)).kernel)
    naive = np.zeros((32, 32), dtype=complex)
    for i in range(32):
        for jj in range(32):
            naive[i, jj] = np.sum(k1.kernel[i, :] * small.weights * k2.kernel[:, jj])
    indep = _sup(gp.pair_convolve(k1, k2).kernel - naive)
    checks.append(CheckResult(
        "groupoid.pair_convolution",
        "kernel convolution associates and matches the cubic triple loop",
        max(assoc / max(1.0, _sup(naive)), indep), 1e-8, "max",
        anchor="pair-groupoid-convolution"))

    invol = _sup(gp.pair_convolve(k1, k2).adjoint().kernel
                 - gp.pair_convolve(k2.adjoint(), k1.adjoint()).kernel)
    checks.append(CheckResult(
        "groupoid.involution",
        "adjoint reverses convolution order",
        invol, 1e-10, "max", anchor="convolution-involution"))

    # Left invariance of the fiber measures: boundary fibers are invariant
    # under velocity translation, interior fibers under relabeling.
    shift_v = 0.37 * grid.v_step  # deliberately off-grid
    fvals = b.eval(np.full(grid.fiber_points, float(m.nodes[3])), grid.v_nodes)
    shifted = b.eval(np.full(grid.fiber_points, float(m.nodes[3])),
                     grid.v_nodes + shift_v)
    invariance = abs(np.sum(fvals) - np.sum(shifted)) * grid.v_step * c[3]
    checks.append(CheckResult(
        "groupoid.haar_left_invariance",
        "fiber quadrature is translation invariant on compact data",
        float(invariance), 1e-8, "max", anchor="haar-left-invariance"))

    # Scalar extension: exact velocity independence at the boundary and an
    # h-modulus bounded by the generator's modulus.
    gfun = lambda hh, x: np.cos(x) * (1.0 + 0.5 * hh + 0.25 * hh * hh)
    x0 = float(m.nodes[7])
    boundary_vals = [gp.extend_scalar(gfun, gp.TangentGroupoidPoint(
        0.0, TangentPoint(x0, float(v)))) for v in grid.v_nodes[::16]]
    v_independence = float(np.ptp(np.real(boundary_vals)))
    hs = [0.5, 0.25, 0.125]
    modulus = 0.0
    for hh in hs:
        pt = gp.TangentGroupoidPoint(hh, (x0, float(m.nodes[11])))
        grown = abs(gp.extend_scalar(gfun, pt) - gfun(0.0, x0))
        modulus = max(modulus, grown - abs(gfun(hh, x0) - gfun(0.0, x0)))
    checks.append(CheckResult(
        "groupoid.scalar_extension",
        "scalar extensions are velocity independent at the boundary with the generator's h-modulus",
        max(v_independence, modulus), 1e-12, "max", anchor="scalar-extension"))

    # Diffeo extension: chart transition of the interior images converges to
    # the boundary tangent value.
    x_field = presets.random_vector_field(m, rng, 0.3)
    family = gp.DiffeoFamily.from_backward_flow(x_field)
    v0 = 0.3 * grid.v_cutoff
    boundary = gp.extend_diffeo(family, gp.TangentGroupoidPoint(
        0.0, TangentPoint(x0, v0)))
    hs = [2.0 ** -k for k in range(2, 8)]
    errs = []
    for hh in hs:
        interior = gp.extend_diffeo(family, gp.deformation_chart(m, hh, x0, v0))
        xi, yi = interior.payload
        errs.append(abs(gp.deformation_chart_inverse(m, hh, xi, yi)
                        - boundary.payload.component))
    checks.append(CheckResult(
        "groupoid.diffeo_extension",
        "extended flow families are chart-continuous down to the boundary",
        _fd_slope(hs, errs), 0.9, "min", anchor="diffeo-extension"))

    worst = 0.0
    for _ in range(50):
        x = float(rng.uniform(0, m.circumference))
        v = float(rng.uniform(-0.4, 0.4) * grid.v_cutoff)
        hh = float(rng.uniform(0.05, 0.25))
        pt = gp.deformation_chart(m, hh, x, v)
        xi, yi = pt.payload
        worst = max(worst, abs(gp.deformation_chart_inverse(m, hh, xi, yi) - v))
    checks.append(CheckResult(
        "groupoid.chart_round_trip",
        "gluing chart inverts its inverse within the tube",
        worst, 1e-10, "max", anchor="deformation-chart"))

    # Haar continuity in h: an h-modulated compactly supported family has a
    # first-order modulus at the boundary fiber.
    x_ref = float(m.nodes[m.num_points // 3])
    bump_w = 0.5 * grid.v_cutoff

    def boundary_fn(p):
        return presets.bump_profile(np.array([p.payload.component]), bump_w)[0]

    target = gp.haar_integral(boundary_fn, 0.0, x_ref, grid)
    hs = cfg.haar_h_values
    errs = []
    for hh in hs:
        def interior_fn(p):
            xi, yi = p.payload
            vv, ok = gp._log_masked(m, np.array([xi]), np.array([yi]))
            if not ok[0]:
                return 0.0
            val = presets.bump_profile(np.array([-vv[0] / p.h]), bump_w)[0]
            return val * (1.0 + p.h * np.sin(yi))
        errs.append(abs(gp.haar_integral(interior_fn, hh, x_ref, grid) - target))
    checks.append(CheckResult(
        "groupoid.haar_continuity",
        "interior fiber integrals approach the boundary fiber integral",
        sc.fit_loglog_slope(hs, errs), 0.9, "min",
        anchor="haar-system-smoothness"))

    return SuiteResult("groupoid", tuple(checks))


# ---------------------------------------------------------------------------
# semiclassics suite
# ---------------------------------------------------------------------------


def suite_semiclassics(cfg: ExperimentConfig) -> SuiteResult:
    m = _manifold(cfg)
    rng = _rng(cfg, 6)
    checks = []
    grid = gp.FiberGrid(m, cfg.velocity_cutoff, cfg.fiber_points)
    hs = cfg.h_values

    symbol = presets.make_symbol(grid, cfg.symbol_preset)
    fam = sc.groupoid_quantize(symbol, hs)
    trace_rep = sc.trace_functional(fam)
    checks.append(CheckResult(
        "semiclassics.trace_canonical",
        "scaled traces of canonical kernels hit the phase-space integral at every h",
        float(np.max(trace_rep.errors)), 1e-9, "max",
        anchor="semiclassical-trace-limit"))

    modulation = lambda xs, ys: 0.5 + 0.3 * np.sin(xs) + 0.2 * np.cos(ys)
    perturbed = sc.perturb_family(fam, modulation)
    pert_rep = sc.trace_functional(perturbed)
    checks.append(CheckResult(
        "semiclassics.trace_perturbed",
        "first-order perturbed kernels converge with slope at least 0.9",
        pert_rep.fitted_slope, 0.9, "min"))

    worst_slope = np.inf
    worst_rel = 0.0
    for _ in range(cfg.character_pairs):
        z = lg.AlgebraElement(
            presets.random_vector_field(m, rng, 0.3, max_freq=3),
            presets.random_scalar_field(m, rng, 0.08, max_freq=3),
        )
        b_rand = presets.random_symbol(grid, rng)
        fam_rand = sc.groupoid_quantize(b_rand, hs)
        rep = sc.character_pairing(fam_rand, z)
        worst_slope = min(worst_slope, rep.fitted_slope)
        denom = max(abs(rep.target), 1e-12)
        worst_rel = max(worst_rel, abs(rep.extrapolated_limit - rep.target) / denom)
    checks.append(CheckResult(
        "semiclassics.character_slope",
        f"oscillatory trace pairings converge (worst slope over {cfg.character_pairs} pairs)",
        float(worst_slope), 0.9, "min", anchor="asymptotic-character-formula"))
    checks.append(CheckResult(
        "semiclassics.character_limit",
        "extrapolated pairings land within 1% of the phase-space target",
        float(worst_rel), 1e-2, "max"))

    # Double-centralizer identity on a finer grid whose kernel widths stay
    # quadrature-resolved at the tested slices.
    fine = presets.make_manifold(512, cfg.circumference, cfg.conformal)
    fine_grid = gp.FiberGrid(fine, 8.0, cfg.fiber_points)
    gw = fine_grid.v_cutoff / 20.0
    fb1 = gp.FiberSymbol(fine_grid, (1 + 0.4 * np.cos(fine.nodes))[:, None]
                         * presets.gaussian_profile(fine_grid.v_nodes, gw)[None, :])
    fb2 = gp.FiberSymbol(fine_grid, (1 + 0.3 * np.sin(fine.nodes))[:, None]
                         * presets.gaussian_profile(fine_grid.v_nodes, 1.05 * gw, 0.0125 * fine_grid.v_cutoff)[None, :])
    dc_h = [0.125, 0.0625]
    fam1 = sc.groupoid_quantize(fb1, dc_h)
    fam2 = sc.groupoid_quantize(fb2, dc_h)
    z_dc = lg.AlgebraElement(
        VectorField(fine, 0.25 * np.sin(fine.nodes)),
        ScalarField(fine, 0.10 * np.cos(fine.nodes)),
    )
    left = sc.centralizer_apply("left", z_dc, fam2)
    right = sc.centralizer_apply("right", z_dc, fam1)
    worst_kernel = 0.0
    for hh in dc_h:
        lhs = gp.pair_convolve(fam1.kernel_at(hh), left.kernel_at(hh))
        rhs = gp.pair_convolve(right.kernel_at(hh), fam2.kernel_at(hh))
        scale = max(1.0, _sup(lhs.kernel))
        worst_kernel = max(worst_kernel, _sup(lhs.kernel - rhs.kernel) / scale)
    checks.append(CheckResult(
        "semiclassics.double_centralizer_kernels",
        "left/right multiplier maps satisfy a L(b) = R(a) b per kernel slice",
        worst_kernel, 1e-7, "max", anchor="double-centralizer"))
    sym_resid = _sup(gp.fiber_convolve(fam1.symbol, left.symbol).values
                     - gp.fiber_convolve(right.symbol, fam2.symbol).values)
    checks.append(CheckResult(
        "semiclassics.double_centralizer_symbols",
        "the same identity holds on the symbol slice",
        sym_resid, 1e-7, "max"))

    # Covariance: conjugated kernels dequantize to the transported symbol.
    cov_symbol = presets.make_symbol(grid, "gauss_narrow")
    cov_fam = sc.groupoid_quantize(cov_symbol, hs)
    mover = presets.make_group_element(m, cfg.group_preset)
    transported = gp.fiber_fourier(
        sc.symbol_transport(mover, gp.fiber_fourier_inv(cov_symbol)))
    errs = []
    for hh in hs:
        conj = sc.covariant_conjugate(mover, cov_fam, hh)
        errs.append(_sup(sc.dequantize(conj, hh, grid).values - transported.values))
    checks.append(CheckResult(
        "semiclassics.covariance_limit",
        "dequantized conjugated kernels approach the transported symbol",
        sc.fit_loglog_slope(hs, errs), 0.9, "min",
        anchor="covariance-automorphism"))

    other = presets.random_group_element(m, rng, f_amplitude=0.3)
    a_phase = gp.fiber_fourier_inv(cov_symbol)
    one_shot = sc.symbol_transport(lg.multiply(mover, other), a_phase)
    two_step = sc.symbol_transport(mover, sc.symbol_transport(other, a_phase))
    checks.append(CheckResult(
        "semiclassics.transport_cocycle",
        "symbol transport composes along the group law",
        _sup(one_shot.values - two_step.values), 1e-8, "max"))

    h0 = hs[min(2, len(hs) - 1)]
    conj_inner = sc.covariant_conjugate(other, cov_fam, h0)
    inner_fam = sc.GroupoidFamily(
        cov_fam.symbol, [h0],
        lambda hh, xs, ys: conj_inner.kernel_fn(xs, ys),
        quantization_tag="perturbed",
    )
    nested = sc.covariant_conjugate(mover, inner_fam, h0)
    direct = sc.covariant_conjugate(lg.multiply(mover, other), cov_fam, h0)
    scale = max(1.0, _sup(direct.kernel))
    checks.append(CheckResult(
        "semiclassics.conjugation_homomorphism",
        "conjugating twice equals conjugating by the product",
        _sup(nested.kernel - direct.kernel) / scale, 1e-7, "max"))

    shifted_fam = sc.centralizer_apply(
        "left",
        lg.AlgebraElement(
            presets.random_vector_field(m, rng, 0.25, max_freq=3),
            presets.random_scalar_field(m, rng, 0.1, max_freq=3),
        ),
        cov_fam,
    )
    errs = []
    for hh in hs:
        d = sc.dequantize(shifted_fam.kernel_at(hh), hh, grid)
        errs.append(_sup(d.values - shifted_fam.symbol.values))
    checks.append(CheckResult(
        "semiclassics.smooth_family_preservation",
        "multiplier images stay chart-smooth: dequantized slices approach the new symbol",
        sc.fit_loglog_slope(hs, errs), 0.9, "min",
        anchor="smooth-family-preservation"))

    return SuiteResult("semiclassics", tuple(checks))


# ---------------------------------------------------------------------------
# orchestration and coverage
# ---------------------------------------------------------------------------


_SUITE_FUNCTIONS = {
    "group": suite_group,
    "coadjoint": suite_coadjoint,
    "quantization": suite_quantization,
    "induction": suite_induction,
    "groupoid": suite_groupoid,
    "semiclassics": suite_semiclassics,
}


def worker_count() -> int:
    env = os.environ.get("ORBITLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_suite(name: str, cfg: ExperimentConfig) -> list[SuiteResult]:
    """Run one named suite, or all of them in a worker pool."""
    if name == "all":
        with ThreadPoolExecutor(max_workers=min(worker_count(), len(SUITE_NAMES))) as pool:
            futures = [pool.submit(_SUITE_FUNCTIONS[s], cfg) for s in SUITE_NAMES]
            return [f.result() for f in futures]
    if name not in _SUITE_FUNCTIONS:
        raise UnknownSuiteError(
            f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)} or 'all'"
        )
    return [_SUITE_FUNCTIONS[name](cfg)]


# Identity anchors and their owning checks. Each tracked identity is owned
# by exactly one check; the test suite re-derives this table from the
# executed checks and fails on any drift.
COVERAGE = {
    "semidirect-product-law": "group.associativity",
    "semidirect-inverse-law": "group.inverse",
    "one-parameter-subgroup": "group.one_parameter",
    "exponential-flow-average": "group.exp_scalar_slot",
    "semidirect-lie-bracket": "group.jacobi",
    "adjoint-action-formula": "group.adjoint_slope",
    "flow-generator": "group.flow_separable",
    "coadjoint-orbit-action": "coadjoint.matches_action",
    "moment-map-equivariance": "coadjoint.equivariance",
    "comoment-hamiltonian": "coadjoint.comoment",
    "orbit-symplectic-form": "coadjoint.symplectic_pairing",
    "derived-cotangent-action": "coadjoint.derived_action_slope",
    "orbit-transitivity": "coadjoint.transitivity",
    "moment-map-injectivity": "coadjoint.separation",
    "unitary-representation": "quantization.unitarity",
    "representation-homomorphism": "quantization.homomorphism",
    "derived-representation-quantization": "quantization.derived_rep_slope",
    "radon-nikodym-density": "quantization.radon_nikodym",
    "quantized-operator-symmetry": "quantization.formal_symmetry",
    "quantization-bracket-compatibility": "quantization.bracket_compatibility",
    "kernel-trace-quadrature": "quantization.kernel_trace",
    "induced-function-space": "induction.bijection",
    "induced-translation-law": "induction.translation_homomorphism",
    "stabilizer-character-equivariance": "induction.stabilizer_equivariance",
    "induction-recovers-representation": "induction.recovers_representation",
    "fiberwise-fourier-inversion": "groupoid.fourier_round_trip",
    "fiberwise-fourier-isometry": "groupoid.parseval",
    "convolution-to-multiplication": "groupoid.convolution_to_multiplication",
    "pair-groupoid-convolution": "groupoid.pair_convolution",
    "convolution-involution": "groupoid.involution",
    "haar-left-invariance": "groupoid.haar_left_invariance",
    "scalar-extension": "groupoid.scalar_extension",
    "diffeo-extension": "groupoid.diffeo_extension",
    "deformation-chart": "groupoid.chart_round_trip",
    "haar-system-smoothness": "groupoid.haar_continuity",
    "semiclassical-trace-limit": "semiclassics.trace_canonical",
    "asymptotic-character-formula": "semiclassics.character_slope",
    "double-centralizer": "semiclassics.double_centralizer_kernels",
    "covariance-automorphism": "semiclassics.covariance_limit",
    "smooth-family-preservation": "semiclassics.smooth_family_preservation",
}


def coverage_table() -> list[tuple[str, str]]:
    """Identity anchor -> owning check id, sorted by anchor."""
    return sorted(COVERAGE.items())
