"""Deterministic generators for geometry, group data, and test symbols.

Random fields are band-limited with a decaying mode envelope, so their
compositions stay spectrally clean at the working grid sizes; diffeo
displacements are rescaled so the Jacobian stays at least one half,
keeping every generated circle map uniformly invertible.
"""

from __future__ import annotations

import numpy as np

from .groupoid import FiberGrid, FiberSymbol
from .lie_group import AlgebraElement, Diffeo, GroupElement, flow
from .manifold import GridManifold, ScalarField, VectorField, differentiate

__all__ = [
    "CONFORMAL_PRESETS",
    "SYMBOL_PRESETS",
    "ALGEBRA_PRESETS",
    "GROUP_PRESETS",
    "make_manifold",
    "make_symbol",
    "make_algebra_element",
    "make_group_element",
    "random_scalar_field",
    "random_vector_field",
    "random_diffeo",
    "random_group_element",
    "random_algebra_element",
    "random_wavefunction",
    "random_symbol",
    "stabilizer_element",
    "gaussian_profile",
    "bump_profile",
]


def _angle(m: GridManifold):
    return 2.0 * np.pi * m.nodes / m.circumference


CONFORMAL_PRESETS = {
    "flat": lambda m: np.ones(m.num_points),
    "cosine": lambda m: 1.0 + 0.3 * np.cos(_angle(m)),
}


def make_manifold(num_points: int, circumference: float, preset: str) -> GridManifold:
    if preset not in CONFORMAL_PRESETS:
        raise KeyError(f"unknown conformal preset {preset!r}")
    shell = GridManifold(num_points, circumference)
    return GridManifold(num_points, circumference, CONFORMAL_PRESETS[preset](shell))


def gaussian_profile(v: np.ndarray, width: float, center: float = 0.0) -> np.ndarray:
    return np.exp(-((v - center) ** 2) / (2.0 * width * width))


def bump_profile(v: np.ndarray, width: float, center: float = 0.0) -> np.ndarray:
    t = (np.asarray(v, dtype=float) - center) / width
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


# Gaussian widths are expressed as fractions of the velocity cutoff. The
# fiber band keeps data below 1e-12 past nine tenths of the cutoff, and a
# Gaussian falls below that threshold at about 7.5 widths, so width/cutoff
# must stay under 0.12 (under 0.09 if a transported copy may be stretched
# by a diffeo Jacobian up to 1.35).
SYMBOL_PRESETS = {
    "gauss": lambda grid, x: (1.0 + 0.4 * np.cos(x))[:, None]
    * gaussian_profile(grid.v_nodes, grid.v_cutoff / 9.0)[None, :],
    "gauss_narrow": lambda grid, x: (1.0 + 0.4 * np.cos(x))[:, None]
    * gaussian_profile(grid.v_nodes, grid.v_cutoff / 13.0)[None, :],
    "bump": lambda grid, x: (1.0 + 0.3 * np.sin(x))[:, None]
    * bump_profile(grid.v_nodes, 0.55 * grid.v_cutoff)[None, :],
}


def make_symbol(grid: FiberGrid, preset: str) -> FiberSymbol:
    if preset not in SYMBOL_PRESETS:
        raise KeyError(f"unknown symbol preset {preset!r}")
    x = 2.0 * np.pi * grid.manifold.nodes / grid.manifold.circumference
    return FiberSymbol(grid, SYMBOL_PRESETS[preset](grid, x))


ALGEBRA_PRESETS = {
    # Mild amplitudes keep oscillatory pairing targets well away from zero.
    "shear": (0.25, "sin", 0.10, "cos"),
    "drift": (0.30, "cos", 0.08, "sin"),
}


def make_algebra_element(m: GridManifold, preset: str) -> AlgebraElement:
    if preset not in ALGEBRA_PRESETS:
        raise KeyError(f"unknown algebra preset {preset!r}")
    x_amp, x_kind, f_amp, f_kind = ALGEBRA_PRESETS[preset]
    trig = {"sin": np.sin, "cos": np.cos}
    ang = _angle(m)
    return AlgebraElement(
        VectorField(m, x_amp * trig[x_kind](ang)),
        ScalarField(m, f_amp * trig[f_kind](ang)),
    )


GROUP_PRESETS = {
    "twist": (0.25, 0.30),
    "pure_function": (0.0, 0.30),
}


def make_group_element(m: GridManifold, preset: str) -> GroupElement:
    if preset not in GROUP_PRESETS:
        raise KeyError(f"unknown group preset {preset!r}")
    u_amp, f_amp = GROUP_PRESETS[preset]
    ang = _angle(m)
    return GroupElement(
        Diffeo(m, ScalarField(m, u_amp * np.sin(ang))),
        ScalarField(m, f_amp * np.cos(ang)),
    )


def random_scalar_field(m: GridManifold, rng: np.random.Generator,
                        amplitude: float = 0.5, max_freq: int | None = None,
                        mean: float = 0.0, decay: float = 0.5) -> ScalarField:
    """Band-limited real field with unit-normalized sup scaled to amplitude.

    The analytic-type mode envelope keeps compositions, reciprocals of
    Jacobians, and pullbacks spectrally converged at the working grids.
    """
    kmax = max_freq if max_freq is not None else max(2, m.num_points // 8)
    ang = _angle(m)
    acc = np.zeros(m.num_points)
    for k in range(1, kmax + 1):
        a, b = rng.normal(size=2) * np.exp(-decay * (k - 1))
        acc += a * np.cos(k * ang) + b * np.sin(k * ang)
    peak = float(np.max(np.abs(acc)))
    if peak > 0:
        acc *= amplitude / peak
    return ScalarField(m, acc + mean)


def random_vector_field(m: GridManifold, rng: np.random.Generator,
                        amplitude: float = 0.3, max_freq: int | None = None) -> VectorField:
    return VectorField(m, random_scalar_field(m, rng, amplitude, max_freq).samples)


def random_diffeo(m: GridManifold, rng: np.random.Generator,
                  strength: float = 0.35) -> Diffeo:
    """Displacement rescaled so ``1 + u'`` stays at least ``1 - strength``.

    The steeper envelope keeps the reciprocal Jacobian of the inverse map,
    which enters measure densities and covector pushforwards, spectrally
    converged to better than 1e-10 on grids of 256 nodes and up.
    """
    raw = random_scalar_field(m, rng, 1.0, decay=0.6)
    slope = float(np.max(np.abs(differentiate(raw).samples)))
    scale = strength / max(slope, 1e-12)
    return Diffeo(m, ScalarField(m, raw.samples.real * scale))


def random_group_element(m: GridManifold, rng: np.random.Generator,
                         f_amplitude: float = 0.5) -> GroupElement:
    return GroupElement(random_diffeo(m, rng),
                        random_scalar_field(m, rng, f_amplitude))


def random_algebra_element(m: GridManifold, rng: np.random.Generator,
                           x_amplitude: float = 0.3,
                           f_amplitude: float = 0.5) -> AlgebraElement:
    return AlgebraElement(random_vector_field(m, rng, x_amplitude),
                          random_scalar_field(m, rng, f_amplitude))


def random_wavefunction(m: GridManifold, rng: np.random.Generator,
                        amplitude: float = 1.0) -> ScalarField:
    re = random_scalar_field(m, rng, amplitude, mean=0.3)
    im = random_scalar_field(m, rng, amplitude)
    return ScalarField(m, re.samples + 1j * im.samples)


def random_symbol(grid: FiberGrid, rng: np.random.Generator,
                  width_fraction: tuple[float, float] = (1 / 11, 1 / 9)) -> FiberSymbol:
    """Random positive base profile times a centered Gaussian fiber profile."""
    m = grid.manifold
    profile = 1.0 + random_scalar_field(m, rng, 0.35, max_freq=4).samples.real
    width = grid.v_cutoff * rng.uniform(*width_fraction)
    return FiberSymbol(
        grid, profile[:, None] * gaussian_profile(grid.v_nodes, width)[None, :]
    )


def stabilizer_element(m: GridManifold, rng: np.random.Generator,
                       basepoint: float) -> GroupElement:
    """Group element whose diffeo fixes the basepoint to machine precision.

    The diffeo is the time-one flow of a field with a hard zero at the
    basepoint, so every integration stage vanishes there exactly.
    """
    raw = random_scalar_field(m, rng, 0.3)
    window = np.sin(np.pi * (m.nodes - basepoint) / m.circumference) ** 2
    theta = flow(VectorField(m, raw.samples.real * window), 1.0)
    return GroupElement(theta, random_scalar_field(m, rng, 0.5))
