"""Heavy-tailed pairs, Poisson point processes and one-sided stable laws.

The angular part of a pair lives on the unit sphere of C^2 and is described
by a :class:`SpectralMeasureSpec`. All samplers draw from :class:`RngStream`
objects, so a fixed stream address always reproduces the same output.

Angular draws are always produced from two uniforms ``(u1, u2)`` through
:func:`angular_from_uniforms`; the compiled kernels use the same mapping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .rng import RngStream


class ConfigurationError(ValueError):
    """Invalid spectral-measure or sampler configuration."""


class EmptySequenceError(ValueError):
    pass


class ParameterError(ValueError):
    pass


# ---------------------------------------------------------------- angular laws

@dataclass(frozen=True)
class DiscreteAtoms:
    """Finitely many unit vectors of C^2 with nonnegative weights."""

    atoms: tuple  # of ((w1, w2), weight)

    def __post_init__(self):
        atoms = tuple((tuple(complex(c) for c in v), float(wt)) for v, wt in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ConfigurationError("DiscreteAtoms needs at least one atom")
        for v, wt in atoms:
            if len(v) != 2:
                raise ConfigurationError(f"atom {v} is not a vector of C^2")
            if abs(math.hypot(abs(v[0]), abs(v[1])) - 1.0) > 1e-12:
                raise ConfigurationError(f"atom {v} does not have unit norm")
            if wt < 0:
                raise ConfigurationError("atom weights must be nonnegative")

    @property
    def vectors(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms], dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        return np.array([wt for _, wt in self.atoms], dtype=float)


@dataclass(frozen=True)
class ArcUniform:
    """Real pairs (cos w, sin w), w uniform on the union of arcs
    ``center + [-halfwidth, halfwidth]`` (each center equally likely)."""

    centers: tuple
    halfwidth: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if not self.centers:
            raise ConfigurationError("ArcUniform needs at least one center")
        if not 0.0 <= self.halfwidth <= math.pi:
            raise ConfigurationError("ArcUniform halfwidth must lie in [0, pi]")


@dataclass(frozen=True)
class FullCircle:
    """Real pairs (cos w, sin w) with w uniform on [0, 2*pi)."""


@dataclass(frozen=True)
class IndependentAxes:
    """Mass 1/2 on each coordinate axis.

    ``sublaw`` is the law of the nonzero coordinate: ``"sign"`` (uniform on
    {-1, 1}) or ``"phase"`` (uniform on the complex unit circle).
    """

    sublaw: str = "sign"

    def __post_init__(self):
        if self.sublaw not in ("sign", "phase"):
            raise ConfigurationError(f"unknown axis sub-law {self.sublaw!r}")


AngularLaw = Union[DiscreteAtoms, ArcUniform, FullCircle, IndependentAxes]

ANGULAR_KINDS = {DiscreteAtoms: 0, ArcUniform: 1, FullCircle: 2, IndependentAxes: 3}


@dataclass(frozen=True)
class SpectralMeasureSpec:
    """Tail index plus the angular measure theta_d of a mirrored pair."""

    alpha: float
    angular: AngularLaw = field(default_factory=FullCircle)
    total_mass: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ConfigurationError(f"alpha={self.alpha} must lie in (0, 2)")
        if not self.total_mass > 0.0:
            raise ConfigurationError("total_mass must be positive")
        if isinstance(self.angular, DiscreteAtoms):
            wsum = self.angular.weights.sum()
            if not wsum > 0:
                raise ConfigurationError("spectral measure has zero total mass")
            if abs(wsum - self.total_mass) > 1e-12:
                raise ConfigurationError(f"atom weights sum to {wsum}, not total_mass={self.total_mass}")
        if type(self.angular) not in ANGULAR_KINDS:
            raise ConfigurationError(f"unsupported angular law {self.angular!r}")

    @property
    def is_real(self) -> bool:
        ang = self.angular
        if isinstance(ang, DiscreteAtoms):
            return bool(np.all(ang.vectors.imag == 0))
        if isinstance(ang, IndependentAxes):
            return ang.sublaw == "sign"
        return True

    def atom_mass(self) -> float:
        """theta_d(S) as implied by the atom weights (DiscreteAtoms only)."""
        if isinstance(self.angular, DiscreteAtoms):
            return float(self.angular.weights.sum())
        return self.total_mass

    def kernel_params(self) -> dict:
        """Flat description of the angular law for the compiled kernels."""
        ang = self.angular
        vecs = np.zeros((1, 2), dtype=complex)
        cumw = np.ones(1)
        centers = np.zeros(1)
        halfwidth = 0.0
        sublaw = 0
        if isinstance(ang, DiscreteAtoms):
            vecs = ang.vectors
            w = ang.weights
            cumw = np.cumsum(w) / w.sum()
            cumw[-1] = 1.0
        elif isinstance(ang, ArcUniform):
            centers = np.array(ang.centers, dtype=float)
            halfwidth = float(ang.halfwidth)
        elif isinstance(ang, IndependentAxes):
            sublaw = 0 if ang.sublaw == "sign" else 1
        return dict(kind=ANGULAR_KINDS[type(ang)], vecs=np.ascontiguousarray(vecs),
                    cumw=np.ascontiguousarray(cumw, dtype=float),
                    centers=np.ascontiguousarray(centers), halfwidth=halfwidth,
                    sublaw=sublaw)


def preset(name: str, alpha: float, b: float = 0.0, total_mass: float = 1.0) -> SpectralMeasureSpec:
    """Named angular measures used by the figure and cross-validation runs.

    ``b`` is the arc half-width factor: arcs are ``center + [-b*pi/4, b*pi/4]``.
    """
    hw = b * math.pi / 4
    if name in ("iid", "axes"):
        ang: AngularLaw = IndependentAxes()
    elif name == "circle":
        ang = FullCircle()
    elif name == "axes-arcs":
        ang = ArcUniform((0.0, math.pi / 2, math.pi, 3 * math.pi / 2), hw)
    elif name == "diagonal-arcs":
        ang = ArcUniform((math.pi / 4, 5 * math.pi / 4), hw)
    elif name == "symmetric":
        ang = ArcUniform((math.pi / 4, 5 * math.pi / 4), 0.0)
    else:
        raise ConfigurationError(f"unknown theta preset {name!r}")
    return SpectralMeasureSpec(alpha, ang, total_mass)


@dataclass(frozen=True)
class RadialLaw:
    """Unit Pareto radius: P(r >= t) = t**-alpha for t >= 1."""

    alpha: float
    kind: str = "ParetoUnit"

    def from_uniforms(self, u):
        return np.asarray(u) ** (-1.0 / self.alpha)

    def sample(self, rng: RngStream, size=None):
        r = self.from_uniforms(rng.uniform(size))
        return float(r) if size is None else r


@dataclass
class PoissonWeights:
    gammas: np.ndarray
    radii: np.ndarray


# ------------------------------------------------------------------ samplers

def gammas_from_exponentials(exps) -> np.ndarray:
    exps = np.asarray(exps, dtype=float)
    if exps.shape[-1] == 0:
        raise EmptySequenceError("need at least one exponential")
    return np.cumsum(exps, axis=-1)


def sample_gamma_sequence(k: int, rng: RngStream) -> np.ndarray:
    """Arrival times Gamma_1 < ... < Gamma_k of a unit-rate Poisson process."""
    if k < 1:
        raise EmptySequenceError("k must be at least 1")
    return gammas_from_exponentials(rng.exponential(k))


def radii_from_gammas(gammas, alpha: float, total_mass: float = 1.0) -> np.ndarray:
    return np.asarray(gammas, dtype=float) ** (-1.0 / alpha) * total_mass ** (1.0 / alpha)


def sample_radial_ppp(spec: SpectralMeasureSpec, k: int, rng: RngStream) -> PoissonWeights:
    """The k largest points of a PPP on (0, inf) with intensity total_mass * m_alpha."""
    gammas = sample_gamma_sequence(k, rng)
    return PoissonWeights(gammas, radii_from_gammas(gammas, spec.alpha, spec.total_mass))


def angular_from_uniforms(spec: SpectralMeasureSpec, u1, u2) -> np.ndarray:
    """Map uniform pairs to theta_d-distributed unit vectors; shape (..., 2)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    ang = spec.angular
    out = np.empty(u1.shape + (2,), dtype=complex)
    if isinstance(ang, FullCircle):
        theta = 2.0 * np.pi * u1
        out[..., 0] = np.cos(theta)
        out[..., 1] = np.sin(theta)
    elif isinstance(ang, ArcUniform):
        centers = np.asarray(ang.centers)
        idx = np.minimum((u1 * len(centers)).astype(np.int64), len(centers) - 1)
        theta = centers[idx] + ang.halfwidth * (2.0 * u2 - 1.0)
        out[..., 0] = np.cos(theta)
        out[..., 1] = np.sin(theta)
    elif isinstance(ang, IndependentAxes):
        if ang.sublaw == "sign":
            val = np.where(u2 < 0.5, 1.0, -1.0).astype(complex)
        else:
            val = np.exp(2j * np.pi * u2)
        first = u1 < 0.5
        out[..., 0] = np.where(first, val, 0.0)
        out[..., 1] = np.where(first, 0.0, val)
    else:
        p = spec.kernel_params()
        idx = np.minimum(np.searchsorted(p["cumw"], u1, side="right"), len(p["cumw"]) - 1)
        out[...] = p["vecs"][idx]
    return out


def sample_angular(spec: SpectralMeasureSpec, rng: RngStream, size=None) -> np.ndarray:
    """Unit vectors distributed as theta_d / theta_d(S)."""
    n = 1 if size is None else int(size)
    u = rng.uniform(2 * n).reshape(n, 2)
    w = angular_from_uniforms(spec, u[:, 0], u[:, 1])
    return w[0] if size is None else w


def angular_moments(spec: SpectralMeasureSpec) -> tuple:
    """(E|w1|^2, E[w1 w2], E|w2|^2) under the normalized angular law."""
    ang = spec.angular
    if isinstance(ang, FullCircle) or isinstance(ang, IndependentAxes):
        return 0.5, 0j, 0.5
    if isinstance(ang, ArcUniform):
        hw = ang.halfwidth
        sinc = 1.0 if hw == 0 else math.sin(2 * hw) / (2 * hw)
        c2 = np.mean(np.cos(2 * np.asarray(ang.centers)))
        s2 = np.mean(np.sin(2 * np.asarray(ang.centers)))
        return 0.5 + 0.5 * sinc * c2, complex(0.5 * sinc * s2), 0.5 - 0.5 * sinc * c2
    v = ang.vectors
    p = ang.weights / ang.weights.sum()
    return (float(p @ np.abs(v[:, 0]) ** 2), complex(p @ (v[:, 0] * v[:, 1])),
            float(p @ np.abs(v[:, 1]) ** 2))


def heavy_pair_from(spec: SpectralMeasureSpec, r, w) -> np.ndarray:
    """Pair xi = theta_d(S)**(1/alpha) * r * w, so the tail measure of xi is theta_d x m_alpha."""
    scale = spec.total_mass ** (1.0 / spec.alpha)
    return scale * np.asarray(r)[..., None] * np.asarray(w)


def sample_heavy_pair(spec: SpectralMeasureSpec, radial: RadialLaw, rng: RngStream, size=None):
    """Draw (xi1, xi2) = r * w with r ~ radial and w ~ normalized theta_d."""
    if radial.alpha != spec.alpha:
        raise ConfigurationError("radial law and spectral measure disagree on alpha")
    n = 1 if size is None else int(size)
    u = rng.uniform(3 * n).reshape(n, 3)
    pair = heavy_pair_from(spec, radial.from_uniforms(u[:, 0]),
                           angular_from_uniforms(spec, u[:, 1], u[:, 2]))
    return pair[0] if size is None else pair


def one_sided_stable_from_uniforms(beta: float, u, e) -> np.ndarray:
    """Kanter's representation of the positive beta-stable law with
    Laplace transform exp(-s**beta); ``u`` uniform(0,1), ``e`` Exp(1)."""
    v = np.pi * np.asarray(u)
    e = np.asarray(e)
    a = (np.sin((1 - beta) * v) ** ((1 - beta) / beta) * np.sin(beta * v)
         / np.sin(v) ** (1 / beta))
    return a * e ** (-(1 - beta) / beta)


def sample_one_sided_stable(beta: float, rng: RngStream, size=None):
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta={beta} must lie in (0, 1)")
    n = 1 if size is None else int(size)
    u = rng.uniform(2 * n).reshape(n, 2)
    z = one_sided_stable_from_uniforms(beta, u[:, 0], -np.log(u[:, 1]))
    return float(z[0]) if size is None else z


def sample_stable_vector_series(spec: SpectralMeasureSpec,
                                block_law: Callable[[RngStream, int], np.ndarray],
                                k_terms: int, rng: RngStream,
                                radii: Sequence[float] | None = None) -> np.ndarray:
    """Truncated LePage series sum_{i<=k} r_i**2 v_i of an alpha/2-stable vector.

    ``block_law(rng, k)`` returns k bounded vectors as a (k, d) array. Terms
    are summed in decreasing order of r_i. ``radii`` overrides the PPP draw.
    """
    if k_terms < 1:
        raise EmptySequenceError("k_terms must be at least 1")
    if radii is None:
        radii = sample_radial_ppp(spec, k_terms, rng).radii
    r = np.asarray(radii, dtype=float)[:k_terms]
    v = np.asarray(block_law(rng, len(r)))
    return (r ** 2) @ v
