"""Population dynamics for the recursive distributional equation of the root
resolvent block, Stieltjes inversion, and Hermitization on a grid."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import _fallback, kernels
from .ensemble import HalfPlanePoint, component_violations, log_potential, singular_values
from .heavy_sampler import (
    ArcUniform,
    DiscreteAtoms,
    FullCircle,
    IndependentAxes,
    SpectralMeasureSpec,
    angular_moments,
)
from .rng import RngStream


class InvariantFailure(ArithmeticError):
    pass


class GridError(ValueError):
    pass


def _as_point(u) -> HalfPlanePoint:
    return u if isinstance(u, HalfPlanePoint) else HalfPlanePoint(*u)


@dataclass(frozen=True)
class RdeConfig:
    """Population dynamics settings.

    ``tail_correction`` adds, for every new block, the conditional mean of the
    series terms beyond the K-th (evaluated with the old pool mean). Without
    it a K-term truncation visibly biases m at alpha near 1.
    """

    u: HalfPlanePoint
    spec: SpectralMeasureSpec
    pool_size: int = 100_000
    generations: int = 50
    series_terms: int = 50
    seed: int = 0
    tail_correction: bool = True

    def __post_init__(self):
        object.__setattr__(self, "u", _as_point(self.u))
        if self.pool_size < 100:
            raise ValueError("pool_size must be at least 100")
        if self.series_terms < 1 or self.generations < 1:
            raise ValueError("series_terms and generations must be at least 1")


@dataclass
class ResolventPopulation:
    a: np.ndarray
    b: np.ndarray
    bp: np.ndarray
    c: np.ndarray
    u: HalfPlanePoint
    spec: SpectralMeasureSpec
    generation: int = 0

    @classmethod
    def free(cls, u, spec: SpectralMeasureSpec, size: int) -> "ResolventPopulation":
        """Pool where every block is -U^{-1}."""
        u = _as_point(u)
        eta, z = complex(u.eta), complex(u.z)
        vals = _fallback.neg_inverse(eta, z, np.conj(z), eta)
        return cls(*(np.full(size, v, dtype=complex) for v in vals), u=u, spec=spec)

    def __len__(self):
        return len(self.a)

    @property
    def blocks(self) -> np.ndarray:
        out = np.empty((len(self.a), 2, 2), dtype=complex)
        out[:, 0, 0], out[:, 0, 1], out[:, 1, 0], out[:, 1, 1] = self.a, self.b, self.bp, self.c
        return out

    def mean_a(self) -> complex:
        return complex(self.a.mean())

    def se_a(self) -> float:
        n = len(self.a)
        return float(np.sqrt((np.var(self.a.real, ddof=1) + np.var(self.a.imag, ddof=1)) / n))


def _check(pop: ResolventPopulation):
    if not np.all(np.isfinite(pop.a)):
        raise InvariantFailure(f"non-finite blocks at generation {pop.generation}")
    bad = component_violations(pop.a, pop.b, pop.bp, pop.c, pop.u.eta, tol=1e-8)
    if any(v for k, v in bad.items() if k.endswith("bound") or k == "im_a_positive"):
        raise InvariantFailure(f"resolvent bounds violated at generation {pop.generation}: {bad}")


def rde_iterate(pop: ResolventPopulation, cfg: RdeConfig, rng: RngStream,
                check: bool = True) -> ResolventPopulation:
    """One sweep: every new block is -(U + S)^{-1} with S a K-term series over
    radii of the Poisson process, fresh angles and blocks resampled from the
    old pool."""
    spec = cfg.spec
    u = cfg.u
    a, b, bp, c = kernels.rde_generation(
        np.ascontiguousarray(pop.a), np.ascontiguousarray(pop.b),
        np.ascontiguousarray(pop.bp), np.ascontiguousarray(pop.c),
        rng.next_key(), pop.generation + 1, cfg.series_terms, spec.alpha, spec.total_mass,
        spec.kernel_params(), complex(u.eta), complex(u.z), cfg.tail_correction,
        angular_moments(spec))
    new = ResolventPopulation(np.asarray(a), np.asarray(b), np.asarray(bp), np.asarray(c),
                              u, spec, pop.generation + 1)
    if check:
        _check(new)
    return new


def rde_update_from_terms(pool, u, radii, angles, picks) -> np.ndarray:
    """Deterministic form of one update with the randomness supplied.

    ``pool`` is (P, 2, 2); ``radii`` (m, K); ``angles`` (m, K, 2) unit vectors;
    ``picks`` (m, K) pool indices. Returns (m, 2, 2) new blocks.
    """
    u = _as_point(u)
    pool = np.asarray(pool, dtype=complex)
    r2 = np.asarray(radii, dtype=float) ** 2
    w = np.asarray(angles, dtype=complex)
    w1, w2 = w[..., 0], w[..., 1]
    p = pool[np.asarray(picks)]
    s11 = (r2 * p[..., 1, 1] * np.abs(w1) ** 2).sum(-1)
    s12 = (r2 * p[..., 1, 0] * w1 * w2).sum(-1)
    s21 = (r2 * p[..., 0, 1] * np.conj(w1 * w2)).sum(-1)
    s22 = (r2 * p[..., 0, 0] * np.abs(w2) ** 2).sum(-1)
    eta, z = complex(u.eta), complex(u.z)
    na, nb, nbp, nc = _fallback.neg_inverse(eta + s11, z + s12, np.conj(z) + s21, eta + s22)
    out = np.empty(na.shape + (2, 2), dtype=complex)
    out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = na, nb, nbp, nc
    return out


@dataclass
class RdeSolution:
    population: ResolventPopulation
    m: complex
    se: float
    drift: list = field(default_factory=list)
    means: list = field(default_factory=list)

    @property
    def final_drift(self) -> float:
        return self.drift[-1] if self.drift else math.nan


def rde_solve(cfg: RdeConfig, check: bool = True) -> RdeSolution:
    """Start from the free pool -U^{-1} and iterate ``cfg.generations`` times.

    ``drift[t-1]`` is |mean a(t) - mean a(t-1)|; non-convergence is reported
    through it, never raised.
    """
    rng = RngStream(cfg.seed, 0)
    pop = ResolventPopulation.free(cfg.u, cfg.spec, cfg.pool_size)
    means = [pop.mean_a()]
    drift = []
    for _ in range(cfg.generations):
        pop = rde_iterate(pop, cfg, rng, check=check)
        means.append(pop.mean_a())
        drift.append(abs(means[-1] - means[-2]))
    return RdeSolution(pop, means[-1], pop.se_a(), drift, means)


@dataclass
class DensityGrid:
    abscissae: np.ndarray
    values: np.ndarray
    eta_imag: float
    clipped: float = 0.0

    def mass(self) -> float:
        return float(trapezoid(self.values, self.abscissae))


def density_from_stieltjes(m_curve, epsilon: float) -> DensityGrid:
    """(1/pi) Im m(E + i eps) on the given abscissae, clipped at zero.

    ``m_curve`` is a sequence of (E, m) pairs with increasing E.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    E = np.array([p[0] for p in m_curve], dtype=float)
    m = np.array([p[1] for p in m_curve], dtype=complex)
    if E.size > 1 and not np.all(np.diff(E) > 0):
        raise GridError("abscissae must be strictly increasing")
    raw = m.imag / np.pi
    clipped = float(-raw[raw < 0].sum())
    return DensityGrid(E, np.maximum(raw, 0.0), float(epsilon), clipped)


def rde_stieltjes_curve(spec: SpectralMeasureSpec, z: complex, energies, epsilon: float,
                        pool_size: int = 20_000, generations: int = 30,
                        series_terms: int = 50, seed: int = 0):
    """m(E + i eps) from a separate population run at each energy."""
    out = []
    for k, E in enumerate(energies):
        cfg = RdeConfig(HalfPlanePoint(z, complex(E, epsilon)), spec, pool_size,
                        generations, series_terms, seed + k)
        out.append((float(E), rde_solve(cfg, check=False).m))
    return out


@dataclass
class GridMeasure:
    """Masses on the interior nodes of a rectangular grid.

    ``mass`` is clipped at zero. ``signed`` keeps the raw Laplacian masses and
    ``total`` is their sum, which equals the boundary flux of the potential;
    ``clipped`` is the total negative mass removed.
    """

    re: np.ndarray
    im: np.ndarray
    mass: np.ndarray
    signed: np.ndarray
    clipped: float
    total: float

    def points(self):
        X, Y = np.meshgrid(self.re, self.im)
        return X + 1j * Y


def mu_from_hermitization(re, im, U, h: float | None = None) -> GridMeasure:
    """Discrete (1/2pi) Laplacian of the log potential, times h^2.

    ``U[j, i]`` is the log potential at re[i] + 1j*im[j]. The 5-point stencil
    is applied at interior nodes (the h^2 factors cancel).
    """
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    U = np.asarray(U, dtype=float)
    if re.size < 5 or im.size < 5:
        raise GridError("grid must be at least 5 x 5")
    if U.shape != (im.size, re.size):
        raise GridError(f"U has shape {U.shape}, expected {(im.size, re.size)}")
    if h is None:
        h = float(re[1] - re[0])
    if not (np.allclose(np.diff(re), h, rtol=1e-9, atol=0)
            and np.allclose(np.diff(im), h, rtol=1e-9, atol=0)):
        raise GridError("grid must be uniform with spacing h in both directions")
    if not np.all(np.isfinite(U)):
        raise GridError("log potential must be finite (clamp it upstream)")
    lap = (U[1:-1, 2:] + U[1:-1, :-2] + U[2:, 1:-1] + U[:-2, 1:-1] - 4 * U[1:-1, 1:-1])
    signed = lap / (2 * np.pi)
    clipped = float(-signed[signed < 0].sum())
    return GridMeasure(re[1:-1], im[1:-1], np.maximum(signed, 0.0), signed, clipped,
                       float(signed.sum()))


def grid_histogram(points, re, im, linear: bool = True) -> np.ndarray:
    """Histogram of ``points`` on the grid nodes, each point weighted 1/len(points).

    ``linear`` splits every point bilinearly over the four surrounding nodes
    (cloud in cell); otherwise each point goes to its nearest node. Mass
    falling outside the grid is dropped.
    """
    re = np.asarray(re)
    im = np.asarray(im)
    h = re[1] - re[0]
    pts = np.asarray(points).ravel()
    x = (pts.real - re[0]) / h
    y = (pts.imag - im[0]) / h
    hist = np.zeros((im.size, re.size))
    if linear:
        i = np.floor(x).astype(int)
        j = np.floor(y).astype(int)
        fx, fy = x - i, y - j
        parts = [(0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                 (0, 1, (1 - fx) * fy), (1, 1, fx * fy)]
    else:
        i, j = np.rint(x).astype(int), np.rint(y).astype(int)
        parts = [(0, 0, np.ones(pts.size))]
    for di, dj, w in parts:
        ii, jj = i + di, j + dj
        ok = (ii >= 0) & (ii < re.size) & (jj >= 0) & (jj < im.size)
        np.add.at(hist, (jj[ok], ii[ok]), w[ok] / pts.size)
    return hist


def log_potential_grid(A, re, im, clamp: float | None = None) -> np.ndarray:
    """Log potential of A - z at every grid node, from singular values."""
    A = np.asarray(A)
    n = A.shape[0]
    out = np.empty((len(im), len(re)))
    eye = np.eye(n)
    for j, y in enumerate(im):
        for i, x in enumerate(re):
            out[j, i] = log_potential(singular_values(A - complex(x, y) * eye), clamp)
    return out


def coarsen(grid: np.ndarray, factor: int) -> np.ndarray:
    """Sum non-overlapping factor x factor blocks (edge remainder dropped)."""
    ny, nx = (s // factor for s in grid.shape)
    g = grid[:ny * factor, :nx * factor]
    return g.reshape(ny, factor, nx, factor).sum(axis=(1, 3))


@dataclass(frozen=True)
class C2Check:
    satisfied: bool
    witness: tuple | None = None

    def __str__(self):
        if self.satisfied:
            return "satisfied"
        a, b = self.witness
        return f"violated(witness line {a}*x + {b}*y = 0)"


def _line_witness(vectors: np.ndarray, tol: float = 1e-12):
    """(a, b) with a*v1 + b*v2 = 0 for every row of ``vectors``, or None."""
    v0 = vectors[np.argmax(np.abs(vectors).sum(axis=1))]
    a, b = v0[1], -v0[0]
    if np.all(np.abs(a * vectors[:, 0] + b * vectors[:, 1]) <= tol):
        lead = a if abs(a) > tol else b
        a, b = a / lead, b / lead
        a, b = complex(np.round(a, 12)), complex(np.round(b, 12))
        clean = lambda x: x.real + 0.0 if x.imag == 0 else x
        return clean(a), clean(b)
    return None


def validate_c2_support(spec: SpectralMeasureSpec) -> C2Check:
    """Is the angular measure supported on a single complex line?"""
    ang = spec.angular
    if isinstance(ang, (FullCircle, IndependentAxes)):
        return C2Check(True)
    if isinstance(ang, DiscreteAtoms):
        vecs = ang.vectors[ang.weights > 0]
    elif isinstance(ang, ArcUniform):
        if ang.halfwidth > 0:
            return C2Check(True)
        c = np.asarray(ang.centers, dtype=float)
        vecs = np.stack([np.cos(c), np.sin(c)], axis=1).astype(complex)
    else:
        raise TypeError(f"unsupported angular law {ang!r}")
    w = _line_witness(vecs)
    return C2Check(True) if w is None else C2Check(False, w)
