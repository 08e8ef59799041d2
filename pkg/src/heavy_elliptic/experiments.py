"""Experiment drivers shared by the command line and the acceptance tests."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ensemble as ens
from .ensemble import EllipticEnsembleConfig, HalfPlanePoint
from .heavy_sampler import SpectralMeasureSpec, preset
from .pwit import DEFAULT_PRUNE_TOL, pwit_stieltjes_estimate
from .rde import RdeConfig, rde_solve, validate_c2_support
from .rng import RngStream

FIGURE_ALPHA = 1.25
FIGURE_N = 2000
DEFAULT_WINDOW = (-3.0, 3.0, -3.0, 3.0)

# (preset, b, entry mode, crop window)
FIGURES = {
    "1L": ("iid", 0.0, "iid", None),
    "1R": ("circle", 0.0, "pair", DEFAULT_WINDOW),
    "2a": ("axes-arcs", 0.1, "pair", DEFAULT_WINDOW),
    "2b": ("axes-arcs", 0.5, "pair", DEFAULT_WINDOW),
    "3a": ("diagonal-arcs", 1.0, "pair", DEFAULT_WINDOW),
    "3b": ("diagonal-arcs", 4.0 / 3.0, "pair", DEFAULT_WINDOW),
}

DIAGONAL_LAWS = {"one": ens.Constant(1.0), "zero": ens.Zero(), "xi1": ens.SameAsXi1()}


def figure_config(which: str, n: int = FIGURE_N, seed: int = 0,
                  alpha: float = FIGURE_ALPHA) -> tuple[EllipticEnsembleConfig, tuple | None]:
    if which not in FIGURES:
        raise ValueError(f"unknown figure {which!r}; choose from {sorted(FIGURES)}")
    name, b, mode, window = FIGURES[which]
    spec = preset(name, alpha, b)
    return EllipticEnsembleConfig(n, spec, seed=seed, entry_mode=mode), window


def figure_spectrum(which: str, n: int = FIGURE_N, seed: int = 0,
                    alpha: float = FIGURE_ALPHA) -> np.ndarray:
    cfg, _ = figure_config(which, n, seed, alpha)
    X = ens.build_elliptic_matrix(cfg)
    return ens.eigenvalues(ens.scale_and_shift(X, alpha))


def real_axis_fraction(eigs, width: float = 0.1) -> float:
    """Fraction of eigenvalues with |Im| below ``width``."""
    return float(np.mean(np.abs(np.asarray(eigs).imag) < width))


@dataclass
class Estimate:
    value: float
    se: float | None

    def z_against(self, other: "Estimate") -> float:
        se2 = (self.se or 0.0) ** 2 + (other.se or 0.0) ** 2
        diff = self.value - other.value
        if se2 == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / math.sqrt(se2)


def matrix_stieltjes(config: EllipticEnsembleConfig, u: HalfPlanePoint, replicas: int):
    """Per-replica Stieltjes transforms of the symmetrized singular value
    measure of A_n - z, from singular values."""
    out = np.empty(replicas, dtype=complex)
    for r in range(replicas):
        X = ens.build_elliptic_matrix(ens.replica_config(config, r))
        s = ens.singular_values(ens.scale_and_shift(X, config.spec.alpha, u.z))
        out[r] = ens.stieltjes_from_singular_values(s, u.eta)
    return out


def _im_estimate(samples) -> Estimate:
    x = np.asarray(samples).imag
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else None
    return Estimate(float(x.mean()), se)


@dataclass
class CrossvalReport:
    estimates: dict
    z_scores: dict
    c2: object
    nodes: float

    @property
    def consistent(self) -> bool:
        return all(abs(z) <= 3 for z in self.z_scores.values())

    def lines(self) -> list[str]:
        out = []
        for k, e in self.estimates.items():
            se = "nan" if e.se is None else repr(e.se)
            out.append(f"{k} im_m={e.value!r} se={se}")
        for k, z in self.z_scores.items():
            out.append(f"z[{k}]={z!r}")
        out.append(f"c2_support={self.c2}")
        out.append(f"consistent={self.consistent}")
        return out


def run_crossval(spec: SpectralMeasureSpec, u: HalfPlanePoint, n: int = 1000,
                 matrix_replicas: int = 20, B: int = 50, H: int = 6, pwit_replicas: int = 500,
                 pool: int = 100_000, generations: int = 50, terms: int = 50, seed: int = 0,
                 diagonal: str = "one", prune_tol: float = DEFAULT_PRUNE_TOL,
                 tail_correction: bool = True) -> CrossvalReport:
    """Im m(eta) at z from the matrix ensemble, the PWIT and the RDE."""
    cfg = EllipticEnsembleConfig(n, spec, diagonal_law=DIAGONAL_LAWS[diagonal], seed=seed)
    mat = _im_estimate(matrix_stieltjes(cfg, u, matrix_replicas))
    est = pwit_stieltjes_estimate(spec, B, H, u, pwit_replicas, RngStream(seed, 1),
                                  prune_tol=prune_tol, tail_correction=tail_correction)
    pw = _im_estimate(est.blocks[:, 0, 0])
    sol = rde_solve(RdeConfig(u, spec, pool, generations, terms, seed, tail_correction))
    rd = _im_estimate(sol.population.a)
    ests = {"matrix": mat, "pwit": pw, "rde": rd}
    zs = {"matrix-pwit": mat.z_against(pw), "matrix-rde": mat.z_against(rd),
          "pwit-rde": pw.z_against(rd)}
    return CrossvalReport(ests, zs, validate_c2_support(spec), float(est.nodes.mean()))


def cauchy_statistic(config: EllipticEnsembleConfig, replicas: int) -> np.ndarray:
    """Integral of 1/(1+x^2) against the singular value measure of A_n, per replica."""
    out = np.empty(replicas)
    for r in range(replicas):
        X = ens.build_elliptic_matrix(ens.replica_config(config, r))
        s = ens.singular_values(ens.scale_and_shift(X, config.spec.alpha))
        out[r] = np.mean(ens.cauchy_kernel(s))
    return out


def run_concentration(spec: SpectralMeasureSpec, n_list, replicas: int, seed: int = 0,
                      f_name: str = "cauchy_kernel"):
    """Rows of (n, std of the statistic) and the ratios of consecutive stds."""
    if f_name != "cauchy_kernel":
        raise ValueError(f"unknown statistic {f_name!r}")
    if replicas < 20:
        raise ValueError("need at least 20 replicas to estimate a standard deviation")
    rows = []
    for n in n_list:
        cfg = EllipticEnsembleConfig(int(n), spec, seed=seed)
        rows.append((int(n), float(np.std(cauchy_statistic(cfg, replicas), ddof=1))))
    ratios = [rows[k][1] / rows[k + 1][1] for k in range(len(rows) - 1)]
    return rows, ratios

