"""Elliptic random matrices and their spectral statistics.

Matrices are plain numpy arrays. Real configurations produce float64
matrices (so LAPACK uses the real Schur form); everything else is complex128.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .heavy_sampler import (
    ConfigurationError,
    RadialLaw,
    SpectralMeasureSpec,
    angular_from_uniforms,
    heavy_pair_from,
)
from .rng import derive_seed, uniforms


class DimensionError(ValueError):
    pass


class DomainError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class SpectralComputationError(RuntimeError):
    """Raised when a dense decomposition fails to converge."""


# Returned by log_potential when a zero singular value meets clamp = 0.
SATURATED = -math.inf


@dataclass(frozen=True)
class Constant:
    value: complex = 1.0


@dataclass(frozen=True)
class SameAsXi1:
    pass


@dataclass(frozen=True)
class Zero:
    pass


DiagonalLaw = Union[Constant, SameAsXi1, Zero]


@dataclass(frozen=True)
class EllipticEnsembleConfig:
    """Everything needed to draw X_n.

    ``entry_mode="iid"`` ignores the pairing and draws every entry (diagonal
    included) independently as ``s * U**(-1/alpha)`` with s from the axis
    sub-law; it is only meaningful with an ``IndependentAxes`` measure.
    """

    n: int
    spec: SpectralMeasureSpec
    radial: RadialLaw | None = None
    diagonal_law: DiagonalLaw = field(default_factory=Constant)
    seed: int = 0
    entry_mode: str = "pair"

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("n must be at least 1")
        if self.radial is None:
            object.__setattr__(self, "radial", RadialLaw(self.spec.alpha))
        if self.radial.alpha != self.spec.alpha:
            raise ConfigurationError("radial law and spectral measure disagree on alpha")
        if self.entry_mode not in ("pair", "iid"):
            raise ConfigurationError(f"unknown entry mode {self.entry_mode!r}")


@dataclass(frozen=True)
class HalfPlanePoint:
    z: complex
    eta: complex

    def __post_init__(self):
        if not complex(self.eta).imag > 0:
            raise DomainError(f"eta={self.eta} must have positive imaginary part")

    @property
    def U(self) -> np.ndarray:
        return np.array([[self.eta, self.z], [np.conj(self.z), self.eta]], dtype=complex)


@dataclass(frozen=True)
class ResolventBlock:
    a: complex
    b: complex
    b_prime: complex
    c: complex

    @classmethod
    def from_matrix(cls, m) -> "ResolventBlock":
        m = np.asarray(m)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b_prime, self.c]], dtype=complex)


def block_violations(blocks, eta: complex, tol: float = 1e-10) -> dict:
    """Count violations of the resolvent modulus bounds and, for eta on the
    imaginary axis, of the structure Re a = Re c = 0, b' = conj(b).

    ``blocks`` has shape (..., 2, 2). Returns a dict of violation counts.
    """
    blocks = np.asarray(blocks).reshape(-1, 2, 2)
    return component_violations(blocks[:, 0, 0], blocks[:, 0, 1], blocks[:, 1, 0],
                                blocks[:, 1, 1], eta, tol)


def component_violations(a, b, bp, c, eta: complex, tol: float = 1e-10) -> dict:
    t = complex(eta).imag
    slack = 1 + 1e-12
    out = {
        "a_bound": int(np.count_nonzero(np.abs(a) > slack / t)),
        "c_bound": int(np.count_nonzero(np.abs(c) > slack / t)),
        "b_bound": int(np.count_nonzero(np.abs(b) > slack / (2 * t))),
        "bp_bound": int(np.count_nonzero(np.abs(bp) > slack / (2 * t))),
        "im_a_positive": int(np.count_nonzero(a.imag <= 0)),
    }
    if complex(eta).real == 0:
        out["re_a"] = int(np.count_nonzero(np.abs(a.real) > tol))
        out["re_c"] = int(np.count_nonzero(np.abs(c.real) > tol))
        out["bp_conj_b"] = int(np.count_nonzero(np.abs(bp - np.conj(b)) > tol))
    return out


class EmpiricalMeasure:
    """Uniform weights 1/n on a multiset of real or complex points."""

    def __init__(self, points):
        self.points = np.asarray(points).ravel()
        if self.points.size == 0:
            raise DimensionError("empty measure")
        self.weights = np.full(self.points.size, 1.0 / self.points.size)

    def __len__(self):
        return self.points.size

    def cdf(self, x) -> np.ndarray:
        pts = np.sort(self.points.real)
        return np.searchsorted(pts, np.asarray(x), side="right") / pts.size

    def stieltjes(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=complex)
        return np.mean(1.0 / (self.points[:, None] - eta.ravel()[None, :]), axis=0).reshape(eta.shape)

    def moment(self, r: float) -> float:
        return float(np.mean(np.abs(self.points) ** r))

    def integrate(self, f) -> float:
        return float(np.mean(f(self.points)))


# -------------------------------------------------------------- construction

def _pair_streams(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, 1)
    return i, j, (i.astype(np.uint64) * np.uint64(n) + j.astype(np.uint64))


def build_elliptic_matrix(config: EllipticEnsembleConfig) -> np.ndarray:
    """Draw the unscaled matrix X_n.

    Pair (i, j), i < j, reads stream ``i*n + j``; diagonal entry i reads
    stream ``2*n*n + i``. Counter 0 drives the radius, counters 1 and 2 the
    angle, so the matrix does not depend on fill order.
    """
    n = config.n
    spec = config.spec
    seed = config.seed
    dtype = float if spec.is_real else complex
    X = np.zeros((n, n), dtype=dtype)
    i, j, streams = _pair_streams(n)

    if config.entry_mode == "iid":
        # every entry is its own stream: (i, j) -> i*n + j for all i != j
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))
        st = ii.astype(np.uint64) * np.uint64(n) + jj.astype(np.uint64)
        r = config.radial.from_uniforms(uniforms(seed, st, 0))
        w = angular_from_uniforms(spec, np.zeros(st.size), uniforms(seed, st, 2))
        X[ii, jj] = (r * w[:, 0]).real if dtype is float else r * w[:, 0]
        d = np.arange(n)
        st = np.uint64(2 * n * n) + d.astype(np.uint64)
        r = config.radial.from_uniforms(uniforms(seed, st, 0))
        w = angular_from_uniforms(spec, np.zeros(n), uniforms(seed, st, 2))
        X[d, d] = (r * w[:, 0]).real if dtype is float else r * w[:, 0]
        return X

    if streams.size:
        r = config.radial.from_uniforms(uniforms(seed, streams, 0))
        w = angular_from_uniforms(spec, uniforms(seed, streams, 1), uniforms(seed, streams, 2))
        xi = heavy_pair_from(spec, r, w)
        if dtype is float:
            xi = xi.real
        X[i, j] = xi[:, 0]
        X[j, i] = xi[:, 1]

    d = np.arange(n)
    law = config.diagonal_law
    if isinstance(law, Constant):
        X[d, d] = law.value.real if dtype is float else law.value
    elif isinstance(law, SameAsXi1):
        st = np.uint64(2 * n * n) + d.astype(np.uint64)
        r = config.radial.from_uniforms(uniforms(seed, st, 0))
        w = angular_from_uniforms(spec, uniforms(seed, st, 1), uniforms(seed, st, 2))
        xi = heavy_pair_from(spec, r, w)[:, 0]
        X[d, d] = xi.real if dtype is float else xi
    return X


def _square(M, what="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {M.shape}")
    return M


def scale_and_shift(X, alpha: float, z: complex = 0) -> np.ndarray:
    """A_n - z I with A_n = X / n**(1/alpha)."""
    X = _square(X)
    n = X.shape[0]
    A = X / n ** (1.0 / alpha)
    if z != 0:
        if np.iscomplexobj(A) or complex(z).imag != 0:
            A = A.astype(complex)
            A[np.diag_indices(n)] -= z
        else:
            A[np.diag_indices(n)] -= complex(z).real
    return A


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues (with multiplicity) via LAPACK's Schur-based geev."""
    M = _square(M)
    if not np.all(np.isfinite(M)):
        raise SpectralComputationError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(M).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise SpectralComputationError(
            f"eigenvalue iteration failed for {M.shape} matrix, "
            f"max |entry| = {np.abs(M).max():.3e}: {exc}") from exc


def singular_values(M) -> np.ndarray:
    """Singular values in decreasing order."""
    M = np.asarray(M)
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SpectralComputationError(f"SVD failed for {M.shape} matrix: {exc}") from exc
    return np.sort(s)[::-1]


def bipartize(A, z: complex = 0) -> np.ndarray:
    """The 2n x 2n Hermitian matrix B(z).

    Coordinates are interleaved (1, 1^, 2, 2^, ...), so the (i, j) 2x2 block
    is [[0, A_ij], [conj(A_ji), 0]] minus [[0, z], [conj(z), 0]] when i = j.
    """
    A = _square(A).astype(complex)
    n = A.shape[0]
    Bm = np.zeros((2 * n, 2 * n), dtype=complex)
    Bm[0::2, 1::2] = A
    Bm[1::2, 0::2] = A.conj().T
    d = np.arange(n)
    Bm[2 * d, 2 * d + 1] -= z
    Bm[2 * d + 1, 2 * d] -= np.conj(z)
    return Bm


def resolvent_diag_blocks(A, u: HalfPlanePoint) -> np.ndarray:
    """Diagonal 2x2 blocks of (B(z) - eta I)^{-1}; shape (n, 2, 2)."""
    if not isinstance(u, HalfPlanePoint):
        u = HalfPlanePoint(*u)
    Bz = bipartize(A, u.z)
    Bz[np.diag_indices_from(Bz)] -= u.eta
    R = np.linalg.inv(Bz)
    n = Bz.shape[0] // 2
    d = np.arange(n)
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = R[2 * d, 2 * d]
    out[:, 0, 1] = R[2 * d, 2 * d + 1]
    out[:, 1, 0] = R[2 * d + 1, 2 * d]
    out[:, 1, 1] = R[2 * d + 1, 2 * d + 1]
    return out


def stieltjes_symmetrized(blocks) -> complex:
    """(1/2n) sum_k (a_k + c_k): the Stieltjes transform of the symmetrized
    singular value measure."""
    if isinstance(blocks, (list, tuple)) and blocks and isinstance(blocks[0], ResolventBlock):
        blocks = np.array([b.as_matrix() for b in blocks])
    blocks = np.asarray(blocks)
    if blocks.size == 0:
        raise DimensionError("need at least one block")
    blocks = blocks.reshape(-1, 2, 2)
    return complex(np.mean(blocks[:, 0, 0] + blocks[:, 1, 1]) / 2)


def stieltjes_from_singular_values(svals, eta) -> complex:
    """Stieltjes transform of (1/2n) sum (delta_s + delta_{-s}) at eta."""
    s = np.asarray(svals, dtype=float)
    return complex(np.mean(0.5 * (1.0 / (s - eta) + 1.0 / (-s - eta))))


def log_potential(svals, clamp: float | None = None) -> float:
    """(1/n) sum log max(s_i, clamp); clamp defaults to n**-3.

    Returns ``SATURATED`` (-inf) if a singular value is 0 and clamp is 0.
    """
    s = np.asarray(svals, dtype=float)
    if clamp is None:
        clamp = s.size ** -3.0
    s = np.maximum(s, clamp)
    if np.any(s <= 0):
        return SATURATED
    return float(np.mean(np.log(s)))


def nu_moment(svals, r: float) -> float:
    """Integral of t**r against the singular value measure."""
    if not r > 0:
        raise ValueError("r must be positive")
    return float(np.mean(np.asarray(svals, dtype=float) ** r))


def cauchy_kernel(x):
    return 1.0 / (1.0 + np.asarray(x) ** 2)


def replica_config(config: EllipticEnsembleConfig, replica: int) -> EllipticEnsembleConfig:
    """Same ensemble, independent draw: the seed of replica r is derived from (seed, r)."""
    return EllipticEnsembleConfig(config.n, config.spec, config.radial, config.diagonal_law,
                                  derive_seed(config.seed, replica), config.entry_mode)


def least_singular_values(config: EllipticEnsembleConfig, z: complex, trials: int) -> np.ndarray:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    out = np.empty(trials)
    for t in range(trials):
        X = build_elliptic_matrix(replica_config(config, t))
        out[t] = singular_values(scale_and_shift(X, config.spec.alpha, z))[-1]
    return out


def lsv_tail_curve(config: EllipticEnsembleConfig, z: complex, trials: int,
                   t_grid: Sequence[float], samples: np.ndarray | None = None):
    """Empirical P(s_n(A_n - z) <= t / sqrt(n)) for each t in ``t_grid``.

    Returns ``(curve, samples)`` with curve a list of (t, probability).
    """
    if samples is None:
        samples = least_singular_values(config, z, trials)
    n = config.n
    curve = [(float(t), float(np.mean(samples <= t / math.sqrt(n)))) for t in t_grid]
    return curve, samples


def row_distances(M) -> np.ndarray:
    """dist(R_i, span of the other rows) for every row, by QR projection."""
    M = _square(M)
    n = M.shape[0]
    out = np.empty(n)
    for i in range(n):
        others = np.delete(M, i, axis=0).T
        if others.shape[1] == 0:
            out[i] = np.linalg.norm(M[i])
            continue
        Q, _ = np.linalg.qr(others)
        x = M[i]
        out[i] = np.linalg.norm(x - Q @ (Q.conj().T @ x))
    return out


def negative_second_moment_identity(M) -> tuple[float, float]:
    """Both sides of sum s_i^-2 = sum dist(R_i, R_-i)^-2."""
    M = _square(M)
    s = singular_values(M)
    if not s[-1] > 1e-12 * s[0]:
        raise PreconditionError("matrix is numerically rank deficient")
    return float(np.sum(s ** -2.0)), float(np.sum(row_distances(M) ** -2.0))
