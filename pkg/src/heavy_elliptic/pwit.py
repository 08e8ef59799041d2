"""Truncated Poisson weighted infinite trees and their root resolvent.

Node ids are level order: the root is 0 and the children of node v are
v*B + 1, ..., v*B + B. Node v draws its child edge weights from the stream
(key, v), so a node's weights do not depend on the depth of the tree or on
which other nodes are visited. This is what lets the materialized trees
below, the streaming kernel and trees of different depth share weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _fallback, kernels
from .ensemble import HalfPlanePoint, ResolventBlock, bipartize
from .heavy_sampler import SpectralMeasureSpec, angular_moments
from .rng import RngStream

MAX_NODES = 10 ** 7
DEFAULT_BRANCHING = 50
DEFAULT_DEPTH = 6
DEFAULT_PRUNE_TOL = 1e-5

# tau_stopping_time result when the horizon is too short
SATURATED = -1


class TreeTooLargeError(ValueError):
    pass


class InvariantFailure(ArithmeticError):
    pass


def _as_point(u) -> HalfPlanePoint:
    return u if isinstance(u, HalfPlanePoint) else HalfPlanePoint(*u)


def tree_size(B: int, H: int) -> int:
    if B == 1:
        return H + 1
    return (B ** (H + 1) - 1) // (B - 1)


def level_offset(B: int, d: int) -> int:
    """Id of the first node at depth d."""
    return tree_size(B, d - 1) if d > 0 else 0


@dataclass
class TruncatedPWIT:
    """A materialized B-ary depth-H tree.

    ``y1[d]`` and ``y2[d]`` have shape (B**d, B): row i holds the weights on
    the edges from the i-th node at depth d to its children, where y1 is the
    entry A(parent, child) and y2 the entry A(child, parent). Rows are sorted
    by decreasing norm. ``gamma_last[d]`` is Gamma_B of each depth-d node.
    """

    spec: SpectralMeasureSpec
    B: int
    H: int
    key: int
    y1: list = field(default_factory=list)
    y2: list = field(default_factory=list)
    gamma_last: list = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return tree_size(self.B, self.H)

    def root_weights(self) -> np.ndarray:
        """(B, 2) array of the root's edge weights."""
        if self.H == 0:
            return np.zeros((0, 2), dtype=complex)
        return np.stack([self.y1[0][0], self.y2[0][0]], axis=1)


def sample_truncated_pwit(spec: SpectralMeasureSpec, B: int, H: int, rng: RngStream,
                          key: int | None = None) -> TruncatedPWIT:
    """Materialize all B**H weights of a truncated tree.

    ``key`` fixes the tree directly; otherwise one word is drawn from ``rng``.
    """
    if B < 1 or H < 0:
        raise ValueError("need B >= 1 and H >= 0")
    n = tree_size(B, H)
    if n > MAX_NODES:
        raise TreeTooLargeError(f"{n} nodes exceeds the {MAX_NODES} node limit; "
                                "use pwit_stieltjes_estimate for large trees")
    if key is None:
        key = rng.next_key()
    tree = TruncatedPWIT(spec, B, H, int(key))
    ang = spec.kernel_params()
    for d in range(H):
        ids = np.arange(level_offset(B, d), level_offset(B, d) + B ** d, dtype=np.uint64)
        y1, y2, g = _fallback.node_weights(tree.key, ids, B, spec.alpha, spec.total_mass, ang)
        tree.y1.append(y1)
        tree.y2.append(y2)
        tree.gamma_last.append(g)
    return tree


def recursive_resolvent(tree: TruncatedPWIT, u, tail_correction: bool = False) -> ResolventBlock:
    """Root block of the resolvent of the truncated tree, evaluated bottom up.

    Leaves get -U^{-1}. With ``tail_correction`` each node adds the expected
    contribution of its children beyond the B-th, using the mean of its B
    children's blocks (this is no longer the resolvent of a finite operator).
    """
    u = _as_point(u)
    eta, z = complex(u.eta), complex(u.z)
    spec = tree.spec
    moments = angular_moments(spec)
    leaf = _fallback.neg_inverse(eta, z, np.conj(z), eta)
    B = tree.B
    blocks = [np.full(B ** tree.H, v, dtype=complex) for v in leaf]
    for d in range(tree.H - 1, -1, -1):
        ca, cb, cbp, cc = (x.reshape(B ** d, B) for x in blocks)
        blocks = list(_fallback.assemble(eta, z, tree.y1[d], tree.y2[d], ca, cb, cbp, cc,
                                         tree.gamma_last[d], tail_correction, spec.alpha,
                                         spec.total_mass, moments))
        if not np.all(np.isfinite(blocks[0])):
            raise InvariantFailure("singular 2x2 block in the tree recursion")
    return ResolventBlock(*(complex(np.ravel(x)[0]) for x in blocks))


def tree_operator_matrix(tree: TruncatedPWIT) -> np.ndarray:
    """Weighted adjacency matrix of the tree in node-id order: entry (v, child)
    is y1 and entry (child, v) is y2."""
    n = tree.n_nodes
    A = np.zeros((n, n), dtype=complex)
    B = tree.B
    for d in range(tree.H):
        parents = np.arange(level_offset(B, d), level_offset(B, d) + B ** d)
        children = parents[:, None] * B + 1 + np.arange(B)[None, :]
        A[parents[:, None], children] = tree.y1[d]
        A[children, parents[:, None]] = tree.y2[d]
    return A


def direct_root_block(tree: TruncatedPWIT, u) -> ResolventBlock:
    """Root block of (B(z) - eta I)^{-1} for the tree operator, by dense inversion."""
    u = _as_point(u)
    M = bipartize(tree_operator_matrix(tree), u.z)
    M[np.diag_indices_from(M)] -= u.eta
    e = np.zeros((M.shape[0], 2), dtype=complex)
    e[0, 0] = e[1, 1] = 1.0
    R = np.linalg.solve(M, e)
    return ResolventBlock.from_matrix(R[:2, :2])


@dataclass
class PwitResolventEstimate:
    mean_block: ResolventBlock
    replicas: int
    standard_error: dict | None
    blocks: np.ndarray
    nodes: np.ndarray

    @property
    def se_a(self) -> float | None:
        return None if self.standard_error is None else self.standard_error["a"]


def pwit_root_block(spec: SpectralMeasureSpec, B: int, H: int, u, key: int,
                    prune_tol: float = 0.0, tail_correction: bool = False):
    """Root block of one tree from the streaming kernel; returns (2x2 array, nodes visited).

    ``prune_tol = 0`` evaluates every node and matches ``recursive_resolvent``
    on the same key. A positive value skips subtrees whose estimated influence
    on the root block is below it.
    """
    u = _as_point(u)
    return kernels.pwit_root(int(key), int(B), int(H), spec.alpha, spec.total_mass,
                             spec.kernel_params(), complex(u.eta), complex(u.z),
                             float(prune_tol), bool(tail_correction), angular_moments(spec))


def pwit_stieltjes_estimate(spec: SpectralMeasureSpec, B: int, H: int, u, replicas: int,
                            rng: RngStream, prune_tol: float = DEFAULT_PRUNE_TOL,
                            tail_correction: bool = True) -> PwitResolventEstimate:
    """Monte Carlo mean and standard error of the root block over independent trees."""
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    u = _as_point(u)
    blocks = np.empty((replicas, 2, 2), dtype=complex)
    nodes = np.empty(replicas, dtype=np.int64)
    for r in range(replicas):
        blocks[r], nodes[r] = pwit_root_block(spec, B, H, u, rng.next_key(),
                                              prune_tol, tail_correction)
    mean = blocks.mean(axis=0)
    se = None
    if replicas > 1:
        sd = lambda x: float(np.sqrt((np.var(x.real, ddof=1) + np.var(x.imag, ddof=1)) / replicas))
        se = {"a": sd(blocks[:, 0, 0]), "b": sd(blocks[:, 0, 1]),
              "b_prime": sd(blocks[:, 1, 0]), "c": sd(blocks[:, 1, 1])}
    return PwitResolventEstimate(ResolventBlock.from_matrix(mean), replicas, se, blocks, nodes)


def tau_from_gammas(gammas, alpha: float, kappa: float) -> int:
    """Smallest t with sum_{k>t} Gamma_k^{-2/alpha} <= kappa over the given sequence.

    Returns SATURATED if no t below the horizon qualifies.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    g = np.asarray(gammas, dtype=float)
    terms = g ** (-2.0 / alpha)
    # tails[t] = sum of terms[t:], i.e. the sum over k > t in 1-based indexing
    tails = np.cumsum(terms[::-1])[::-1]
    ok = np.nonzero(tails <= kappa)[0]
    return int(ok[0]) if ok.size else SATURATED


def tau_stopping_time(alpha: float, kappa: float, horizon: int, rng: RngStream) -> int:
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    gammas = np.cumsum(rng.exponential(horizon))
    return tau_from_gammas(gammas, alpha, kappa)

