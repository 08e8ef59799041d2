"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` mirrors them in C.
Both draw every random number from :mod:`heavy_elliptic.rng` streams so the
two paths agree to rounding.
"""
from __future__ import annotations

import numpy as np

from .rng import stream_state, uniforms_from_state

_TWO_PI = 2.0 * np.pi


def angular(kind, vecs, cumw, centers, halfwidth, sublaw, u1, u2):
    """Vectorized angular map; returns (w1, w2) complex arrays."""
    if kind == 2:
        t = _TWO_PI * u1
        return np.cos(t) + 0j, np.sin(t) + 0j
    if kind == 1:
        idx = np.minimum((u1 * len(centers)).astype(np.int64), len(centers) - 1)
        t = centers[idx] + halfwidth * (2.0 * u2 - 1.0)
        return np.cos(t) + 0j, np.sin(t) + 0j
    if kind == 3:
        if sublaw == 0:
            val = np.where(u2 < 0.5, 1.0, -1.0) + 0j
        else:
            val = np.exp(1j * (_TWO_PI * u2))
        first = u1 < 0.5
        return np.where(first, val, 0j), np.where(first, 0j, val)
    idx = np.minimum(np.searchsorted(cumw, u1, side="right"), len(cumw) - 1)
    return vecs[idx, 0], vecs[idx, 1]


def node_weights(key, node_ids, B, alpha, mass, ang):
    """Edge weights to the B children of each node in ``node_ids``.

    Child j of a node uses counters 3j (exponential), 3j+1, 3j+2 (angle) of
    the node's stream. Returns y1, y2 of shape (m, B) and Gamma_B of shape (m,).
    """
    st = stream_state(key, np.asarray(node_ids, dtype=np.uint64))[:, None]
    j = np.arange(B, dtype=np.uint64)[None, :]
    e = -np.log(uniforms_from_state(st, 3 * j))
    g = np.cumsum(e, axis=1)
    r = g ** (-1.0 / alpha) * mass ** (1.0 / alpha)
    w1, w2 = angular(ang["kind"], ang["vecs"], ang["cumw"], ang["centers"],
                     ang["halfwidth"], ang["sublaw"],
                     uniforms_from_state(st, 3 * j + 1), uniforms_from_state(st, 3 * j + 2))
    return r * w1, r * w2, g[:, -1]


def assemble(eta, z, y1, y2, ca, cb, cbp, cc, gB, tail, alpha, mass, moments):
    """New root blocks -(U + sum_k Y_k R_k Y_k')^{-1}, rows = parents."""
    s11 = (cc * (y1.real ** 2 + y1.imag ** 2)).sum(axis=-1)
    s12 = (cbp * y1 * y2).sum(axis=-1)
    s21 = (cb * np.conj(y1 * y2)).sum(axis=-1)
    s22 = (ca * (y2.real ** 2 + y2.imag ** 2)).sum(axis=-1)
    if tail:
        p = 2.0 / alpha
        tm = mass ** p * gB ** (1.0 - p) / (p - 1.0)
        m11, m12, m22 = moments
        s11 = s11 + tm * cc.mean(axis=-1) * m11
        s12 = s12 + tm * cbp.mean(axis=-1) * m12
        s21 = s21 + tm * cb.mean(axis=-1) * np.conj(m12)
        s22 = s22 + tm * ca.mean(axis=-1) * m22
    return neg_inverse(eta + s11, z + s12, np.conj(z) + s21, eta + s22)


def neg_inverse(m11, m12, m21, m22):
    det = m11 * m22 - m12 * m21
    return -m22 / det, m12 / det, m21 / det, -m11 / det


def pwit_root(key, B, H, alpha, mass, ang, eta, z, tol, tail, moments):
    """Root resolvent block of a B-ary depth-H PWIT, depth first.

    With ``tol > 0`` a child is expanded only if its estimated influence on
    the root, sens(parent) * |R1(parent)|_F^2 * |y|^2 with R1 the parent's
    block computed from leaf children, is at least ``tol``. Nodes are
    numbered in level order: the children of node v are v*B + 1 .. v*B + B.
    """
    leaf = neg_inverse(eta, z, np.conj(z), eta)
    count = [1]

    def visit(nid, depth, sens):
        y1, y2, gB = node_weights(key, [nid], B, alpha, mass, ang)
        y1, y2, gB = y1[0], y2[0], gB[0]
        count[0] += B
        ca = np.full(B, leaf[0], dtype=complex)
        cb = np.full(B, leaf[1], dtype=complex)
        cbp = np.full(B, leaf[2], dtype=complex)
        cc = np.full(B, leaf[3], dtype=complex)
        if depth + 1 >= H:
            return assemble(eta, z, y1, y2, ca, cb, cbp, cc, gB, tail, alpha, mass, moments)
        if tol > 0:
            r1 = assemble(eta, z, y1, y2, ca, cb, cbp, cc, gB, tail, alpha, mass, moments)
            nr = sum(abs(x) ** 2 for x in r1)
            child_sens = sens * nr * (np.abs(y1) ** 2 + np.abs(y2) ** 2)
        else:
            child_sens = np.ones(B)
        for k in range(B):
            if tol > 0 and child_sens[k] < tol:
                continue
            rk = visit(nid * B + 1 + k, depth + 1, child_sens[k])
            ca[k], cb[k], cbp[k], cc[k] = rk
        return assemble(eta, z, y1, y2, ca, cb, cbp, cc, gB, tail, alpha, mass, moments)

    if H == 0:
        return np.array([[leaf[0], leaf[1]], [leaf[2], leaf[3]]]), 1
    a, b, bp, c = visit(0, 0, 1.0)
    return np.array([[a, b], [bp, c]], dtype=complex), count[0]


def rde_generation(a, b, bp, c, key, generation, K, alpha, mass, ang, eta, z,
                   tail, moments, chunk=4096):
    """One population-dynamics sweep.

    Entry e of generation t reads stream ``t * 2**32 + e``; term k uses
    counters 4k (exponential), 4k+1 (pool index), 4k+2, 4k+3 (angle).
    """
    P = len(a)
    out = [np.empty(P, dtype=complex) for _ in range(4)]
    means = (a.mean(), b.mean(), bp.mean(), c.mean())
    k4 = 4 * np.arange(K, dtype=np.uint64)[None, :]
    p = 2.0 / alpha
    for lo in range(0, P, chunk):
        hi = min(P, lo + chunk)
        streams = np.uint64(generation) * np.uint64(1 << 32) + np.arange(lo, hi, dtype=np.uint64)
        st = stream_state(key, streams)[:, None]
        g = np.cumsum(-np.log(uniforms_from_state(st, k4)), axis=1)
        r2 = g ** (-p) * mass ** p
        idx = np.minimum((uniforms_from_state(st, k4 + 1) * P).astype(np.int64), P - 1)
        w1, w2 = angular(ang["kind"], ang["vecs"], ang["cumw"], ang["centers"],
                         ang["halfwidth"], ang["sublaw"],
                         uniforms_from_state(st, k4 + 2), uniforms_from_state(st, k4 + 3))
        s11 = (r2 * c[idx] * (w1.real ** 2 + w1.imag ** 2)).sum(axis=1)
        s12 = (r2 * bp[idx] * w1 * w2).sum(axis=1)
        s21 = (r2 * b[idx] * np.conj(w1 * w2)).sum(axis=1)
        s22 = (r2 * a[idx] * (w2.real ** 2 + w2.imag ** 2)).sum(axis=1)
        if tail:
            tm = mass ** p * g[:, -1] ** (1.0 - p) / (p - 1.0)
            m11, m12, m22 = moments
            s11 = s11 + tm * means[3] * m11
            s12 = s12 + tm * means[2] * m12
            s21 = s21 + tm * means[1] * np.conj(m12)
            s22 = s22 + tm * means[0] * m22
        na, nb, nbp, nc = neg_inverse(eta + s11, z + s12, np.conj(z) + s21, eta + s22)
        out[0][lo:hi], out[1][lo:hi], out[2][lo:hi], out[3][lo:hi] = na, nb, nbp, nc
    return tuple(out)
