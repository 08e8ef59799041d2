# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_fallback.py``.

Same stream layout, same angular map, same recursion; results agree with
the fallback up to libm rounding.
"""
import numpy as np

from libc.math cimport log, pow, cos, sin, floor
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    """
    #include <stdint.h>
    static const uint64_t HE_GOLDEN = 0x9E3779B97F4A7C15ULL;
    static const uint64_t HE_SALT = 0x243F6A8885A308D3ULL;
    static inline uint64_t he_mix64(uint64_t x) {
        x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27; x *= 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }
    static inline uint64_t he_stream_state(uint64_t seed, uint64_t stream) {
        return he_mix64(he_mix64(seed ^ HE_SALT) ^ he_mix64(stream + HE_GOLDEN));
    }
    static inline double he_uniform(uint64_t state, uint64_t counter) {
        uint64_t h = he_mix64(state + (counter + 1) * HE_GOLDEN);
        return ((double)(h >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }
    """
    uint64_t he_stream_state(uint64_t seed, uint64_t stream) nogil
    double he_uniform(uint64_t state, uint64_t counter) nogil

cdef double TWO_PI = 6.283185307179586


cdef struct Angular:
    int kind
    int n
    double complex* vecs      # n x 2, row major
    double* cumw
    double* centers
    double halfwidth
    int sublaw


cdef inline void angular(const Angular* A, double u1, double u2,
                         double complex* w1, double complex* w2) noexcept nogil:
    cdef int i
    cdef double t
    cdef double complex val
    if A.kind == 2:
        t = TWO_PI * u1
        w1[0] = cos(t)
        w2[0] = sin(t)
    elif A.kind == 1:
        i = <int>(u1 * A.n)
        if i > A.n - 1:
            i = A.n - 1
        t = A.centers[i] + A.halfwidth * (2.0 * u2 - 1.0)
        w1[0] = cos(t)
        w2[0] = sin(t)
    elif A.kind == 3:
        if A.sublaw == 0:
            val = 1.0 if u2 < 0.5 else -1.0
        else:
            t = TWO_PI * u2
            val = cos(t) + 1j * sin(t)
        if u1 < 0.5:
            w1[0] = val
            w2[0] = 0
        else:
            w1[0] = 0
            w2[0] = val
    else:
        i = 0
        while i < A.n - 1 and A.cumw[i] <= u1:
            i += 1
        w1[0] = A.vecs[2 * i]
        w2[0] = A.vecs[2 * i + 1]


cdef inline double abs2(double complex x) noexcept nogil:
    return x.real * x.real + x.imag * x.imag


cdef inline double complex conj(double complex x) noexcept nogil:
    return x.real - 1j * x.imag


cdef inline void neg_inverse(double complex m11, double complex m12,
                             double complex m21, double complex m22,
                             double complex* out) noexcept nogil:
    cdef double complex det = m11 * m22 - m12 * m21
    out[0] = -m22 / det
    out[1] = m12 / det
    out[2] = m21 / det
    out[3] = -m11 / det


cdef struct Tree:
    uint64_t key
    int B
    int H
    double inv_alpha
    double p
    double mass
    double rscale
    double tail_scale
    int tail
    double tol
    double complex eta
    double complex z
    double m11
    double complex m12
    double m22
    double complex leaf[4]
    Angular ang
    double complex* y1      # (H+1) x B workspaces, one row per depth
    double complex* y2
    double complex* ra      # child blocks, one row per depth
    double complex* rb
    double complex* rbp
    double complex* rc
    double* sens
    long long nodes


cdef void assemble(Tree* T, int depth, double gB, double complex* out) noexcept nogil:
    cdef int k, B = T.B
    cdef int o = depth * B
    cdef double complex s11 = 0, s12 = 0, s21 = 0, s22 = 0
    cdef double complex ma = 0, mb = 0, mbp = 0, mc = 0
    cdef double complex y1, y2
    cdef double tm
    for k in range(B):
        y1 = T.y1[o + k]
        y2 = T.y2[o + k]
        s11 = s11 + T.rc[o + k] * abs2(y1)
        s12 = s12 + T.rbp[o + k] * y1 * y2
        s21 = s21 + T.rb[o + k] * conj(y1 * y2)
        s22 = s22 + T.ra[o + k] * abs2(y2)
    if T.tail:
        for k in range(B):
            ma = ma + T.ra[o + k]
            mb = mb + T.rb[o + k]
            mbp = mbp + T.rbp[o + k]
            mc = mc + T.rc[o + k]
        tm = T.tail_scale * pow(gB, 1.0 - T.p)
        s11 = s11 + tm * (mc / B) * T.m11
        s12 = s12 + tm * (mbp / B) * T.m12
        s21 = s21 + tm * (mb / B) * conj(T.m12)
        s22 = s22 + tm * (ma / B) * T.m22
    neg_inverse(T.eta + s11, T.z + s12, conj(T.z) + s21, T.eta + s22, out)


cdef void visit(Tree* T, uint64_t nid, int depth, double sens, double complex* out) noexcept nogil:
    cdef int k, B = T.B
    cdef int o = depth * B
    cdef uint64_t st = he_stream_state(T.key, nid)
    cdef double g = 0.0, r, nr, sk
    cdef double complex w1, w2
    cdef double complex blk[4]
    for k in range(B):
        g += -log(he_uniform(st, 3 * <uint64_t>k))
        r = pow(g, -T.inv_alpha) * T.rscale
        angular(&T.ang, he_uniform(st, 3 * <uint64_t>k + 1), he_uniform(st, 3 * <uint64_t>k + 2), &w1, &w2)
        T.y1[o + k] = r * w1
        T.y2[o + k] = r * w2
        T.ra[o + k] = T.leaf[0]
        T.rb[o + k] = T.leaf[1]
        T.rbp[o + k] = T.leaf[2]
        T.rc[o + k] = T.leaf[3]
    T.nodes += B
    if depth + 1 >= T.H:
        assemble(T, depth, g, out)
        return
    if T.tol > 0:
        assemble(T, depth, g, blk)
        nr = abs2(blk[0]) + abs2(blk[1]) + abs2(blk[2]) + abs2(blk[3])
        for k in range(B):
            T.sens[o + k] = sens * nr * (abs2(T.y1[o + k]) + abs2(T.y2[o + k]))
    else:
        for k in range(B):
            T.sens[o + k] = 1.0
    for k in range(B):
        sk = T.sens[o + k]
        if T.tol > 0 and sk < T.tol:
            continue
        visit(T, nid * <uint64_t>B + 1 + <uint64_t>k, depth + 1, sk, blk)
        T.ra[o + k] = blk[0]
        T.rb[o + k] = blk[1]
        T.rbp[o + k] = blk[2]
        T.rc[o + k] = blk[3]
    assemble(T, depth, g, out)


cdef void fill_angular(Angular* A, dict ang, double complex[:, ::1] vecs,
                       double[::1] cumw, double[::1] centers):
    A.kind = ang["kind"]
    A.halfwidth = ang["halfwidth"]
    A.sublaw = ang["sublaw"]
    A.vecs = &vecs[0, 0]
    A.cumw = &cumw[0]
    A.centers = &centers[0]
    if A.kind == 1:
        A.n = centers.shape[0]
    else:
        A.n = cumw.shape[0]


def pwit_root(uint64_t key, int B, int H, double alpha, double mass, dict ang,
              double complex eta, double complex z, double tol, bint tail, moments):
    cdef Tree T
    cdef double complex[:, ::1] vecs = np.ascontiguousarray(ang["vecs"], dtype=complex)
    cdef double[::1] cumw = np.ascontiguousarray(ang["cumw"], dtype=float)
    cdef double[::1] centers = np.ascontiguousarray(ang["centers"], dtype=float)
    cdef double complex out[4]
    cdef int n = (H + 1) * B
    fill_angular(&T.ang, ang, vecs, cumw, centers)
    T.key = key
    T.B = B
    T.H = H
    T.inv_alpha = 1.0 / alpha
    T.p = 2.0 / alpha
    T.mass = mass
    T.rscale = pow(mass, 1.0 / alpha)
    T.tail_scale = pow(mass, T.p) / (T.p - 1.0)
    T.tail = tail
    T.tol = tol
    T.eta = eta
    T.z = z
    T.m11 = moments[0]
    T.m12 = moments[1]
    T.m22 = moments[2]
    neg_inverse(eta, z, conj(z), eta, T.leaf)
    T.nodes = 1
    if H == 0:
        return np.array([[T.leaf[0], T.leaf[1]], [T.leaf[2], T.leaf[3]]]), 1
    T.y1 = <double complex*>malloc(n * sizeof(double complex))
    T.y2 = <double complex*>malloc(n * sizeof(double complex))
    T.ra = <double complex*>malloc(n * sizeof(double complex))
    T.rb = <double complex*>malloc(n * sizeof(double complex))
    T.rbp = <double complex*>malloc(n * sizeof(double complex))
    T.rc = <double complex*>malloc(n * sizeof(double complex))
    T.sens = <double*>malloc(n * sizeof(double))
    try:
        with nogil:
            visit(&T, 0, 0, 1.0, out)
    finally:
        free(T.y1); free(T.y2); free(T.ra); free(T.rb); free(T.rbp); free(T.rc); free(T.sens)
    return np.array([[out[0], out[1]], [out[2], out[3]]]), T.nodes


def rde_generation(double complex[::1] a, double complex[::1] b, double complex[::1] bp,
                   double complex[::1] c, uint64_t key, uint64_t generation, int K,
                   double alpha, double mass, dict ang, double complex eta, double complex z,
                   bint tail, moments, chunk=None):
    cdef Py_ssize_t P = a.shape[0], e
    cdef int k
    cdef Angular A
    cdef double complex[:, ::1] vecs = np.ascontiguousarray(ang["vecs"], dtype=complex)
    cdef double[::1] cumw = np.ascontiguousarray(ang["cumw"], dtype=float)
    cdef double[::1] centers = np.ascontiguousarray(ang["centers"], dtype=float)
    out = np.empty((4, P), dtype=complex)
    cdef double complex[:, ::1] o = out
    cdef double p = 2.0 / alpha
    cdef double r2scale = pow(mass, p)
    cdef double tail_scale = pow(mass, p) / (p - 1.0)
    cdef double m11 = moments[0], m22 = moments[2]
    cdef double complex m12 = moments[1]
    cdef double complex ma = np.asarray(a).mean(), mb = np.asarray(b).mean()
    cdef double complex mbp = np.asarray(bp).mean(), mc = np.asarray(c).mean()
    cdef uint64_t st
    cdef double g, r2, tm
    cdef Py_ssize_t idx
    cdef double complex w1, w2, s11, s12, s21, s22
    cdef double complex res[4]
    fill_angular(&A, ang, vecs, cumw, centers)
    with nogil:
        for e in range(P):
            st = he_stream_state(key, generation * (<uint64_t>1 << 32) + <uint64_t>e)
            g = 0.0
            s11 = 0; s12 = 0; s21 = 0; s22 = 0
            for k in range(K):
                g += -log(he_uniform(st, 4 * <uint64_t>k))
                r2 = pow(g, -p) * r2scale
                idx = <Py_ssize_t>(he_uniform(st, 4 * <uint64_t>k + 1) * P)
                if idx > P - 1:
                    idx = P - 1
                angular(&A, he_uniform(st, 4 * <uint64_t>k + 2), he_uniform(st, 4 * <uint64_t>k + 3), &w1, &w2)
                s11 = s11 + r2 * c[idx] * abs2(w1)
                s12 = s12 + r2 * bp[idx] * w1 * w2
                s21 = s21 + r2 * b[idx] * conj(w1 * w2)
                s22 = s22 + r2 * a[idx] * abs2(w2)
            if tail:
                tm = tail_scale * pow(g, 1.0 - p)
                s11 = s11 + tm * mc * m11
                s12 = s12 + tm * mbp * m12
                s21 = s21 + tm * mb * conj(m12)
                s22 = s22 + tm * ma * m22
            neg_inverse(eta + s11, z + s12, conj(z) + s21, eta + s22, res)
            o[0, e] = res[0]
            o[1, e] = res[1]
            o[2, e] = res[2]
            o[3, e] = res[3]
    return out[0], out[1], out[2], out[3]
