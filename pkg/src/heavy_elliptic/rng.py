"""Counter-based random streams.

Every draw is a pure function of ``(base_seed, stream_index, counter)``: the
stream state is a hash of seed and index, and the k-th output is the k-th
SplitMix64 output from that state. This gives the stream addressing the
samplers need (one stream per matrix pair, per tree node, per population
entry) and lets the compiled kernels reproduce the numpy draws exactly.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
SEED_SALT = np.uint64(0x243F6A8885A308D3)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_MASK64 = (1 << 64) - 1
_INV53 = 2.0 ** -53


def _u64(x) -> np.ndarray:
    """Coerce Python ints (possibly negative or >= 2**63) to a uint64 array."""
    if isinstance(x, np.ndarray) and x.dtype == np.uint64:
        return x
    if isinstance(x, (int, np.integer)):
        return np.array(int(x) & _MASK64, dtype=np.uint64)
    arr = np.asarray(x)
    if arr.dtype == np.uint64:
        return arr
    return arr.astype(np.int64).astype(np.uint64)


def mix64(x) -> np.ndarray:
    """SplitMix64 finalizer (wrapping uint64 arithmetic)."""
    with np.errstate(over="ignore"):
        x = _u64(x)
        x = x ^ (x >> _S30)
        x = x * _M1
        x = x ^ (x >> _S27)
        x = x * _M2
        return x ^ (x >> _S31)


def seed_state(seed) -> np.ndarray:
    return mix64(_u64(seed) ^ SEED_SALT)


def stream_state(seed, stream) -> np.ndarray:
    """State word of stream ``stream`` under base seed ``seed`` (broadcasts)."""
    with np.errstate(over="ignore"):
        return mix64(seed_state(seed) ^ mix64(_u64(stream) + GOLDEN))


def raw_outputs(state, counter) -> np.ndarray:
    """The ``counter``-th SplitMix64 output of each state (broadcasts)."""
    with np.errstate(over="ignore"):
        c = _u64(counter) + np.uint64(1)
        return mix64(_u64(state) + c * GOLDEN)


def uniforms_from_state(state, counter) -> np.ndarray:
    """Uniforms on the open interval (0, 1) at 53-bit resolution."""
    h = raw_outputs(state, counter)
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV53


def uniforms(seed, stream, counter) -> np.ndarray:
    return uniforms_from_state(stream_state(seed, stream), counter)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed, e.g. one per replica of an experiment."""
    s = seed_state(seed)
    for k in keys:
        with np.errstate(over="ignore"):
            s = mix64(s ^ mix64(_u64(k) + GOLDEN))
    return int(s)


class RngStream:
    """Sequential view of one addressed stream.

    Identical ``(base_seed, stream_index)`` pairs yield identical sequences
    regardless of what other streams are consumed or in what order.
    """

    def __init__(self, base_seed: int, stream_index: int = 0):
        self.base_seed = int(base_seed) & _MASK64
        self.stream_index = int(stream_index) & _MASK64
        self._state = stream_state(self.base_seed, self.stream_index)
        self.counter = 0

    def __repr__(self) -> str:
        return (f"RngStream(base_seed={self.base_seed}, "
                f"stream_index={self.stream_index}, counter={self.counter})")

    def _take(self, count: int) -> np.ndarray:
        ctr = np.arange(self.counter, self.counter + count, dtype=np.uint64)
        self.counter += count
        return ctr

    def uniform(self, size=None):
        shape = () if size is None else (size if isinstance(size, tuple) else (int(size),))
        count = int(np.prod(shape)) if shape else 1
        u = uniforms_from_state(self._state, self._take(count))
        return float(u[0]) if size is None else u.reshape(shape)

    def exponential(self, size=None):
        u = self.uniform(size)
        return -np.log(u)

    def integers(self, high: int, size=None):
        u = self.uniform(size)
        out = np.minimum(np.floor(np.asarray(u) * high), high - 1).astype(np.int64)
        return int(out) if size is None else out

    def next_key(self) -> int:
        """A fresh 64-bit word, used to key derived families of streams."""
        return int(raw_outputs(self._state, self._take(1))[0])

    def spawn(self, index: int) -> "RngStream":
        """Independent stream keyed by this stream's address and ``index``."""
        return RngStream(derive_seed(self.base_seed, self.stream_index), index)
