"""Counter-based deterministic random streams.

Everything random in this package flows through `SplitStream`, a stateless
counter generator built on the splitmix64 output mix.  Rationale: results must
be bit-identical across platforms, processes, and thread schedules, and the
stream for (seed, index) must be derivable without generating any other
stream.  Library generators do not give all three, and external tooling in
other languages has to be able to reproduce the exact draws with 64-bit
integer arithmetic alone.

Definition (all arithmetic mod 2**64):

    mix(z)      = splitmix64 finalizer of z
    state(s, t) = mix(mix(s) + GOLDEN * t)       # stream t of seed s
    value(n)    = mix(state + (n + 1) * GOLDEN)  # n-th draw of the stream
    uniform(n)  = (value(n) >> 11) * 2.0**-53    # in [0, 1)

A stream with state(s, t) = z therefore replays the reference splitmix64
sequence seeded with z, which is what the golden-vector test pins down.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


class SplitStream:
    """Stream `stream` of seed `seed`; draw n is a pure function of (seed, stream, n)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._state = mix64((mix64(self.seed) + _GOLDEN * (self.stream & _MASK)) & _MASK)
        self._n = 0

    def substream(self, stream: int) -> "SplitStream":
        """Child stream keyed off this stream's state; independent of draw position."""
        return SplitStream(self._state, stream)

    def next_u64(self) -> int:
        v = mix64((self._state + (self._n + 1) * _GOLDEN) & _MASK)
        self._n += 1
        return v

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u

    def uniforms(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1), identical to n successive `uniform()` calls."""
        counters = np.arange(self._n + 1, self._n + n + 1, dtype=np.uint64)
        raw = _mix64_array(np.uint64(self._state) + counters * np.uint64(_GOLDEN))
        self._n += n
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def gauss(self) -> float:
        # Box-Muller; two fresh uniforms per call, no caching, so the draw
        # count stays a pure function of the call count.
        u1 = max(self.uniform(), 2.0**-53)
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def gauss_vector(self, n: int) -> np.ndarray:
        u = self.uniforms(2 * n)
        u1 = np.maximum(u[0::2], 2.0**-53)
        u2 = u[1::2]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def sample_indices(self, n: int, k: int) -> np.ndarray:
        """k of n indices without replacement, ascending.

        Draws one uniform key per index and keeps the k smallest; ties are
        impossible in practice (53-bit keys), and the ascending sort makes the
        result independent of the selection internals.
        """
        if k >= n:
            return np.arange(n)
        keys = self.uniforms(n)
        chosen = np.argsort(keys, kind="stable")[:k]
        return np.sort(chosen)
