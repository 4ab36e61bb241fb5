"""Deterministic 64-bit PRNG with named substreams.

All sampling in the toolkit flows through this module so generated
corpora are reproducible byte-for-byte across platforms and Python
versions. Substreams are keyed by strings (template id, purpose tag),
so per-template draws are independent of generation order.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


class Rng:
    """SplitMix64 sequence generator."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("randbelow requires a positive bound")
        span = _MASK64 + 1
        limit = span - (span % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def stream(master_seed: int, *tags: str) -> Rng:
    """Substream keyed by tags, decorrelated from the master seed."""
    return Rng(mix64((master_seed & _MASK64) ^ fnv1a64("\x1f".join(tags))))


def sample_prefix(rng: Rng, n_draw: int, n_total: int) -> list[int]:
    """First ``n_draw`` entries of a Fisher-Yates permutation of range(n_total).

    Draw i only consumes generator state for position i, so for a fresh
    stream the first k draws are a prefix of the first k' draws whenever
    k <= k'.  This is what makes small-k training sets nest inside
    larger-k ones.
    """
    if not 0 <= n_draw <= n_total:
        raise ValueError(f"cannot draw {n_draw} of {n_total}")
    swapped: dict[int, int] = {}
    out = []
    for i in range(n_draw):
        j = i + rng.randbelow(n_total - i)
        vi = swapped.get(i, i)
        vj = swapped.get(j, j)
        out.append(vj)
        swapped[i] = vj
        swapped[j] = vi
    return out
