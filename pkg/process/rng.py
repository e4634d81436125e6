"""Reproducible randomness for the dispersion process.

Each trial owns a ``StepStreams`` keyed by its 64-bit seed. Step ``t`` gets a
fresh Philox stream whose counter starts at ``t << 192``, so the draws of a
step depend only on (seed, t) and never on how many numbers earlier steps
consumed.

Binomial(k, 1/2) variables are sampled exactly as the popcount of k
uniformly random bits, taken in 64-bit words.

Usage:
    streams = StepStreams(seed=42)
    stream = streams.for_step(0)
    rights = binomial_half(stream.generator, [5, 2, 1000])
"""

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
WORD_BITS = 64


# =============================================================================
# Streams
# =============================================================================

@dataclass(frozen=True)
class StepStream:
    """Random stream for a single synchronous step."""
    t: int
    stream_id: str
    generator: np.random.Generator


class StepStreams:
    """Counter-based stream factory keyed by (trial seed, step index)."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64

    def for_step(self, t: int) -> StepStream:
        """Return the stream for step ``t`` (t >= 0)."""
        bit_generator = np.random.Philox(key=self.seed, counter=t << 192)
        return StepStream(
            t=t,
            stream_id=f"philox:{self.seed:016x}:{t}",
            generator=np.random.Generator(bit_generator),
        )


# =============================================================================
# Exact Binomial(k, 1/2)
# =============================================================================

def random_words(generator: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` uniform 64-bit words straight from the bit generator."""
    return np.asarray(generator.bit_generator.random_raw(size), dtype=np.uint64)


def binomial_half(generator: np.random.Generator, counts) -> np.ndarray:
    """Sample independent Binomial(k, 1/2) for every k in ``counts``.

    The result for count k is the number of set bits among k fresh random
    bits. Counts are served in the given order, which makes the output a
    deterministic function of (counts, stream state).
    """
    counts = np.asarray(counts, dtype=np.int64)
    out = np.zeros(counts.shape, dtype=np.int64)
    nonzero = np.flatnonzero(counts > 0)
    if nonzero.size == 0:
        return out

    ks = counts[nonzero]
    words_per = (ks + WORD_BITS - 1) // WORD_BITS
    ends = np.cumsum(words_per)
    starts = ends - words_per
    words = random_words(generator, int(ends[-1]))

    # Keep only the low (k mod 64) bits of each site's last word
    remainder = (ks % WORD_BITS).astype(np.uint64)
    partial = remainder > 0
    last = ends[partial] - 1
    masks = (np.uint64(1) << remainder[partial]) - np.uint64(1)
    words[last] &= masks

    bits = np.bitwise_count(words).astype(np.int64)
    out[nonzero] = np.add.reduceat(bits, starts)
    return out


__all__ = ["StepStream", "StepStreams", "binomial_half", "random_words", "MASK64"]
