"""splitmix64: the package's only source of randomness.

Chosen because it is a few lines in any language, so a trial stream can be
reproduced bit-for-bit elsewhere.  Floats take the top 53 bits.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_TWO_M53 = 2.0**-53


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform on [0, 1)."""
        return (self.next_u64() >> 11) * _TWO_M53

    def random_open(self) -> float:
        """Uniform on (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _TWO_M53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def uniform_open(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random_open()

    def randbelow(self, n: int) -> int:
        # modulo bias is below 2**-59 for the small n used here
        return self.next_u64() % n

    def split(self) -> "SplitMix64":
        """Independent child stream seeded from the next output."""
        return SplitMix64(self.next_u64())
