"""Counter-based SplitMix64 stream with Box-Muller normals.

Pure integer arithmetic up to the final conversion to doubles, so the uniform
stream is bit-identical on every platform.  The normal deviates additionally
depend on libm's ``log``/``cos``/``sin`` under the default rounding mode.
"""
import numpy as np

# Single default for every seeded step (training, suites) when none is given.
DEFAULT_SEED = 5

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the SplitMix64 sequence seeded with ``seed``."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & MASK64) + counters * np.uint64(GOLDEN_GAMMA)
        return _mix(state)


def mix64(*values: int) -> int:
    """Hash a tuple of integers into one 64-bit value (used to derive per-case seeds)."""
    acc = 0
    for value in values:
        acc = int(splitmix64(acc ^ (value & MASK64), 1)[0])
    return acc


def uniforms(seed: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) built from the top 53 bits of each output."""
    bits = splitmix64(seed, count) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / (1 << 53))


def standard_normals(seed: int, count: int) -> np.ndarray:
    pairs = (count + 1) // 2
    u = uniforms(seed, 2 * pairs)
    u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]
