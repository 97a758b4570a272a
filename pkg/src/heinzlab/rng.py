"""Counter-based random streams.

Every draw is a pure function of ``(seed, counter)``, so trial ``i`` can be
regenerated without replaying trials ``0..i-1`` and any number of workers
produce identical streams.

The generator is SplitMix64 evaluated at an arbitrary position:

    key     = mix64(seed + GAMMA)
    out(k)  = mix64(key + GAMMA * (k + 1))          (mod 2**64)

    mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27;  z *= 0x94D049BB133111EB
               z ^= z >> 31

with ``GAMMA = 0x9E3779B97F4A7C15``.  Trial ``i`` owns counters
``i * LANES .. i * LANES + LANES - 1``.  Uniform doubles take the top 53 bits:
``(out >> 11) * 2**-53`` which lies in ``[0, 1)``.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
LANES = 1024  # counters reserved per trial

_MASK = (1 << 64) - 1


def mix64(z):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64).copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX2)
    z ^= z >> np.uint64(31)
    return z


def stream_key(seed):
    seed = int(seed)
    if not 0 <= seed <= _MASK:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return int(mix64(np.uint64((seed + GAMMA) & _MASK)))


def raw64(seed, counters):
    """Raw 64-bit outputs at the given counter positions."""
    key = np.uint64(stream_key(seed))
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(key + np.uint64(GAMMA) * (c + np.uint64(1)))


def uniform(seed, counters):
    """Doubles in [0, 1) at the given counter positions."""
    bits = raw64(seed, counters) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0**-53


def counters(index, lane):
    """Counter for ``lane`` of trial ``index`` (both may be arrays)."""
    index = np.asarray(index, dtype=np.uint64)
    lane = np.asarray(lane, dtype=np.uint64)
    return index * np.uint64(LANES) + lane


def normal_pair(u1, u2):
    """Box-Muller transform of two uniform arrays on [0, 1)."""
    r = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 is in (0, 1]
    t = 2.0 * np.pi * u2
    return r * np.cos(t), r * np.sin(t)
