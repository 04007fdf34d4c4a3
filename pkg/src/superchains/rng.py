"""Counter-based random streams for superchain runs.

Every random number consumed anywhere in a run is a pure function of
(root seed, superchain index k, subchain index m, iteration, slot).  That
makes draw tensors bit-identical no matter how the (k, m) grid is scheduled:
serially, in vectorized blocks, or chain subsets run in separate processes.

The generator is the SplitMix64 output function applied to a keyed counter.
Evaluating the mixer at consecutive counter values reproduces the SplitMix64
sequence, which is well tested statistically; here we additionally get O(1)
random access, which stateful bit generators do not offer.  Normals use
Box-Muller so the per-iteration consumption is a fixed slot count (a
rejection method would make slot positions data-dependent).
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# Stream purposes get disjoint key spaces so e.g. superchain-init draws can
# never collide with transition noise.
PURPOSE_INIT = 0x01
PURPOSE_STEP = 0x02


def _mix64(z: np.ndarray) -> np.ndarray:
    # uint64 multiplies wrap by design; keep numpy quiet about it
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def chain_key(seed: int, k, m, purpose: int = PURPOSE_STEP) -> np.ndarray:
    """64-bit stream key for chain (k, m) under a root seed.

    k and m may be arrays (broadcast together) to key many chains at once.
    Keys are injective in (k, m, purpose) for k, m < 2**31 because the mixer
    is a bijection applied to distinct inputs.
    """
    k = np.asarray(k, dtype=np.uint64)
    m = np.asarray(m, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix64(np.uint64(seed) * _GOLDEN + np.uint64(purpose))
        keyed = (k << np.uint64(31)) ^ m ^ np.uint64(purpose)
    return _mix64(base ^ _mix64(keyed))


def uniforms(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """`count` doubles in (0, 1) at slots [start, start+count) of each stream.

    key may have any shape; the result has shape key.shape + (count,).
    """
    slots = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        ctr = np.asarray(key, dtype=np.uint64)[..., None] + (slots + np.uint64(1)) * _GOLDEN
    bits = _mix64(ctr)
    # 53 high bits, offset by half an ulp so 0 and 1 are excluded
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


def normals(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """Standard normals via Box-Muller, consuming exactly 2*ceil(count/2) slots."""
    pairs = (count + 1) // 2
    u = uniforms(key, start, 2 * pairs)
    u1 = u[..., 0::2]
    u2 = u[..., 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    z = np.empty(u.shape, dtype=np.float64)
    z[..., 0::2] = r * np.cos(ang)
    z[..., 1::2] = r * np.sin(ang)
    return z[..., :count]


def slots_per_iteration(dim: int) -> int:
    """Fixed slot budget one transition consumes: normals for a D-vector
    (rounded up to a Box-Muller pair) plus one acceptance uniform."""
    return 2 * ((dim + 1) // 2) + 1


def iteration_normals(key: np.ndarray, iteration: int, dim: int) -> np.ndarray:
    """The D-vector of proposal/momentum normals for one transition."""
    base = iteration * slots_per_iteration(dim)
    return normals(key, base, dim)


def iteration_uniform(key: np.ndarray, iteration: int, dim: int) -> np.ndarray:
    """The Metropolis uniform for one transition."""
    base = iteration * slots_per_iteration(dim) + 2 * ((dim + 1) // 2)
    return uniforms(key, base, 1)[..., 0]
