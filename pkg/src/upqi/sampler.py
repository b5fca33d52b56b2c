"""Deterministic Monte Carlo draws of homodyne outcomes.

The uniform stream is SplitMix64, which has a closed form for its k-th output
(``mix(seed + (k + 1) * GOLDEN)``), so a whole block is generated in one
vectorized pass. Normals come from the basic Box-Muller transform, two uniforms
per pair, no rejection, so stream consumption never depends on the data.

Outcomes are Normal because the output state is Gaussian and S is linear in the
quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadVarianceError, TooFewSamplesError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_M53 = 2.0**-53


def splitmix64_mix(z: int) -> int:
    """Scalar SplitMix64 finalizer on Python ints."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64_stream(seed: int, n: int) -> np.ndarray:
    """First ``n`` SplitMix64 outputs for ``seed`` as uint64."""
    k = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + k * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master_seed: int, *keys: int) -> int:
    """Seed for one (pixel_i, pixel_j, setting_index) cell. Each key is folded in
    with one SplitMix64 round, so the result depends only on the inputs."""
    h = splitmix64_mix((master_seed & MASK64) + GOLDEN)
    for key in keys:
        h = splitmix64_mix(((h ^ (key & MASK64)) + GOLDEN) & MASK64)
    return h


def standard_normals(seed: int, n: int) -> np.ndarray:
    pairs = (n + 1) // 2
    bits = splitmix64_stream(seed, 2 * pairs) >> np.uint64(11)
    # u1 in (0, 1] keeps the log finite; u2 in [0, 1)
    u1 = (bits[0::2] + np.uint64(1)).astype(np.float64) * _TWO_M53
    u2 = bits[1::2].astype(np.float64) * _TWO_M53
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = rad * np.cos(ang)
    out[1::2] = rad * np.sin(ang)
    return out[:n]


def sample_homodyne(mean: float, variance: float, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. draws from ``Normal(mean, variance)``, reproducible from ``seed``."""
    if not math.isfinite(variance) or variance < 0:
        raise BadVarianceError(f"variance must be finite and >= 0, got {variance!r}")
    if n < 1:
        raise TooFewSamplesError(f"need n >= 1, got {n}")
    return mean + math.sqrt(variance) * standard_normals(seed, n)


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean_hat: float
    var_hat: float
    se_mean: float
    se_var: float


def estimate(samples) -> SampleStats:
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {n}")
    mean_hat = float(x.mean())
    var_hat = float(np.sum((x - mean_hat) ** 2) / (n - 1))
    return SampleStats(
        n=n,
        mean_hat=mean_hat,
        var_hat=var_hat,
        se_mean=math.sqrt(var_hat / n),
        se_var=var_hat * math.sqrt(2.0 / (n - 1)),
    )
