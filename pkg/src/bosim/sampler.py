"""Truncated-mixture boson sampler.

One sample is drawn in three steps: pick the set of surviving photons
(per-photon Bernoulli with rate eta), pick a mutually indistinguishable
subset of the survivors (binomial over subset sizes, truncated at k and
renormalized when more than k photons survive), then sample the
indistinguishable subset exactly via chain-rule permanent sampling and each
remaining photon independently from its output-column weights.

Batch sampling derives an independent RNG stream from (seed, sample index)
with a counter-based generator, so results are bit-identical regardless of
how many workers participate.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    Interferometer,
    InvalidConfigError,
    NoiseModel,
    OutputSample,
    SizeLimitError,
    TruncationLevel,
)
from .oracle import truncated_level_weights
from .permanent import abs_squared, row_removed_permanents

#: Hard guard on the chain-rule sampler (O(n·2^n) per sample).
INDISTINGUISHABLE_LIMIT = 30


@dataclass(frozen=True)
class SamplerConfig:
    """Immutable, shareable description of one sampling experiment.

    Photons enter the first ``photons`` modes, one per mode.
    """

    interferometer: Interferometer
    photons: int
    noise: NoiseModel
    truncation: TruncationLevel
    seed: int

    def __post_init__(self):
        if self.photons < 0:
            raise InvalidConfigError(f"photon count must be non-negative, got {self.photons}")
        if self.photons > self.interferometer.modes:
            raise InvalidConfigError(
                f"need n <= m for collision-free input, got n={self.photons}, "
                f"m={self.interferometer.modes}"
            )
        if self.truncation.k > self.photons:
            raise InvalidConfigError(
                f"truncation level {self.truncation.k} exceeds photon count {self.photons}"
            )

    @property
    def input_modes(self) -> tuple[int, ...]:
        return tuple(range(self.photons))


def _stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based RNG stream for sample ``index`` of run ``seed``."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_categorical(weights: np.ndarray, rng: np.random.Generator) -> int:
    cum = np.cumsum(weights)
    u = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, len(weights) - 1)


def sample_distinguishable(u: Interferometer, input_mode: int, rng) -> int:
    """Output mode of a single classical photon entering ``input_mode``."""
    if not 0 <= input_mode < u.modes:
        raise InvalidConfigError(f"input mode {input_mode} out of range for m={u.modes}")
    weights = abs_squared(u.entries[:, input_mode])
    return _draw_categorical(weights, rng)


def sample_indistinguishable(u: Interferometer, input_modes, rng) -> OutputSample:
    """Exact sample of fully indistinguishable photons via the chain rule.

    The input columns are taken in a uniformly random order; at step t the
    next output mode is drawn with weight |Per(A_t(r))|², where A_t(r) stacks
    the rows chosen so far plus candidate row r against the first t permuted
    columns. All m candidate permanents of a step come from one Laplace
    expansion over the new row, so a full sample costs O(n·2^n + m·n²).
    """
    modes = [int(a) for a in input_modes]
    if len(set(modes)) != len(modes):
        raise InvalidConfigError(f"input modes must be distinct, got {tuple(modes)}")
    n = len(modes)
    m = u.modes
    if n > INDISTINGUISHABLE_LIMIT:
        raise SizeLimitError(f"chain-rule sampler limited to n <= {INDISTINGUISHABLE_LIMIT}")
    if any(not 0 <= a < m for a in modes):
        raise InvalidConfigError(f"input modes out of range for m={m}: {tuple(modes)}")
    occupations = [0] * m
    if n == 0:
        return OutputSample(tuple(occupations))
    order = rng.permutation(n)
    work = np.ascontiguousarray(u.entries[:, [modes[j] for j in order]])
    chosen: list[int] = []
    for t in range(1, n + 1):
        partial = work[chosen, :t]
        subs = row_removed_permanents(partial.T)
        amps = work[:, :t] @ subs
        weights = amps.real**2 + amps.imag**2
        r = _draw_categorical(weights, rng)
        chosen.append(r)
        occupations[r] += 1
    return OutputSample(tuple(occupations))


def _sample_with_survivors(cfg: SamplerConfig, survivors: tuple[int, ...], rng) -> OutputSample:
    """Inner mixture step shared by the lossless and lossy samplers.

    Draw order is fixed: subset-size level, survivor permutation for the
    uniform subset, the chain-rule sub-sampler, then the distinguishable
    photons in ascending input-mode order.
    """
    u = cfg.interferometer
    ell = len(survivors)
    k = cfg.truncation.k
    per_subset = truncated_level_weights(ell, cfg.noise.x, k)
    levels = np.array([math.comb(ell, i) * w for i, w in enumerate(per_subset)])
    size = _draw_categorical(levels, rng)
    if size > 0:
        picked = rng.permutation(np.array(survivors, dtype=int))[:size]
        indist = tuple(sorted(int(a) for a in picked))
    else:
        indist = ()
    sample = sample_indistinguishable(u, indist, rng)
    occupations = list(sample.occupations)
    for photon in survivors:
        if photon not in indist:
            occupations[sample_distinguishable(u, photon, rng)] += 1
    return OutputSample(tuple(occupations))


def sample_truncated(cfg: SamplerConfig, rng) -> OutputSample:
    """One lossless sample from the k-truncated mixture (requires eta = 1)."""
    if cfg.noise.eta != 1.0:
        raise InvalidConfigError("sample_truncated requires eta = 1; use sample_lossy_truncated")
    return _sample_with_survivors(cfg, cfg.input_modes, rng)


def sample_lossy_truncated(cfg: SamplerConfig, rng) -> OutputSample:
    """One sample with per-photon loss followed by the truncated mixture.

    The detected photon count equals the number of survivors, so the count
    marginal is exactly Binomial(n, eta).
    """
    eta = cfg.noise.eta
    n = cfg.photons
    if eta == 1.0:
        survivors = cfg.input_modes
    elif eta == 0.0:
        survivors = ()
    else:
        draws = rng.random(n)
        survivors = tuple(j for j in range(n) if draws[j] < eta)
    return _sample_with_survivors(cfg, survivors, rng)


def _sample_at_index(cfg: SamplerConfig, index: int) -> OutputSample:
    return sample_lossy_truncated(cfg, _stream(cfg.seed, index))


def _batch_chunk(cfg: SamplerConfig, start: int, stop: int) -> list[tuple[int, ...]]:
    return [_sample_at_index(cfg, j).occupations for j in range(start, stop)]


def sample_batch(cfg: SamplerConfig, count: int, threads: int = 1) -> list[OutputSample]:
    """Draw ``count`` samples; sample j uses the RNG stream keyed by (seed, j).

    The output is deterministic given (seed, count) and identical for any
    worker count: parallelism only changes which process evaluates which
    index range.
    """
    if count < 0:
        raise InvalidConfigError(f"sample count must be non-negative, got {count}")
    if count == 0:
        return []
    if threads <= 1 or count == 1:
        return [_sample_at_index(cfg, j) for j in range(count)]
    workers = min(threads, count)
    edges = [count * w // workers for w in range(workers + 1)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = pool.map(_batch_chunk, [cfg] * workers, edges[:-1], edges[1:])
        return [OutputSample(occ) for chunk in chunks for occ in chunk]
