import math

import numpy as np
import pytest

from bosim.core import (
    Interferometer,
    InvalidConfigError,
    NoiseModel,
    SizeLimitError,
    TruncationLevel,
    standard_input,
)
from bosim.interferometer import fourier, haar_random
from bosim.oracle import (
    distinguishable_distribution,
    ideal_distribution,
    lossy_mixture_distribution,
    mixture_distribution,
)
from bosim.permanent import eval_counter, reset_eval_counter
from bosim.sampler import (
    SamplerConfig,
    _stream,
    sample_batch,
    sample_distinguishable,
    sample_indistinguishable,
    sample_lossy_truncated,
    sample_truncated,
)
from bosim.stats import chi_square_gof, empirical_distribution, total_variation


def tvd_threshold(oracle, n_samples, rng, replicates=5, sigmas=3.0):
    """Acceptance band for the empirical TVD of an exact sampler.

    Simulates the multinomial sampling floor from the oracle table and adds
    a 3-sigma allowance (the analytic normal-limit sigma serves as a lower
    bound on the spread).
    """
    probs = np.array(list(oracle.entries.values()))
    probs = probs / probs.sum()
    draws = [
        0.5 * np.abs(rng.multinomial(n_samples, probs) / n_samples - probs).sum()
        for _ in range(replicates)
    ]
    analytic_sigma = 0.5 * math.sqrt((1 - 2 / math.pi) / n_samples * float((probs * (1 - probs)).sum()))
    return float(np.mean(draws)) + sigmas * max(float(np.std(draws)), analytic_sigma)


def test_distinguishable_identity_is_deterministic():
    u = Interferometer(np.eye(4))
    rng = _stream(0, 0)
    assert all(sample_distinguishable(u, 1, rng) == 1 for _ in range(20))


def test_distinguishable_beamsplitter_frequencies():
    u = fourier(2)
    rng = _stream(1, 0)
    draws = 10_000
    ones = sum(sample_distinguishable(u, 0, rng) for _ in range(draws))
    assert abs(ones / draws - 0.5) <= 0.02


def test_distinguishable_fourier_uniform():
    u = fourier(4)
    rng = _stream(2, 0)
    draws = 20_000
    counts = np.zeros(4)
    for _ in range(draws):
        counts[sample_distinguishable(u, 0, rng)] += 1
    assert np.all(np.abs(counts / draws - 0.25) <= 0.02)


def test_indistinguishable_identity():
    u = Interferometer(np.eye(5))
    rng = _stream(3, 0)
    for _ in range(10):
        assert sample_indistinguishable(u, (0, 1, 2), rng).occupations == (1, 1, 1, 0, 0)


def test_indistinguishable_rejects_duplicates():
    with pytest.raises(InvalidConfigError):
        sample_indistinguishable(fourier(4), (0, 0), _stream(0, 0))


def test_indistinguishable_size_guard():
    with pytest.raises(SizeLimitError):
        sample_indistinguishable(Interferometer(np.eye(40)), range(31), _stream(0, 0))


def test_indistinguishable_hom():
    u = fourier(2)
    rng = _stream(4, 0)
    draws = 20_000
    bunched_high = 0
    for _ in range(draws):
        occ = sample_indistinguishable(u, (0, 1), rng).occupations
        assert occ != (1, 1)  # exact HOM suppression
        bunched_high += occ == (2, 0)
    assert abs(bunched_high / draws - 0.5) <= 0.015


def test_indistinguishable_matches_ideal_oracle():
    u = haar_random(9, 42)
    oracle = ideal_distribution(u, standard_input(3, 9))
    cfg = SamplerConfig(u, 3, NoiseModel(1.0, 1.0), TruncationLevel(3), seed=5)
    n_samples = 50_000
    samples = sample_batch(cfg, n_samples, threads=2)
    tvd = total_variation(empirical_distribution(samples), oracle)
    assert tvd <= tvd_threshold(oracle, n_samples, np.random.default_rng(0))


def test_permanent_evaluations_within_budget():
    u = haar_random(10, 7)
    n = 5
    reset_eval_counter()
    sample_indistinguishable(u, range(n), _stream(6, 0))
    assert eval_counter() <= n * u.modes  # n(n+1)/2 sub-permanents in practice


def test_truncated_x_zero_identity_matrix():
    u = Interferometer(np.eye(6))
    cfg = SamplerConfig(u, 4, NoiseModel(x=0.0, eta=1.0), TruncationLevel(0), seed=8)
    for j in range(5):
        occ = sample_lossy_truncated(cfg, _stream(8, j)).occupations
        assert occ == (1, 1, 1, 1, 0, 0)


def test_truncated_x_zero_matches_distinguishable():
    u = haar_random(6, 43)
    oracle = distinguishable_distribution(u, standard_input(3, 6))
    cfg = SamplerConfig(u, 3, NoiseModel(x=0.0, eta=1.0), TruncationLevel(2), seed=9)
    n_samples = 30_000
    tvd = total_variation(
        empirical_distribution(sample_batch(cfg, n_samples, threads=2)), oracle
    )
    assert tvd <= tvd_threshold(oracle, n_samples, np.random.default_rng(1))


def test_truncated_matches_mixture_oracle():
    u = haar_random(16, 44)
    oracle = mixture_distribution(u, 4, 0.5, 2)
    cfg = SamplerConfig(u, 4, NoiseModel(x=0.5, eta=1.0), TruncationLevel(2), seed=10)
    n_samples = 50_000
    tvd = total_variation(
        empirical_distribution(sample_batch(cfg, n_samples, threads=2)), oracle
    )
    assert tvd <= tvd_threshold(oracle, n_samples, np.random.default_rng(2))


def test_truncated_requires_lossless_noise():
    cfg = SamplerConfig(fourier(4), 2, NoiseModel(x=1.0, eta=0.5), TruncationLevel(2), seed=0)
    with pytest.raises(InvalidConfigError):
        sample_truncated(cfg, _stream(0, 0))


def test_lossy_reduces_to_truncated_at_eta_one():
    u = haar_random(8, 45)
    cfg = SamplerConfig(u, 4, NoiseModel(x=0.6, eta=1.0), TruncationLevel(3), seed=11)
    for j in range(10):
        a = sample_truncated(cfg, _stream(cfg.seed, j))
        b = sample_lossy_truncated(cfg, _stream(cfg.seed, j))
        assert a == b


def test_lossy_eta_zero_detects_nothing():
    cfg = SamplerConfig(fourier(5), 3, NoiseModel(x=1.0, eta=0.0), TruncationLevel(3), seed=12)
    sample = sample_lossy_truncated(cfg, _stream(12, 0))
    assert sample.occupations == (0,) * 5
    assert sample.detected == 0


def test_lossy_photon_count_marginal():
    n, eta = 10, 0.7
    u = haar_random(12, 46)
    cfg = SamplerConfig(u, n, NoiseModel(x=0.5, eta=eta), TruncationLevel(3), seed=13)
    n_samples = 20_000
    observed: dict[int, int] = {}
    for s in sample_batch(cfg, n_samples, threads=2):
        observed[s.detected] = observed.get(s.detected, 0) + 1
    expected = {i: math.comb(n, i) * eta**i * (1 - eta) ** (n - i) for i in range(n + 1)}
    assert chi_square_gof(observed, expected, n_samples) > 0.01


def test_lossy_matches_oracle():
    u = haar_random(16, 47)
    noise = NoiseModel(x=0.8, eta=0.6)
    oracle = lossy_mixture_distribution(u, 4, noise, 2)
    cfg = SamplerConfig(u, 4, noise, TruncationLevel(2), seed=14)
    n_samples = 50_000
    tvd = total_variation(
        empirical_distribution(sample_batch(cfg, n_samples, threads=2)), oracle
    )
    assert tvd <= tvd_threshold(oracle, n_samples, np.random.default_rng(3))


def test_batch_empty():
    cfg = SamplerConfig(fourier(4), 2, NoiseModel(), TruncationLevel(2), seed=0)
    assert sample_batch(cfg, 0) == []


def test_batch_deterministic_across_worker_counts():
    u = haar_random(9, 48)
    cfg = SamplerConfig(u, 3, NoiseModel(x=0.7, eta=0.8), TruncationLevel(2), seed=15)
    serial = sample_batch(cfg, 40, threads=1)
    assert sample_batch(cfg, 40, threads=3) == serial
    assert sample_batch(cfg, 40, threads=8) == serial


def test_batch_same_seed_reproducible():
    u = haar_random(9, 49)
    cfg = SamplerConfig(u, 3, NoiseModel(x=0.9, eta=0.9), TruncationLevel(3), seed=16)
    assert sample_batch(cfg, 25) == sample_batch(cfg, 25)
    other = SamplerConfig(u, 3, NoiseModel(x=0.9, eta=0.9), TruncationLevel(3), seed=17)
    assert sample_batch(other, 25) != sample_batch(cfg, 25)


def test_batch_samples_vary_between_indices():
    u = haar_random(12, 50)
    cfg = SamplerConfig(u, 3, NoiseModel(), TruncationLevel(3), seed=18)
    occupations = {s.occupations for s in sample_batch(cfg, 30)}
    assert len(occupations) > 1


def test_config_validation():
    with pytest.raises(InvalidConfigError):
        SamplerConfig(fourier(3), 4, NoiseModel(), TruncationLevel(2), seed=0)
    with pytest.raises(InvalidConfigError):
        SamplerConfig(fourier(5), 3, NoiseModel(), TruncationLevel(4), seed=0)
