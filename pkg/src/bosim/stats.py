"""Statistical validation helpers: distances, histograms, goodness of fit."""

from __future__ import annotations

import math

from .core import InvalidConfigError, OutcomeDistribution, OutputSample

#: Bins with expected count below this are pooled before the chi-square test.
POOL_THRESHOLD = 5.0


def _as_table(dist) -> dict:
    if isinstance(dist, OutcomeDistribution):
        return dist.entries
    return dict(dist)


def total_variation(p, q) -> float:
    """½·Σ|p − q| over the union of keys; missing keys count as 0."""
    pt, qt = _as_table(p), _as_table(q)
    keys = set(pt) | set(qt)
    return 0.5 * sum(abs(pt.get(key, 0.0) - qt.get(key, 0.0)) for key in keys)


def empirical_distribution(samples) -> OutcomeDistribution:
    """Normalized outcome frequencies of a sequence of samples."""
    counts: dict[tuple[int, ...], int] = {}
    total = 0
    for sample in samples:
        occ = sample.occupations if isinstance(sample, OutputSample) else tuple(sample)
        counts[occ] = counts.get(occ, 0) + 1
        total += 1
    if total == 0:
        raise InvalidConfigError("cannot build an empirical distribution from zero samples")
    entries = {occ: c / total for occ, c in counts.items()}
    return OutcomeDistribution.from_entries(entries)


def _regularized_gamma_p_series(a: float, x: float) -> float:
    # Lower regularized gamma P(a, x) by power series; converges for x < a + 1.
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(10_000):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _regularized_gamma_q_cf(a: float, x: float) -> float:
    # Upper regularized gamma Q(a, x) by Lentz continued fraction; for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = Γ(a, x)/Γ(a)."""
    if a <= 0.0:
        raise InvalidConfigError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise InvalidConfigError(f"argument must be non-negative, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _regularized_gamma_p_series(a, x)
    return _regularized_gamma_q_cf(a, x)


def chi_square_survival(chi2: float, dof: int) -> float:
    """P[X >= chi2] for a chi-square variable with dof degrees of freedom."""
    if dof < 1:
        raise InvalidConfigError(f"degrees of freedom must be >= 1, got {dof}")
    return min(1.0, max(0.0, regularized_gamma_q(dof / 2.0, chi2 / 2.0)))


def chi_square_gof(observed, expected, total: int) -> float:
    """Chi-square goodness-of-fit p-value of observed counts against a model.

    ``observed`` maps outcome -> count, ``expected`` maps outcome ->
    probability, ``total`` is the number of trials. Bins with expected count
    below POOL_THRESHOLD are pooled into one before the test; degrees of
    freedom are (#bins after pooling) − 1.
    """
    obs = dict(observed)
    exp = dict(expected)
    if total <= 0:
        raise InvalidConfigError("total number of trials must be positive")
    keys = sorted(set(obs) | set(exp))
    kept: list[tuple[float, float]] = []
    pooled_o = 0.0
    pooled_e = 0.0
    for key in keys:
        e = total * exp.get(key, 0.0)
        o = obs.get(key, 0)
        if e < POOL_THRESHOLD:
            pooled_o += o
            pooled_e += e
        else:
            kept.append((o, e))
    if pooled_e > 0.0:
        kept.append((pooled_o, pooled_e))
    elif pooled_o > 0.0:
        # Observations in a zero-probability region contradict the model outright.
        return 0.0
    if len(kept) < 2:
        raise InvalidConfigError("chi-square test needs at least two bins after pooling")
    chi2 = sum((o - e) ** 2 / e for o, e in kept)
    return chi_square_survival(chi2, len(kept) - 1)
