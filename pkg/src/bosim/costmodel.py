"""Abstract runtime models for the two truncation algorithms.

State truncation costs 2k·2^k + m·k(k−1)/2 + m(n−k) operations per sample.
Point truncation costs MIS · Σ_{i=0}^k C(n,i)·R(n,n−i)·i·2^i·(n−i)⁴·ln(n−i),
with R(n, n−i) = C(n,i)·D_i the rencontres count and MIS the number of
probabilities the Metropolised Independence Sampler evaluates per sample
(default 100). Everything is accumulated in log space so comparisons stay
meaningful far beyond float range; m = n² throughout the comparisons.

Degenerate point-cost terms (i ∈ {0, 1}, or an (n−i) factor of 0 or 1) are
clamped to 1 by default via max(1, ·) guards. The matched-runtime search of
the level-by-level comparison uses the unguarded literal formula instead:
there the guards are not negligible (they would swamp the small-k state
budgets and erase the crossover structure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .bounds import max_noise_point, max_noise_state, min_k_for_error, point_truncation_error
from .core import DomainError, InvalidConfigError

DEFAULT_MIS_FACTOR = 100
_LOG2 = math.log(2.0)
_NEG_INF = float("-inf")


@dataclass(frozen=True)
class CostEstimate:
    """An abstract operation count for one method at one parameter point."""

    operations: float
    method: str  # state | point
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.operations >= 0.0:
            raise InvalidConfigError(f"operation count must be non-negative, got {self.operations}")


@lru_cache(maxsize=None)
def derangement_count(n: int) -> int:
    """Number of permutations of n elements with no fixed point (D_0 = 1, D_1 = 0)."""
    if n < 0:
        raise DomainError(f"derangement count needs n >= 0, got {n}")
    if n == 0:
        return 1
    if n == 1:
        return 0
    return n * derangement_count(n - 1) + (-1) ** n


def rencontres_number(n: int, fixed_points: int) -> int:
    """Number of permutations of n elements with exactly the given fixed points."""
    if not 0 <= fixed_points <= n:
        raise DomainError(f"need 0 <= fixed points <= n, got {fixed_points}, n={n}")
    return math.comb(n, fixed_points) * derangement_count(n - fixed_points)


def _logsumexp(terms) -> float:
    finite = [t for t in terms if t > _NEG_INF]
    if not finite:
        return _NEG_INF
    top = max(finite)
    return top + math.log(math.fsum(math.exp(t - top) for t in finite))


def _from_log(value: float) -> float:
    if value == _NEG_INF:
        return 0.0
    if value > 709.0:  # exp overflow
        return math.inf
    return math.exp(value)


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_derangement(i: int) -> float:
    if i == 1:
        return _NEG_INF
    return math.log(derangement_count(i))


def log_state_truncation_cost(n: int, m: int, k: int) -> float:
    if k > n:
        raise InvalidConfigError(f"truncation level cannot exceed n, got k={k}, n={n}")
    terms = []
    if k >= 1:
        terms.append(math.log(2.0 * k) + k * _LOG2)
    if k >= 2:
        terms.append(math.log(m * k * (k - 1) / 2.0))
    if n > k:
        terms.append(math.log(float(m) * (n - k)))
    return _logsumexp(terms)


def state_truncation_cost(n: int, m: int, k: int) -> float:
    """Per-sample operation count of state truncation at level k."""
    return _from_log(log_state_truncation_cost(n, m, k))


def _log_sampling_factor(i: int, guard_degenerate: bool) -> float:
    # i·2^i complex-permanent evaluations of size i.
    if i >= 1:
        return math.log(float(i)) + i * _LOG2
    return 0.0 if guard_degenerate else _NEG_INF


def _log_positive_permanent_factor(z: int, guard_degenerate: bool) -> float:
    # z⁴·ln z approximation cost of one z×z non-negative permanent.
    if z >= 2:
        return 4.0 * math.log(z) + math.log(math.log(z))
    return 0.0 if guard_degenerate else _NEG_INF


def log_point_truncation_cost(
    n: int, k: int, mis_factor: float = DEFAULT_MIS_FACTOR, guard_degenerate: bool = True
) -> float:
    if k > n:
        raise InvalidConfigError(f"truncation level cannot exceed n, got k={k}, n={n}")
    terms = []
    for i in range(k + 1):
        log_d = _log_derangement(i)
        if log_d == _NEG_INF:
            continue
        sampling = _log_sampling_factor(i, guard_degenerate)
        positive = _log_positive_permanent_factor(n - i, guard_degenerate)
        if sampling == _NEG_INF or positive == _NEG_INF:
            continue
        terms.append(2.0 * _log_comb(n, i) + log_d + sampling + positive)
    total = _logsumexp(terms)
    if total == _NEG_INF:
        return _NEG_INF
    return total + math.log(mis_factor)


def point_truncation_cost(
    n: int, k: int, mis_factor: float = DEFAULT_MIS_FACTOR, guard_degenerate: bool = True
) -> float:
    """Per-sample operation count of point truncation at level k."""
    return _from_log(log_point_truncation_cost(n, k, mis_factor, guard_degenerate))


def min_point_k(n: int, x: float, eta: float, epsilon: float) -> int:
    """Smallest level with finite-n point-truncation error at most epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    if point_truncation_error(n, 0, x, eta, finite_n=True) <= epsilon:
        return 0
    lo, hi = 0, n  # the error at k = n is zero
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if point_truncation_error(n, mid, x, eta, finite_n=True) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def crossover_n(
    x: float,
    eta: float,
    epsilon: float,
    n_range=range(2, 501),
    mis_factor: float = DEFAULT_MIS_FACTOR,
):
    """Smallest photon number at which point truncation undercuts state truncation.

    Each method runs at its own minimal level for the target error; the mode
    count is m = n². Returns None when no crossover occurs in the range.
    """
    for n in n_range:
        k_state = min_k_for_error(n, eta * x, epsilon)
        k_point = min_point_k(n, x, eta, epsilon)
        log_state = log_state_truncation_cost(n, n * n, k_state)
        log_point = log_point_truncation_cost(n, k_point, mis_factor)
        if log_point < log_state:
            return n
    return None


# --- figure data -----------------------------------------------------------

FIG1_COLUMNS = ("n", "k_rule", "k", "state_max_x", "state_max_eta", "point_max_x", "point_max_eta")
FIG2_COLUMNS = (
    "n",
    "x",
    "eta",
    "k_state",
    "state_ops",
    "log10_state_ops",
    "k_point",
    "point_ops",
    "log10_point_ops",
)
FIG3_COLUMNS = (
    "k",
    "state_ops",
    "state_max_x",
    "state_max_eta",
    "point_max_x",
    "point_max_eta",
    "k_matched",
    "point_matched_max_x",
    "point_matched_max_eta",
)

FIG2_NOISE_SETTINGS = ((0.5, 0.5), (0.976, 0.755))


def fig1_data(n_range=range(2, 101), epsilon: float = 0.1) -> list[dict]:
    """Highest simulable noise per method at matched truncation levels.

    For each n the truncation level is either n−1 or ⌈n/2⌉. The state-method
    bound depends on eta·x only, so its max-x (eta = 1) and max-eta (x = 1)
    columns coincide.
    """
    rows = []
    for n in n_range:
        for rule, k in (("n-1", n - 1), ("n/2", math.ceil(n / 2))):
            state = max_noise_state(n, k, epsilon)
            rows.append(
                {
                    "n": n,
                    "k_rule": rule,
                    "k": k,
                    "state_max_x": state,
                    "state_max_eta": state,
                    "point_max_x": max_noise_point(n, k, epsilon, "distinguishability"),
                    "point_max_eta": max_noise_point(n, k, epsilon, "loss"),
                }
            )
    return rows


def fig2_data(
    n_range=range(2, 501), epsilon: float = 0.1, mis_factor: float = DEFAULT_MIS_FACTOR
) -> list[dict]:
    """Operation counts of both methods versus n for the two noise settings."""
    rows = []
    for x, eta in FIG2_NOISE_SETTINGS:
        for n in n_range:
            k_state = min_k_for_error(n, eta * x, epsilon)
            k_point = min_point_k(n, x, eta, epsilon)
            log_state = log_state_truncation_cost(n, n * n, k_state)
            log_point = log_point_truncation_cost(n, k_point, mis_factor)
            rows.append(
                {
                    "n": n,
                    "x": x,
                    "eta": eta,
                    "k_state": k_state,
                    "state_ops": _from_log(log_state),
                    "log10_state_ops": log_state / math.log(10.0),
                    "k_point": k_point,
                    "point_ops": _from_log(log_point),
                    "log10_point_ops": log_point / math.log(10.0) if log_point > _NEG_INF else _NEG_INF,
                }
            )
    return rows


def matched_point_level(
    n: int, log_state_ops: float, mis_factor: float = DEFAULT_MIS_FACTOR
) -> int:
    """Smallest point-truncation level whose runtime exceeds the given budget.

    Uses the unguarded literal cost so that the degenerate i ∈ {0, 1} terms
    contribute nothing; see the module docstring.
    """
    for k in range(n + 1):
        if log_point_truncation_cost(n, k, mis_factor, guard_degenerate=False) > log_state_ops:
            return k
    return n


def fig3_data(
    n: int = 90,
    k_range=range(1, 90),
    epsilon: float = 0.1,
    mis_factor: float = DEFAULT_MIS_FACTOR,
) -> list[dict]:
    """Level-by-level noise comparison at matched runtimes for an n-photon run.

    Per level k: the state-method max noise, the point-method max noise at the
    same k, and the point-method max noise at level k' — the smallest level
    whose point runtime exceeds the state runtime at k (mode count m = n²).
    """
    rows = []
    m = n * n
    for k in k_range:
        if k > n:
            break
        log_state = log_state_truncation_cost(n, m, k)
        k_matched = matched_point_level(n, log_state, mis_factor)
        state = max_noise_state(n, k, epsilon)
        rows.append(
            {
                "k": k,
                "state_ops": _from_log(log_state),
                "state_max_x": state,
                "state_max_eta": state,
                "point_max_x": max_noise_point(n, k, epsilon, "distinguishability"),
                "point_max_eta": max_noise_point(n, k, epsilon, "loss"),
                "k_matched": k_matched,
                "point_matched_max_x": max_noise_point(n, k_matched, epsilon, "distinguishability"),
                "point_matched_max_eta": max_noise_point(n, k_matched, epsilon, "loss"),
            }
        )
    return rows
