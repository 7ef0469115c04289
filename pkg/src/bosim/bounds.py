"""Closed-form truncation-error bounds and their inversions.

Covers the worst-case binomial-tail bound and its Chernoff relaxation, the
average-case (Haar) bound, the rival point-truncation error model, and the
non-uniform-loss depth threshold. All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import DomainError, InvalidConfigError

_BISECTION_TOL = 1e-9


@dataclass(frozen=True)
class NonUniformLossModel:
    """Loss that accrues per optical component rather than uniformly."""

    tau: float
    depth_s: int
    total_components: int

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise InvalidConfigError(f"component transmission must be in (0, 1), got {self.tau}")
        if self.depth_s < 0:
            raise InvalidConfigError(f"lossy depth must be non-negative, got {self.depth_s}")
        if self.total_components < self.depth_s:
            raise InvalidConfigError("total component count cannot be below the minimal depth")


@dataclass(frozen=True)
class ErrorReport:
    """A scalar error bound together with which model produced it."""

    epsilon: float
    kind: str  # worst_state | average_state | chernoff | point

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise InvalidConfigError(f"error bound must be non-negative, got {self.epsilon}")


def _check_probability(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} must be in [0, 1], got {p}")


def binomial_tail(n: int, k: int, p: float) -> float:
    """P[Binomial(n, p) > k], computed with running log-binomials.

    Stable for n up to ~10^4; compensated summation keeps it within 1e-12 of
    direct summation at small n.
    """
    _check_probability(p, "p")
    if k < 0 or k > n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == n:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    log_p = math.log(p)
    log_q = math.log1p(-p)
    log_c = math.lgamma(n + 1) - math.lgamma(k + 2) - math.lgamma(n - k)
    terms = []
    for i in range(k + 1, n + 1):
        terms.append(math.exp(log_c + i * log_p + (n - i) * log_q))
        if i < n:
            log_c += math.log(n - i) - math.log(i + 1)
    return min(1.0, math.fsum(terms))


def chernoff_bound(n: int, k: int, x: float) -> float:
    """exp(−n·D(k/n ‖ x)): relative-entropy upper bound on the binomial tail."""
    _check_probability(x, "x")
    if not n * x < k <= n:
        raise DomainError(f"Chernoff form needs n·x < k <= n, got n={n}, k={k}, x={x}")
    a = k / n
    d = a * math.log(a / x)
    if a < 1.0:
        d += (1.0 - a) * math.log((1.0 - a) / (1.0 - x))
    return math.exp(-n * d)


def average_case_bound(n: int, k: int, x: float, eta: float) -> float:
    """Average-case total-variation bound for a Haar-random interferometer."""
    _check_probability(x, "x")
    _check_probability(eta, "eta")
    return 2.0 * binomial_tail(n, k, eta * x)


def min_k_for_error(n: int, p: float, epsilon: float) -> int:
    """Smallest truncation level k with binomial_tail(n, k, p) <= epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    _check_probability(p, "p")
    lo, hi = 0, n  # tail(n, n, p) = 0, so hi always qualifies
    if binomial_tail(n, 0, p) <= epsilon:
        return 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if binomial_tail(n, mid, p) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def max_noise_state(n: int, k: int, epsilon: float) -> float:
    """Largest p in [0, 1] with binomial_tail(n, k, p) <= epsilon (bisection)."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    if k < 0 or k > n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == n:
        return 1.0
    lo, hi = 0.0, 1.0  # tail is 0 at p=0 and 1 at p=1
    while hi - lo > _BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if binomial_tail(n, k, mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return lo


def point_truncation_error(n: int, k: int, x: float, eta: float, finite_n: bool = True) -> float:
    """Error model of the fixed-point (point-truncation) expansion at level k.

    Loss and distinguishability enter through alpha = sqrt(eta)·x. The
    asymptotic form is alpha^(k+1)/sqrt(1 − alpha²); the finite-n form is
    the square root of the truncated variance series
    sum_{j=k+1}^n alpha^(2j) · e^{-1} · sum_{l=0}^{n-j} 1/l!,
    which never exceeds the asymptotic form.
    """
    _check_probability(x, "x")
    _check_probability(eta, "eta")
    if k < 0 or k > n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    alpha = math.sqrt(eta) * x
    if not finite_n:
        if alpha >= 1.0:
            raise DomainError("asymptotic form needs alpha = sqrt(eta)·x < 1")
        return alpha ** (k + 1) / math.sqrt(1.0 - alpha * alpha)
    if alpha == 0.0:
        return 0.0
    partial = [1.0]  # running sum of 1/l! up to l = n - j
    inv_factorial = 1.0
    for l in range(1, n + 1):
        inv_factorial /= l
        partial.append(partial[-1] + inv_factorial)
    total = 0.0
    for j in range(k + 1, n + 1):
        total += alpha ** (2 * j) * math.exp(-1.0) * partial[n - j]
    return math.sqrt(total)


def max_noise_point(n: int, k: int, epsilon: float, mode: str) -> float:
    """Largest x (mode 'distinguishability', eta=1) or eta (mode 'loss', x=1)
    with the finite-n point-truncation error <= epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    if mode not in ("distinguishability", "loss"):
        raise InvalidConfigError(f"mode must be 'distinguishability' or 'loss', got {mode!r}")

    def error_at(value: float) -> float:
        if mode == "distinguishability":
            return point_truncation_error(n, k, value, 1.0, finite_n=True)
        return point_truncation_error(n, k, 1.0, value, finite_n=True)

    if error_at(1.0) <= epsilon:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > _BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if error_at(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return lo


def nonuniform_depth_threshold(n: int, x: float, k: int, model: NonUniformLossModel) -> float:
    """Depth threshold (ln n − ln 1/x − ln k)/ln(1/τ) for component-wise loss.

    A photon depth s above the threshold puts the experiment in the
    classically simulable regime. x = 0 returns −inf: any depth simulable.
    """
    _check_probability(x, "x")
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if x == 0.0:
        return float("-inf")
    return (math.log(n) - math.log(1.0 / x) - math.log(k)) / math.log(1.0 / model.tau)
