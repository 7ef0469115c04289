"""Exact (brute-force) output distributions at small photon number.

These tables are the ground truth that the samplers and the closed-form
bounds are validated against. Everything here is exponential-cost by
design and guarded accordingly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DimensionError,
    FockVector,
    Interferometer,
    InvalidConfigError,
    NoiseModel,
    OutcomeDistribution,
    SizeLimitError,
    TruncationLevel,
)
from .permanent import SubmatrixSelector, abs_squared, permanent_ryser, submatrix

IDEAL_LIMIT = 7
GRAM_LIMIT = 5
MIXTURE_LIMIT = 7
LOSSY_LIMIT = 6
ENUMERATION_LIMIT = 10**7

_NORMALIZATION_TOL = 1e-9
_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise photon-overlap matrix: Hermitian, unit diagonal, PSD."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"Gram matrix must be square, got shape {a.shape}")
        if np.max(np.abs(a - a.conj().T)) > 1e-10:
            raise InvalidConfigError("Gram matrix must be Hermitian")
        if np.max(np.abs(np.diagonal(a) - 1.0)) > 1e-10:
            raise InvalidConfigError("Gram matrix must have unit diagonal")
        if a.shape[0] > 0 and float(np.min(np.linalg.eigvalsh(a))) < -1e-9:
            raise InvalidConfigError("Gram matrix must be positive semidefinite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def uniform_gram(n: int, x: float) -> GramMatrix:
    """The one-parameter overlap model: x off-diagonal, 1 on the diagonal."""
    if not 0.0 <= x <= 1.0:
        raise InvalidConfigError(f"overlap x must be in [0, 1], got {x}")
    entries = np.full((n, n), complex(x))
    np.fill_diagonal(entries, 1.0)
    return GramMatrix(entries)


def enumerate_outputs(n: int, m: int) -> list[FockVector]:
    """All occupations of n photons in m modes, first coordinate descending."""
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    if math.comb(n + m - 1, n) > ENUMERATION_LIMIT:
        raise SizeLimitError(f"outcome space for n={n}, m={m} exceeds {ENUMERATION_LIMIT}")
    return [FockVector(occ) for occ in _compositions(n, m)]


def _compositions(n: int, m: int):
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, m - 1):
            yield (first,) + rest


def _factorial_product(occ) -> float:
    out = 1.0
    for c in occ:
        out *= math.factorial(c)
    return out


def _check_input(u: Interferometer, s: FockVector, limit: int) -> None:
    if s.modes != u.modes:
        raise DimensionError(f"input has {s.modes} modes but interferometer has {u.modes}")
    if not s.is_collision_free():
        raise InvalidConfigError("inputs must be collision-free (at most one photon per mode)")
    if s.total > limit:
        raise SizeLimitError(f"exact oracle limited to n <= {limit}, got n = {s.total}")


def ideal_distribution(u: Interferometer, s: FockVector) -> OutcomeDistribution:
    """Exact distribution for fully indistinguishable photons: |Per(U_{S,S'})|²."""
    _check_input(u, s, IDEAL_LIMIT)
    table = _ideal_table(u, s.mode_list())
    dist = OutcomeDistribution.from_entries(table)
    assert abs(dist.mass() - 1.0) <= _NORMALIZATION_TOL
    return dist


def distinguishable_distribution(u: Interferometer, s: FockVector) -> OutcomeDistribution:
    """Exact distribution for fully distinguishable photons: Per(|U_{S,S'}|²)."""
    _check_input(u, s, IDEAL_LIMIT)
    cols = s.mode_list()
    n = s.total
    entries: dict[tuple[int, ...], float] = {}
    for s_out in enumerate_outputs(n, u.modes):
        sub = submatrix(u, SubmatrixSelector(s_out.mode_list(), cols))
        p = permanent_ryser(abs_squared(sub)).real
        entries[s_out.occupations] = p / _factorial_product(s_out.occupations)
    dist = OutcomeDistribution.from_entries(entries)
    assert abs(dist.mass() - 1.0) <= _NORMALIZATION_TOL
    return dist


def gram_distribution(u: Interferometer, s: FockVector, gram) -> OutcomeDistribution:
    """Exact distribution for an arbitrary photon-overlap Gram matrix.

    Evaluates the double permutation sum over (τ, τ′) pairs directly, so it
    is limited to very small n; it exists to anchor every other oracle.
    """
    gm = gram if isinstance(gram, GramMatrix) else GramMatrix(np.asarray(gram, dtype=complex))
    _check_input(u, s, GRAM_LIMIT)
    n = s.total
    if gm.size != n:
        raise DimensionError(f"Gram matrix is {gm.size}×{gm.size} but there are {n} photons")
    cols = np.array(s.mode_list(), dtype=int)
    perms = np.array(list(itertools.permutations(range(n))), dtype=int)
    if n == 0:
        perms = perms.reshape(1, 0)
    # gp[a, b] = prod_k Gram[perm_a(k), perm_b(k)]; shared by every outcome.
    gp = gm.entries[perms[:, None, :], perms[None, :, :]].prod(axis=2)
    rows_idx = np.arange(n)
    entries: dict[tuple[int, ...], float] = {}
    for s_out in enumerate_outputs(n, u.modes):
        rows = np.array(s_out.mode_list(), dtype=int)
        mat = u.entries[rows[:, None], cols[None, :]] if n else np.zeros((0, 0), complex)
        prod_u = mat[rows_idx, perms].prod(axis=1)
        val = complex(np.conj(prod_u) @ gp @ prod_u)
        assert abs(val.imag) <= _IMAG_TOL * max(1.0, abs(val.real))
        entries[s_out.occupations] = val.real / _factorial_product(s_out.occupations)
    dist = OutcomeDistribution.from_entries(entries)
    assert abs(dist.mass() - 1.0) <= _NORMALIZATION_TOL
    return dist


# --- binomial mixtures over indistinguishable subsets ---------------------

# Component tables P_{L,I} depend only on the interferometer and the mode
# subsets, not on (x, eta, k), so they are cached and reused across mixture
# evaluations, truncation levels, and noise grids.
_COMPONENT_CACHE: dict[tuple, dict] = {}
_COMPONENT_CACHE_MAX = 8


def clear_oracle_cache() -> None:
    _COMPONENT_CACHE.clear()


def _cache_for(u: Interferometer) -> dict:
    key = (u.modes, u.entries.tobytes())
    cache = _COMPONENT_CACHE.get(key)
    if cache is None:
        if len(_COMPONENT_CACHE) >= _COMPONENT_CACHE_MAX:
            _COMPONENT_CACHE.clear()
        cache = {"single": {}, "ideal": {}, "component": {}}
        _COMPONENT_CACHE[key] = cache
    return cache


def _single_photon_table(u: Interferometer, cache: dict, mode: int) -> dict:
    table = cache["single"].get(mode)
    if table is None:
        weights = abs_squared(u.entries[:, mode])
        m = u.modes
        table = {}
        for b in range(m):
            occ = tuple(1 if j == b else 0 for j in range(m))
            table[occ] = float(weights[b])
        cache["single"][mode] = table
    return table


def _ideal_table(u: Interferometer, modes: tuple[int, ...]) -> dict:
    n = len(modes)
    entries: dict[tuple[int, ...], float] = {}
    for s_out in enumerate_outputs(n, u.modes):
        sub = submatrix(u, SubmatrixSelector(s_out.mode_list(), modes))
        perm = permanent_ryser(sub)
        entries[s_out.occupations] = (perm.real**2 + perm.imag**2) / _factorial_product(
            s_out.occupations
        )
    return entries


def _convolve(a: dict, b: dict) -> dict:
    out: dict[tuple[int, ...], float] = {}
    for occ1, p1 in a.items():
        for occ2, p2 in b.items():
            key = tuple(x + y for x, y in zip(occ1, occ2))
            out[key] = out.get(key, 0.0) + p1 * p2
    return out


def _component_table(u: Interferometer, cache: dict, survivors: tuple, indist: tuple) -> dict:
    """P_{L,I}: photons in I interfere ideally, the rest of L propagate singly."""
    key = (survivors, indist)
    table = cache["component"].get(key)
    if table is not None:
        return table
    if indist:
        ideal = cache["ideal"].get(indist)
        if ideal is None:
            ideal = _ideal_table(u, indist)
            cache["ideal"][indist] = ideal
        table = ideal
    else:
        table = {(0,) * u.modes: 1.0}
    for mode in survivors:
        if mode not in indist:
            table = _convolve(table, _single_photon_table(u, cache, mode))
    cache["component"][key] = table
    return table


def truncated_level_weights(ell: int, x: float, k: int) -> list[float]:
    """Per-subset weight of each indistinguishable-set size i = 0..min(ell, k).

    Full binomial when ell <= k; renormalized over {0..k} otherwise. The
    x = 1 corner with ell > k is resolved as the x→1 limit: all weight on
    the largest level. The sampler draws subset sizes from exactly these
    weights, so the two stay in lockstep by construction.
    """
    top = min(ell, k)
    raw = [x**i * (1.0 - x) ** (ell - i) for i in range(top + 1)]
    if ell <= k:
        return raw
    z = sum(math.comb(ell, i) * w for i, w in enumerate(raw))
    if z <= 0.0:
        limit = [0.0] * (top + 1)
        limit[top] = 1.0 / math.comb(ell, top)
        return limit
    return [w / z for w in raw]


def _accumulate(total: dict, table: dict, weight: float) -> None:
    if weight == 0.0:
        return
    for occ, p in table.items():
        total[occ] = total.get(occ, 0.0) + weight * p


def _resolve_k(truncation, n: int) -> int:
    k = truncation.k if isinstance(truncation, TruncationLevel) else int(truncation)
    if k < 0 or k > n:
        raise InvalidConfigError(f"truncation level must satisfy 0 <= k <= n, got k={k}, n={n}")
    return k


def mixture_distribution(u: Interferometer, n: int, x: float, k) -> OutcomeDistribution:
    """Exact k-truncated binomial mixture over indistinguishable subsets.

    Each size-i subset I of the n photons carries weight p'_i with
    p_i = x^i (1-x)^(n-i), renormalized over the kept levels i <= k.
    At k = n this is the untruncated model and matches gram_distribution
    with the uniform Gram matrix.
    """
    if not 0.0 <= x <= 1.0:
        raise InvalidConfigError(f"overlap x must be in [0, 1], got {x}")
    if n > MIXTURE_LIMIT:
        raise SizeLimitError(f"mixture oracle limited to n <= {MIXTURE_LIMIT}, got {n}")
    if n > u.modes:
        raise InvalidConfigError(f"need n <= m for collision-free input, got n={n}, m={u.modes}")
    k = _resolve_k(k, n)
    cache = _cache_for(u)
    photons = tuple(range(n))
    weights = truncated_level_weights(n, x, k)
    total: dict[tuple[int, ...], float] = {}
    for i in range(min(n, k) + 1):
        for subset in itertools.combinations(photons, i):
            table = _component_table(u, cache, photons, subset)
            _accumulate(total, table, weights[i])
    dist = OutcomeDistribution.from_entries(total)
    assert abs(dist.mass() - 1.0) <= _NORMALIZATION_TOL
    return dist


def lossy_mixture_distribution(
    u: Interferometer, n: int, noise: NoiseModel, k
) -> OutcomeDistribution:
    """Exact lossy truncated model: binomial survival, then the k-truncated mixture.

    The outer sum runs over every survivor subset L with weight
    eta^|L| (1-eta)^(n-|L|); the inner mixture over I ⊆ L is renormalized
    only when |L| > k. Support spans detected photon counts 0..n.
    """
    if n > LOSSY_LIMIT:
        raise SizeLimitError(f"lossy oracle limited to n <= {LOSSY_LIMIT}, got {n}")
    if n > u.modes:
        raise InvalidConfigError(f"need n <= m for collision-free input, got n={n}, m={u.modes}")
    k = _resolve_k(k, n)
    eta, x = noise.eta, noise.x
    cache = _cache_for(u)
    photons = tuple(range(n))
    total: dict[tuple[int, ...], float] = {}
    for ell in range(n + 1):
        w_count = eta**ell * (1.0 - eta) ** (n - ell)
        if w_count == 0.0:
            continue
        weights = truncated_level_weights(ell, x, k)
        for survivors in itertools.combinations(photons, ell):
            for i in range(min(ell, k) + 1):
                for subset in itertools.combinations(survivors, i):
                    table = _component_table(u, cache, survivors, subset)
                    _accumulate(total, table, w_count * weights[i])
    dist = OutcomeDistribution.from_entries(total)
    assert abs(dist.mass() - 1.0) <= _NORMALIZATION_TOL
    return dist


def total_photon_marginal(dist: OutcomeDistribution) -> dict[int, float]:
    """Mass of the table grouped by detected photon number."""
    out: dict[int, float] = {}
    for occ, p in dist.entries.items():
        count = sum(occ)
        out[count] = out.get(count, 0.0) + p
    return dict(sorted(out.items()))
