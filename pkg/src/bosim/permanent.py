"""Exact matrix permanents: the computational kernel behind every probability.

A brute-force permutation sum serves as the correctness oracle; production
work goes through a Gray-code Ryser kernel with running row sums (O(n·2^n)),
jitted with numba. Large matrices dispatch to a chunked kernel that splits
the subset range into a fixed number of contiguous chunks, re-seeds each
chunk by direct computation of its first Gray-code state, and sums the
partial results in chunk order, so the value is independent of thread count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import DimensionError, Interferometer, SizeLimitError

NAIVE_LIMIT = 10
RYSER_LIMIT = 40
#: Above this size permanent_ryser uses the chunked parallel kernel.
_CHUNKED_THRESHOLD = 20
_CHUNK_COUNT = 256

# Instrumentation: number of individual permanents evaluated since the last
# reset (batched sub-permanent calls count one evaluation per sub-permanent).
_EVAL_COUNT = 0


def reset_eval_counter() -> None:
    global _EVAL_COUNT
    _EVAL_COUNT = 0


def eval_counter() -> int:
    return _EVAL_COUNT


@dataclass(frozen=True)
class SubmatrixSelector:
    """Row and column index multisets selecting a square submatrix."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(i) for i in self.rows))
        object.__setattr__(self, "cols", tuple(int(i) for i in self.cols))
        if len(self.rows) != len(self.cols):
            raise DimensionError(
                f"row and column selections differ in size: {len(self.rows)} vs {len(self.cols)}"
            )


def submatrix(matrix, sel: SubmatrixSelector) -> np.ndarray:
    """Entry (i, j) of the result is matrix[sel.rows[i], sel.cols[j]].

    Repeated indices produce repeated rows/columns (collided occupations).
    """
    a = matrix.entries if isinstance(matrix, Interferometer) else np.asarray(matrix)
    size = a.shape[0]
    for idx in itertools.chain(sel.rows, sel.cols):
        if not 0 <= idx < size:
            raise IndexError(f"index {idx} out of bounds for a {size}-mode matrix")
    if not sel.rows:
        return np.zeros((0, 0), dtype=a.dtype)
    return a[np.ix_(sel.rows, sel.cols)]


def abs_squared(a) -> np.ndarray:
    """Elementwise |a_ij|² as a real matrix."""
    arr = np.asarray(a)
    return (arr * arr.conjugate()).real


def _check_square(a) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got shape {arr.shape}")
    return arr


def permanent_naive(a) -> complex:
    """Permanent as the explicit sum over all n! permutation products (oracle)."""
    global _EVAL_COUNT
    arr = _check_square(a)
    n = arr.shape[0]
    if n > NAIVE_LIMIT:
        raise SizeLimitError(f"brute-force permanent limited to n <= {NAIVE_LIMIT}, got {n}")
    _EVAL_COUNT += 1
    if n == 0:
        return 1.0 + 0.0j
    perms = np.array(list(itertools.permutations(range(n))))
    prods = arr[np.arange(n), perms].prod(axis=1)
    return complex(prods.sum())


@njit(cache=True)
def _ryser_kernel(a):
    n = a.shape[0]
    v = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    sign = 1.0
    for j in range(1, 1 << n):
        jj = j
        bit = 0
        while jj & 1 == 0:
            jj >>= 1
            bit += 1
        g = j ^ (j >> 1)
        if g & (1 << bit):
            for r in range(n):
                v[r] += a[r, bit]
        else:
            for r in range(n):
                v[r] -= a[r, bit]
        sign = -sign
        prod = 1.0 + 0.0j
        for r in range(n):
            prod *= v[r]
        total += sign * prod
    if n % 2 == 0:
        return total
    return -total


@njit(cache=True, parallel=True)
def _ryser_kernel_chunked(a, n_chunks):
    n = a.shape[0]
    n_subsets = (1 << n) - 1
    partial = np.zeros(n_chunks, dtype=np.complex128)
    for c in prange(n_chunks):
        start = 1 + (n_subsets * c) // n_chunks
        stop = 1 + (n_subsets * (c + 1)) // n_chunks
        if start >= stop:
            continue
        # Re-seed: build the row-sum state of the chunk's first subset directly.
        g0 = start ^ (start >> 1)
        v = np.zeros(n, dtype=np.complex128)
        bits = 0
        for col in range(n):
            if g0 & (1 << col):
                bits += 1
                for r in range(n):
                    v[r] += a[r, col]
        sign = -1.0 if bits & 1 else 1.0
        prod = 1.0 + 0.0j
        for r in range(n):
            prod *= v[r]
        acc = sign * prod
        for j in range(start + 1, stop):
            jj = j
            bit = 0
            while jj & 1 == 0:
                jj >>= 1
                bit += 1
            g = j ^ (j >> 1)
            if g & (1 << bit):
                for r in range(n):
                    v[r] += a[r, bit]
            else:
                for r in range(n):
                    v[r] -= a[r, bit]
            sign = -sign
            prod = 1.0 + 0.0j
            for r in range(n):
                prod *= v[r]
            acc += sign * prod
        partial[c] = acc
    total = 0.0 + 0.0j
    for c in range(n_chunks):
        total += partial[c]
    if n % 2 == 0:
        return total
    return -total


def permanent_ryser(a) -> complex:
    """Gray-code Ryser permanent; each of the 2^n − 1 subsets costs O(n) updates.

    Empty 0×0 input returns 1 (empty-product convention). Accumulation order
    is fixed (subset index ascending; chunk boundaries fixed for large n), so
    the result is reproducible and independent of thread count.
    """
    global _EVAL_COUNT
    arr = _check_square(a)
    n = arr.shape[0]
    if n > RYSER_LIMIT:
        raise SizeLimitError(f"Ryser permanent limited to n <= {RYSER_LIMIT}, got {n}")
    _EVAL_COUNT += 1
    if n == 0:
        return 1.0 + 0.0j
    arr = np.ascontiguousarray(arr)
    if n >= _CHUNKED_THRESHOLD:
        return complex(_ryser_kernel_chunked(arr, _CHUNK_COUNT))
    return complex(_ryser_kernel(arr))


def permanent_ryser_chunked(a, n_chunks: int = _CHUNK_COUNT) -> complex:
    """Chunked-parallel Ryser variant with an explicit chunk count."""
    global _EVAL_COUNT
    arr = _check_square(a)
    n = arr.shape[0]
    if n > RYSER_LIMIT:
        raise SizeLimitError(f"Ryser permanent limited to n <= {RYSER_LIMIT}, got {n}")
    _EVAL_COUNT += 1
    if n == 0:
        return 1.0 + 0.0j
    return complex(_ryser_kernel_chunked(np.ascontiguousarray(arr), int(n_chunks)))


@njit(cache=True)
def _row_removed_kernel(a):
    # a has shape (t, t-1); result[i] = permanent of a with row i removed.
    t = a.shape[0]
    q = t - 1
    v = np.zeros(t, dtype=np.complex128)
    acc = np.zeros(t, dtype=np.complex128)
    prefix = np.empty(t + 1, dtype=np.complex128)
    suffix = np.empty(t + 1, dtype=np.complex128)
    sign = 1.0
    for j in range(1, 1 << q):
        jj = j
        bit = 0
        while jj & 1 == 0:
            jj >>= 1
            bit += 1
        g = j ^ (j >> 1)
        if g & (1 << bit):
            for r in range(t):
                v[r] += a[r, bit]
        else:
            for r in range(t):
                v[r] -= a[r, bit]
        sign = -sign
        # Leave-one-out products of v via prefix/suffix scans.
        prefix[0] = 1.0 + 0.0j
        for r in range(t):
            prefix[r + 1] = prefix[r] * v[r]
        suffix[t] = 1.0 + 0.0j
        for r in range(t - 1, -1, -1):
            suffix[r] = suffix[r + 1] * v[r]
        for r in range(t):
            acc[r] += sign * prefix[r] * suffix[r + 1]
    if q % 2 == 1:
        for r in range(t):
            acc[r] = -acc[r]
    return acc


def row_removed_permanents(a) -> np.ndarray:
    """All t permanents of a (t × t−1) matrix with one row deleted.

    Entry i is the permanent of ``a`` without row i, computed in a single
    Gray-code sweep with leave-one-out products (O(t·2^t) total). This is
    the Laplace-expansion helper used by the chain-rule sampler.
    """
    global _EVAL_COUNT
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] + 1:
        raise DimensionError(f"expected shape (t, t-1), got {arr.shape}")
    t = arr.shape[0]
    if t - 1 > RYSER_LIMIT:
        raise SizeLimitError(f"sub-permanent batch limited to t <= {RYSER_LIMIT + 1}, got {t}")
    _EVAL_COUNT += t
    if t == 1:
        return np.ones(1, dtype=complex)
    return np.asarray(_row_removed_kernel(np.ascontiguousarray(arr)))
