"""Shared domain types and validation used across the package.

All types are immutable after construction and safe to share between
concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Max-norm tolerance on U†U − I. Tight enough to catch construction bugs,
#: loose enough for accumulated floating error at m ≤ 1000.
UNITARITY_TOL = 1e-10


class DimensionError(ValueError):
    """Matrix or index dimensions are inconsistent."""


class UnitarityError(ValueError):
    """A matrix that must be unitary is not."""


class InvalidConfigError(ValueError):
    """A parameter is outside its valid range or combination."""


class SizeLimitError(ValueError):
    """An input exceeds the size guard of an exponential-cost routine."""


class MatrixFormatError(ValueError):
    """A matrix file could not be parsed."""


class DomainError(ValueError):
    """A scalar argument is outside the mathematical domain of a formula."""


def unitarity_defect(matrix) -> float:
    """Return the max-norm of U†U − I for a square matrix."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    gram = a.conj().T @ a
    return float(np.max(np.abs(gram - np.eye(a.shape[0]))))


def validate_unitary(matrix) -> bool:
    """True iff the matrix is unitary within UNITARITY_TOL (max-norm).

    Accepts an Interferometer or any square array-like. Non-square input
    raises DimensionError.
    """
    entries = matrix.entries if isinstance(matrix, Interferometer) else matrix
    return unitarity_defect(entries) <= UNITARITY_TOL


@dataclass(frozen=True)
class Interferometer:
    """An m-mode linear interferometer stored as its m×m unitary matrix."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise DimensionError("an interferometer needs at least one mode")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        defect = unitarity_defect(a)
        if defect > UNITARITY_TOL:
            raise UnitarityError(f"matrix is not unitary: max|U†U - I| = {defect:.3e}")

    @property
    def modes(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Interferometer):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.entries.shape[0], self.entries.tobytes()))


@dataclass(frozen=True)
class FockVector:
    """Per-mode photon occupation numbers; ``total`` is recomputed on construction."""

    occupations: tuple[int, ...]
    total: int = field(init=False)

    def __post_init__(self):
        occ = tuple(int(c) for c in self.occupations)
        if any(c < 0 for c in occ):
            raise InvalidConfigError(f"occupations must be non-negative, got {occ}")
        object.__setattr__(self, "occupations", occ)
        object.__setattr__(self, "total", sum(occ))

    @property
    def modes(self) -> int:
        return len(self.occupations)

    def is_collision_free(self) -> bool:
        return all(c <= 1 for c in self.occupations)

    def mode_list(self) -> tuple[int, ...]:
        """Occupied mode indices with multiplicity, ascending (first-quantized list)."""
        out: list[int] = []
        for mode, count in enumerate(self.occupations):
            out.extend([mode] * count)
        return tuple(out)


@dataclass(frozen=True)
class NoiseModel:
    """Uniform pairwise indistinguishability x and per-photon survival eta."""

    x: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise InvalidConfigError(f"indistinguishability x must be in [0, 1], got {self.x}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidConfigError(f"survival probability eta must be in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class TruncationLevel:
    """Largest allowed size k of the mutually indistinguishable photon subset."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InvalidConfigError(f"truncation level must be non-negative, got {self.k}")


@dataclass(frozen=True)
class OutputSample:
    """One measured output occupation (may hold fewer photons than were input)."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "occupations", tuple(int(c) for c in self.occupations))

    @property
    def detected(self) -> int:
        return sum(self.occupations)


@dataclass
class OutcomeDistribution:
    """Sparse probability table keyed by output occupation tuple."""

    entries: dict[tuple[int, ...], float]
    support_photons: tuple[int, ...]

    @classmethod
    def from_entries(cls, entries: dict[tuple[int, ...], float]) -> "OutcomeDistribution":
        counts = sorted({sum(key) for key in entries})
        return cls(entries=dict(entries), support_photons=tuple(counts))

    def probability(self, occupation) -> float:
        return self.entries.get(tuple(occupation), 0.0)

    def mass(self) -> float:
        return float(sum(self.entries.values()))

    def items_sorted(self):
        """Entries in lexicographic key order (deterministic serialization)."""
        return sorted(self.entries.items())


def standard_input(n: int, m: int) -> FockVector:
    """The collision-free input with one photon in each of the first n of m modes."""
    if n > m:
        raise InvalidConfigError(f"cannot place {n} collision-free photons in {m} modes")
    if n < 0 or m < 0:
        raise InvalidConfigError("photon and mode counts must be non-negative")
    return FockVector((1,) * n + (0,) * (m - n))
