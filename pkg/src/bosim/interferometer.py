"""Construction and file I/O of interferometers: Haar-random, Fourier, user-supplied."""

from __future__ import annotations

import json
import math

import numpy as np

from .core import DimensionError, Interferometer, MatrixFormatError

__all__ = ["haar_random", "fourier", "save_matrix", "load_matrix", "matrix_to_dict", "matrix_from_dict"]


def haar_random(m: int, seed: int) -> Interferometer:
    """Draw an m×m unitary from the Haar measure, deterministically from seed.

    QR of an i.i.d. standard-complex-Gaussian matrix, with each column of Q
    rephased so the corresponding diagonal entry of R is real positive (raw
    QR of a Ginibre matrix is not Haar-distributed).
    """
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    assert np.all(np.abs(d) > 0.0)
    phases = d / np.abs(d)
    q = q * phases
    # The rephased triangular factor conj(phases)·diag(r) is now real positive.
    return Interferometer(q)


def fourier(m: int) -> Interferometer:
    """The m-mode discrete-Fourier-transform interferometer (deterministic fixture)."""
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    j = np.arange(m)
    entries = np.exp(2j * np.pi * np.outer(j, j) / m) / math.sqrt(m)
    return Interferometer(entries)


def matrix_to_dict(u: Interferometer) -> dict:
    """Shared repo-wide JSON matrix schema: {"m": int, "re": [[...]], "im": [[...]]}."""
    return {
        "m": u.modes,
        "re": u.entries.real.tolist(),
        "im": u.entries.imag.tolist(),
    }


def matrix_from_dict(data) -> Interferometer:
    if not isinstance(data, dict):
        raise MatrixFormatError("matrix file must hold a JSON object")
    try:
        m = int(data["m"])
        re = np.array(data["re"], dtype=float)
        im = np.array(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"malformed matrix object: {exc}") from exc
    if re.shape != (m, m) or im.shape != (m, m):
        raise MatrixFormatError(
            f"matrix entries have shape re={re.shape} im={im.shape}, expected ({m}, {m})"
        )
    return Interferometer(re + 1j * im)


def save_matrix(u: Interferometer, path) -> None:
    """Write an interferometer in the JSON matrix format (lossless round trip)."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(matrix_to_dict(u), handle)
        handle.write("\n")


def load_matrix(path) -> Interferometer:
    """Read an interferometer saved by save_matrix.

    Parse failures raise MatrixFormatError; a parseable but non-unitary
    matrix raises UnitarityError.
    """
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"not valid JSON: {exc}") from exc
    return matrix_from_dict(data)
