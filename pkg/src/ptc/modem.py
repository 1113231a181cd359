"""M-FSK modulation of permutation codewords and the two non-coherent detectors.

A code matrix has frequencies on rows and time slots on columns; symbol ``c_j``
puts sqrt(Es) at row ``c_j`` of column ``j``. All functions accept a single
``M x M`` matrix or any stack ``(..., M, M)``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .counters import OpCounter

THRESHOLD_FACTOR = 0.6


def modulate(word: Sequence[int] | np.ndarray, Es: float = 1.0) -> np.ndarray:
    """Code matrix (or stack of them) for 1-based codeword(s) along the last axis."""
    if Es <= 0:
        raise ValueError("symbol energy must be positive")
    c = np.asarray(word, dtype=np.int64)
    M = c.shape[-1]
    if not np.array_equal(np.sort(c, axis=-1), np.broadcast_to(np.arange(1, M + 1), c.shape)):
        raise ValueError("modulate expects permutations of 1..M")
    S = np.zeros(c.shape + (M,), dtype=float)  # (..., j, i) then swapped
    np.put_along_axis(S, (c - 1)[..., None], math.sqrt(Es), axis=-1)
    return np.swapaxes(S, -1, -2)


def envelope_detect(Y: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
    """Per time slot, the 1-based row with the largest magnitude (lowest row on ties).

    The correlator output |y^H s_m| equals sqrt(Es) * |y_m|, so the argmax over
    m only needs the row magnitudes.
    """
    mag = np.abs(np.asarray(Y))
    if counter is not None:
        counter.demod += mag.size
    return np.argmax(mag, axis=-2) + 1


def threshold_detect(Y: np.ndarray, tau: float | None = None, Es: float = 1.0,
                     counter: OpCounter | None = None) -> np.ndarray:
    """r_ij = 1 iff |y_ij| >= tau, with tau = 0.6 sqrt(Es) by default."""
    if tau is None:
        tau = THRESHOLD_FACTOR * math.sqrt(Es)
    if tau < 0:
        raise ValueError("threshold must be non-negative")
    mag = np.abs(np.asarray(Y))
    if counter is not None:
        counter.demod += mag.size
    return (mag >= tau).astype(np.uint8)
