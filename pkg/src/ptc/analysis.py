"""Closed-form references for hard-decision decoding of permutation trellis codes.

Threshold detection of a non-coherent M-FSK cell is characterised by two
probabilities: ``p11`` (an active cell clears the threshold) and ``p10`` (an
idle cell clears it). Everything here builds on those two numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .channel import ebno_to_esno
from .convcode import ConvCodeSpec, Trellis, build_trellis, distance_spectrum, free_distance
from .modem import THRESHOLD_FACTOR
from .permmap import Codebook

EXACT_MAX_M = 4
DEFAULT_DEPTH = 10


def marcum_q1(a, b):
    """First-order Marcum Q function Q1(a, b), vectorised over numpy broadcasting.

    Uses Q1(a, b) = P(X > b^2) for X noncentral chi-square with two degrees of
    freedom and noncentrality a^2, whose survival function scipy evaluates by
    a convergent Poisson-weighted series.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("Marcum Q needs a >= 0 and b >= 0")
    out = stats.ncx2.sf(b * b, 2, a * a)
    out = np.where(b == 0, 1.0, out)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DetectionProbs:
    """Per-cell threshold detector probabilities (first index: detected, second: sent)."""

    p11: float
    p01: float
    p10: float
    p00: float

    def __post_init__(self):
        for name in ("p11", "p01", "p10", "p00"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")

    @classmethod
    def from_pair(cls, p11: float, p10: float) -> "DetectionProbs":
        return cls(p11, 1.0 - p11, p10, 1.0 - p10)


def detection_probs(EsN0: float, threshold: float = THRESHOLD_FACTOR) -> DetectionProbs:
    """Probabilities for the threshold ``threshold * sqrt(Es)`` at linear Es/N0."""
    if EsN0 <= 0:
        raise ValueError("Es/N0 must be positive")
    x = math.sqrt(2.0 * EsN0)
    p11 = marcum_q1(x, threshold * x)
    p10 = math.exp(-threshold * threshold * EsN0)
    return DetectionProbs.from_pair(p11, p10)


def _decision_error(R: np.ndarray, book: Codebook) -> np.ndarray:
    """P(decision != sent word | R) for every sent codebook row: (N, M, M) -> (N, Q).

    The decision maximises the overlap with the received 0/1 matrix (the same
    as minimising Hamming distance), ties split uniformly.
    """
    rows = book.by_label - 1
    overlap = R[:, rows, np.arange(book.M)].sum(axis=2)  # (N, Q)
    best = overlap.max(axis=1, keepdims=True)
    winners = overlap == best
    n_win = winners.sum(axis=1, keepdims=True)
    return 1.0 - winners / n_win


def _all_binary_matrices(M: int) -> np.ndarray:
    idx = np.arange(1 << (M * M), dtype=np.int64)
    bits = (idx[:, None] >> np.arange(M * M)[::-1]) & 1
    return bits.reshape(-1, M, M).astype(np.uint8)


def analytical_pe_hd(EsN0: float, book: Codebook, normalize: str = "printed",
                     probs: DetectionProbs | None = None, monte_carlo: bool = False,
                     samples: int = 200_000, seed: int = 0) -> float:
    """Stage decision error probability of threshold detection plus minimum-distance decoding.

    Sums, over every sent codeword and every possible 0/1 received matrix, the
    likelihood of the matrix times the probability that the nearest-codeword
    decision is wrong. ``normalize="printed"`` divides the double sum by M,
    ``"codebook"`` by the codebook size (a true average over equiprobable
    words). For M > 4 the 2^(M^2) enumeration is replaced by sampling when
    ``monte_carlo`` is set.
    """
    if normalize not in ("printed", "codebook"):
        raise ValueError("normalize must be 'printed' or 'codebook'")
    if probs is None:
        probs = detection_probs(EsN0)
    M, Q = book.M, book.size
    S = np.zeros((Q, M, M), dtype=np.uint8)
    S[np.arange(Q)[:, None], book.by_label - 1, np.arange(M)] = 1
    if M <= EXACT_MAX_M:
        R = _all_binary_matrices(M)  # (N, M, M)
        err = _decision_error(R, book)  # (N, Q)
        # log-likelihood of each R under each sent S; cells are independent
        logs = np.log(np.array([[probs.p00, probs.p01], [probs.p10, probs.p11]]) + 1e-300)
        lik = np.empty((len(R), Q))
        for q in range(Q):
            lik[:, q] = np.exp(logs[R, S[q][None]].sum(axis=(1, 2)))
        total = float((lik * err).sum())
    elif monte_carlo:
        gen = np.random.Generator(np.random.Philox(seed))
        total = 0.0
        for q in range(Q):
            p_one = np.where(S[q] == 1, probs.p11, probs.p10)
            R = (gen.random((samples, M, M)) < p_one).astype(np.uint8)
            total += float(_decision_error(R, book)[:, q].mean())
    else:
        raise ValueError(f"exact enumeration needs M <= {EXACT_MAX_M}; pass monte_carlo=True")
    return total / (M if normalize == "printed" else Q)


def perm_label_distance(book: Codebook) -> np.ndarray:
    """Hamming distance between the codewords of every pair of labels."""
    w = book.by_label
    return (w[:, None, :] != w[None, :, :]).sum(axis=2)


@dataclass(frozen=True)
class BoundTerms:
    dfree: int
    a_d: dict[int, int]
    depth: int


@dataclass(frozen=True)
class BoundResult:
    value: float
    terms: BoundTerms
    partial: bool  # the event enumeration hit its length limit

    def __float__(self) -> float:
        return self.value


def _pairwise_erfc(e, RP: float, M: int, EsN0: float) -> float:
    return 0.5 * math.erfc(math.sqrt(RP / M * EsN0 * e))


def p2_erfc(d: int, RP: float, M: int, EsN0: float) -> float:
    """Pairwise term for a path at distance ``d``.

    Sums the erfc term over distances e >= d/2 + 1 up to d, adding half the
    e = d/2 term when d is even.
    """
    lo = math.ceil(d / 2 + 1)
    total = sum(_pairwise_erfc(e, RP, M, EsN0) for e in range(lo, d + 1))
    if d % 2 == 0:
        total += 0.5 * _pairwise_erfc(d // 2, RP, M, EsN0)
    return total


def _spectrum(trellis: Trellis, book: Codebook, depth: int, max_length: int):
    D = perm_label_distance(book)
    dfree = free_distance(trellis, D)
    spec = distance_spectrum(trellis, D, max_distance=dfree + depth - 1, max_length=max_length)
    return dfree, spec


def dfree_bound(EbN0_dB: float, spec: ConvCodeSpec, book: Codebook, depth: int = DEFAULT_DEPTH,
                max_length: int = 200) -> BoundResult:
    """Truncated union bound over error events of the permutation-mapped trellis.

    Events leave and rejoin the path of the all-zero message, whose branches
    carry the codeword of label 0. ``depth`` distance terms are summed,
    starting at the mapped free distance.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if spec.n != book.n:
        raise ValueError("code output width and codebook label width differ")
    trellis = build_trellis(spec)
    RP = spec.k / book.M
    EsN0 = 10 ** (ebno_to_esno(EbN0_dB, RP, book.M) / 10)
    dfree, sp = _spectrum(trellis, book, depth, max_length)
    value = sum(a * p2_erfc(d, RP, book.M, EsN0) for d, a in sp.counts.items())
    return BoundResult(value, BoundTerms(dfree, dict(sp.counts), depth), not sp.complete)


def p2_threshold(d: int, probs: DetectionProbs) -> float:
    """Pairwise error probability of the overlap metric between paths ``d`` symbols apart.

    In each differing time slot the correct path gains one metric unit when
    its active cell is detected and the competitor gains one when its cell is
    a false alarm. With X ~ Bin(d, p11) and Y ~ Bin(d, p10), the wrong path
    wins when Y > X and half the time when Y = X.
    """
    k = np.arange(d + 1)
    px = stats.binom.pmf(k, d, probs.p11)
    py = stats.binom.pmf(k, d, probs.p10)
    cy = np.cumsum(py)  # P(Y <= k)
    greater = float((px * (1.0 - cy)).sum())
    equal = float((px * py).sum())
    return greater + 0.5 * equal


def hd_ber_prediction(EbN0_dB: float, spec: ConvCodeSpec, book: Codebook,
                      depth: int = DEFAULT_DEPTH, max_length: int = 200) -> BoundResult:
    """Bit error rate predicted for threshold detection followed by Viterbi decoding.

    Union bound (1/k) sum_d B_d P2(d) with the information weights B_d of the
    mapped trellis and the pairwise probability of :func:`p2_threshold`.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    trellis = build_trellis(spec)
    RP = spec.k / book.M
    EsN0 = 10 ** (ebno_to_esno(EbN0_dB, RP, book.M) / 10)
    probs = detection_probs(EsN0)
    dfree, sp = _spectrum(trellis, book, depth, max_length)
    value = sum(sp.info_weights[d] * p2_threshold(d, probs) for d in sp.counts) / spec.k
    return BoundResult(min(value, 0.5), BoundTerms(dfree, dict(sp.counts), depth), not sp.complete)


def analysis_table(ebno_db, spec: ConvCodeSpec, book: Codebook, depth: int = DEFAULT_DEPTH,
                   normalize: str = "printed") -> list[tuple[float, float, float]]:
    """(Eb/N0 dB, stage error probability, event bound) rows for overlay plots."""
    RP = spec.k / book.M
    rows = []
    for x in ebno_db:
        EsN0 = 10 ** (ebno_to_esno(x, RP, book.M) / 10)
        pe = analytical_pe_hd(EsN0, book, normalize=normalize, monte_carlo=book.M > EXACT_MAX_M)
        rows.append((float(x), pe, dfree_bound(x, spec, book, depth).value))
    return rows


__all__ = [
    "marcum_q1", "DetectionProbs", "detection_probs", "analytical_pe_hd", "BoundTerms",
    "BoundResult", "dfree_bound", "p2_erfc", "p2_threshold", "hd_ber_prediction",
    "perm_label_distance", "analysis_table",
]
