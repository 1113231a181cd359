"""End-to-end decoders: hard-decision baselines, PSDD/BB soft schemes and the optimal decision.

Every scheme turns each received ``M x M`` matrix into per-label branch
metrics and runs the Viterbi decoder:

========  =====================================================  ===============
scheme    stage decision                                         branch metric
========  =====================================================  ===============
hd-ed     envelope detector -> integer sequence                  Hamming to codeword
hd-td     threshold detector -> 0/1 matrix                       M - overlap
s1        Hungarian, then Murty until in the codebook            Hamming to codeword
s2        as s1, then nearest-codeword demapping                 binary Hamming
s3        branch and bound                                       Hamming to codeword
s4        branch and bound, then demapping                       binary Hamming
od1       best in-book codeword by exhaustive search             Hamming to codeword
od2       as od1, demapped                                       binary Hamming
========  =====================================================  ===============
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .assign import Assignment, branch_and_bound, hungarian, murty_iter
from .convcode import Trellis, viterbi_decode
from .counters import OpCounter
from .modem import envelope_detect, threshold_detect
from .permmap import Codebook, demap_labels

SCHEMES = ("hd-ed", "hd-td", "s1", "s2", "s3", "s4", "od1", "od2")
DEMAPPED = {"s2", "s4", "od2"}
TIE_JITTER = 1e-6


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str
    g_max: int = 1
    input_mode: str = "soft"  # soft: -|y|, hard: -r after the threshold detector
    random_ties: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.g_max < 1:
            raise ValueError("g_max must be at least 1")
        if self.input_mode not in ("soft", "hard"):
            raise ValueError("input_mode must be 'soft' or 'hard'")

    @property
    def label(self) -> str:
        if self.scheme in ("s1", "s2"):
            return f"{self.scheme}-g{self.g_max}"
        return self.scheme


def build_cost_matrix(Y=None, R=None) -> np.ndarray:
    """-|y_ij| from received samples, or -r_ij from threshold-detected bits."""
    if (Y is None) == (R is None):
        raise ValueError("pass exactly one of Y (soft) or R (thresholded)")
    if Y is not None:
        return -np.abs(np.asarray(Y))
    return -np.asarray(R, dtype=float)


def psdd_decode(C, book: Codebook, g_max: int, counter: OpCounter | None = None
                ) -> tuple[tuple[int, ...], bool, int]:
    """Hungarian at g = 1, then Murty ranking until a codeword of ``book`` appears.

    Returns ``(word, in_book, iterations)``. When ``g_max`` ranked assignments
    are exhausted without reaching the codebook, the ``g_max``-th one is
    returned with ``in_book`` False. ``g_max`` is capped at the codebook size.
    """
    g_max = max(1, min(g_max, book.size))
    first = hungarian(C, counter)
    word = first.codeword
    if book.contains(word) or g_max == 1:
        return word, book.contains(word), 1
    g = 0
    for g, a in enumerate(murty_iter(C, counter), 1):
        word = a.codeword
        if book.contains(word) or g == g_max:
            break
    return word, book.contains(word), g


def _bb_word(C, counter: OpCounter | None) -> tuple[int, ...]:
    return branch_and_bound(C, counter).codeword


@lru_cache(maxsize=1 << 17)
def _cached_hard(kind: str, key: bytes, M: int, book: Codebook, g_max: int
                 ) -> tuple[tuple[int, ...], int]:
    # thresholded inputs only take 2^(M^2) values; solver work is replayed into the counter
    C = -np.frombuffer(key, dtype=np.uint8).reshape(M, M).astype(float)
    c = OpCounter()
    if kind == "psdd":
        word = psdd_decode(C, book, g_max, c)[0]
    else:
        word = _bb_word(C, c)
    return word, c.solver


def stage_words(costs: np.ndarray, cfg: SchemeConfig, book: Codebook,
                counter: OpCounter | None = None, rng: np.random.Generator | None = None,
                hard_input: np.ndarray | None = None) -> np.ndarray:
    """Per-matrix soft decision for s1..s4 and od1/od2: (N, M, M) costs -> (N, M) codewords."""
    N, M, _ = costs.shape
    if cfg.random_ties:
        if rng is None:
            raise ValueError("random tie mode needs an rng")
        costs = costs + rng.uniform(0.0, TIE_JITTER, costs.shape)
    if cfg.scheme in ("od1", "od2"):
        words = np.asarray(book.words, dtype=np.int64) - 1
        totals = costs[:, words, np.arange(M)].sum(axis=2)  # (N, Q)
        if counter is not None:
            counter.solver += N * book.size * M
        return np.asarray(book.words, dtype=np.int64)[np.argmin(totals, axis=1)]
    kind = "psdd" if cfg.scheme in ("s1", "s2") else "bb"
    out = np.empty((N, M), dtype=np.int64)
    use_cache = hard_input is not None and not cfg.random_ties
    c = counter if counter is not None else OpCounter()
    for idx in range(N):
        if use_cache:
            word, ops = _cached_hard(kind, hard_input[idx].tobytes(), M, book, cfg.g_max)
            c.solver += ops
        elif kind == "psdd":
            word = psdd_decode(costs[idx].tolist(), book, cfg.g_max, c)[0]
        else:
            word = _bb_word(costs[idx].tolist(), c)
        out[idx] = word
    return out


def nonbinary_metrics(words: np.ndarray, book: Codebook, counter: OpCounter | None = None) -> np.ndarray:
    """Hamming distance from each decided sequence to each branch codeword: (N, M) -> (N, 2^n)."""
    words = np.asarray(words)
    if counter is not None:
        counter.compare += words.shape[0] * book.size * book.M
    return (words[:, None, :] != book.by_label[None, :, :]).sum(axis=2).astype(float)


def binary_metrics(labels: np.ndarray, n: int) -> np.ndarray:
    """Binary Hamming distance from each demapped n-tuple to each branch label."""
    x = np.asarray(labels)[:, None] ^ np.arange(1 << n)[None, :]
    return sum(((x >> b) & 1) for b in range(n)).astype(float)


def td_metrics(R: np.ndarray, book: Codebook, counter: OpCounter | None = None) -> np.ndarray:
    """M - sum(s_ij AND r_ij) against every branch code matrix: (N, M, M) -> (N, 2^n)."""
    M = book.M
    rows = book.by_label - 1  # (L, M) row of the active cell in each column
    overlap = R[:, rows, np.arange(M)].sum(axis=2)  # (N, L)
    if counter is not None:
        counter.compare += R.shape[0] * book.size * M * M
    return (M - overlap).astype(float)


def stage_metrics(Y: np.ndarray, cfg: SchemeConfig, book: Codebook, Es: float = 1.0,
                  counter: OpCounter | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Branch metrics for a flat stack of received matrices (N, M, M) -> (N, 2^n)."""
    Y = np.asarray(Y)
    if cfg.scheme == "hd-ed":
        r = envelope_detect(Y, counter)
        return nonbinary_metrics(r, book, counter)
    if cfg.scheme == "hd-td" or cfg.input_mode == "hard":
        R = threshold_detect(Y, Es=Es, counter=counter)
        if cfg.scheme == "hd-td":
            return td_metrics(R, book, counter)
        costs = build_cost_matrix(R=R)
    else:
        R = None
        costs = build_cost_matrix(Y=Y)
    words = stage_words(costs, cfg, book, counter, rng, hard_input=R)
    if cfg.scheme in DEMAPPED:
        return binary_metrics(demap_labels(book, words, counter), book.n)
    return nonbinary_metrics(words, book, counter)


def decode_blocks(Y: np.ndarray, trellis: Trellis, book: Codebook, cfg: SchemeConfig,
                  Es: float = 1.0, terminated: bool = True, counter: OpCounter | None = None,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Decode a batch ``(B, T, M, M)`` (or one block ``(T, M, M)``) to input bits."""
    Y = np.asarray(Y)
    single = Y.ndim == 3
    if single:
        Y = Y[None]
    B, T, M, _ = Y.shape
    if M != book.M:
        raise ValueError(f"received matrices are {M}x{M} but the codebook has M={book.M}")
    if trellis.n != book.n:
        raise ValueError(f"code emits n={trellis.n} bits but the codebook maps n={book.n}")
    bm = stage_metrics(Y.reshape(B * T, M, M), cfg, book, Es, counter, rng).reshape(B, T, -1)
    bits = viterbi_decode(trellis, bm, terminated=terminated, counter=counter)
    return bits[0] if single else bits


def _decode(blocks, book, trellis, cfg, **kw):
    return decode_blocks(np.asarray(blocks), trellis, book, cfg, **kw)


def decode_block_scheme1(blocks, book, trellis, g_max, input_mode="soft", **kw):
    return _decode(blocks, book, trellis, SchemeConfig("s1", g_max, input_mode), **kw)


def decode_block_scheme2(blocks, book, trellis, g_max, input_mode="soft", **kw):
    return _decode(blocks, book, trellis, SchemeConfig("s2", g_max, input_mode), **kw)


def decode_block_scheme3(blocks, book, trellis, input_mode="soft", **kw):
    return _decode(blocks, book, trellis, SchemeConfig("s3", 1, input_mode), **kw)


def decode_block_scheme4(blocks, book, trellis, input_mode="soft", **kw):
    return _decode(blocks, book, trellis, SchemeConfig("s4", 1, input_mode), **kw)


def decode_block_hd(blocks, book, trellis, detector="TD", **kw):
    scheme = {"ED": "hd-ed", "TD": "hd-td"}[detector.upper()]
    return _decode(blocks, book, trellis, SchemeConfig(scheme), **kw)


def decode_block_od(blocks, book, trellis, demap=False, input_mode="soft", **kw):
    return _decode(blocks, book, trellis, SchemeConfig("od2" if demap else "od1", 1, input_mode), **kw)


__all__ = [
    "SCHEMES", "SchemeConfig", "Assignment", "build_cost_matrix", "psdd_decode", "stage_words",
    "stage_metrics", "decode_blocks", "decode_block_scheme1", "decode_block_scheme2",
    "decode_block_scheme3", "decode_block_scheme4", "decode_block_hd", "decode_block_od",
]
