"""Permutation codebooks and the binary <-> permutation mapping.

Symbols are 1-based (``1..M``) as printed in the literature; codewords are
tuples of ints. A codebook row pairs an ``n``-bit tuple with a codeword and
rows keep their file order, which is the tie-break order for demapping.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .convcode import ConfigError, bits_to_label
from .counters import OpCounter

BUILTIN_BOOKS = {
    "table1-m3": "table1_n2_m3.txt",
    "table1-m4": "table1_n3_m4.txt",
    "dpm-m4": "dpm_n4_m4.txt",
}


def hamming_distance(c1: Sequence, c2: Sequence) -> int:
    if len(c1) != len(c2):
        raise ValueError(f"length mismatch: {len(c1)} vs {len(c2)}")
    return sum(a != b for a, b in zip(c1, c2))


@dataclass(frozen=True, eq=False)
class Codebook:
    M: int
    bits: tuple[tuple[int, ...], ...]
    words: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.M < 2:
            raise ConfigError("M must be at least 2")
        if len(self.bits) != len(self.words) or len(self.words) < 2:
            raise ConfigError("codebook needs at least two rows with bits and codewords")
        n = len(self.bits[0])
        if any(len(b) != n for b in self.bits):
            raise ConfigError("bit tuples differ in length")
        if len(self.bits) != 1 << n:
            raise ConfigError(f"a codebook for n={n} needs {1 << n} rows, got {len(self.bits)}")
        if n > self.M:
            raise ConfigError(f"n={n} exceeds M={self.M}")
        full = tuple(range(1, self.M + 1))
        for w in self.words:
            if tuple(sorted(w)) != full:
                raise ConfigError(f"{format_word(w)} is not a permutation of 1..{self.M}")
        if len(set(self.bits)) != len(self.bits):
            raise ConfigError("duplicate bit tuples")
        if len(set(self.words)) != len(self.words):
            raise ConfigError("duplicate codewords")

    @property
    def n(self) -> int:
        return len(self.bits[0])

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def rate_ratio(self) -> float:
        """2^n / M!: the share of all permutations that are codewords."""
        return self.size / math.factorial(self.M)

    @cached_property
    def word_index(self) -> dict[tuple[int, ...], int]:
        return {w: q for q, w in enumerate(self.words)}

    @cached_property
    def bits_index(self) -> dict[tuple[int, ...], int]:
        return {b: q for q, b in enumerate(self.bits)}

    @cached_property
    def row_labels(self) -> np.ndarray:
        """Label integer of each row."""
        return np.array([bits_to_label(b) for b in self.bits], dtype=np.int64)

    @cached_property
    def by_label(self) -> np.ndarray:
        """(2^n, M) array of 1-based codewords indexed by branch label."""
        arr = np.zeros((self.size, self.M), dtype=np.int64)
        for lab, w in zip(self.row_labels, self.words):
            arr[lab] = w
        return arr

    @cached_property
    def d_min(self) -> int:
        return min_distance(self)

    def contains(self, word: Sequence[int]) -> bool:
        return tuple(word) in self.word_index


def format_word(word: Sequence[int]) -> str:
    if max(word) <= 9:
        return "".join(str(int(s)) for s in word)
    return ",".join(str(int(s)) for s in word)


def parse_word(token: str) -> tuple[int, ...]:
    if "," in token:
        return tuple(int(t) for t in token.split(","))
    return tuple(int(ch) for ch in token)


def map_forward(book: Codebook, bits: Sequence[int]) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if len(bits) != book.n:
        raise ValueError(f"expected {book.n} bits, got {len(bits)}")
    try:
        return book.words[book.bits_index[bits]]
    except KeyError:
        raise RuntimeError(f"bit tuple {bits} missing from a complete codebook") from None


def demap_min_distance(book: Codebook, word: Sequence[int]) -> tuple[int, ...]:
    """Bits of the nearest codeword in Hamming distance (lowest row wins ties)."""
    q = book.word_index.get(tuple(int(s) for s in word))
    if q is None:
        dists = [hamming_distance(word, w) for w in book.words]
        q = int(np.argmin(dists))
    return book.bits[q]


def demap_labels(book: Codebook, words: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
    """Vectorised demapper: (N, M) 1-based sequences -> (N,) branch labels.

    In-book words cost a lookup (counted as ceil(M log2 M)); the rest fall
    back to a full codebook scan of 2^n * M symbol comparisons.
    """
    words = np.asarray(words)
    D = (words[:, None, :] != np.asarray(book.words)[None, :, :]).sum(axis=2)
    q = np.argmin(D, axis=1)
    if counter is not None:
        exact = D[np.arange(len(q)), q] == 0
        lookup = math.ceil(book.M * math.log2(book.M))
        counter.demap += int(exact.sum()) * lookup + int((~exact).sum()) * book.size * book.M
    return book.row_labels[q]


def min_distance(book: Codebook) -> int:
    return min(hamming_distance(a, b) for a, b in itertools.combinations(book.words, 2))


def classify_mapping(book: Codebook) -> tuple[str, int, int]:
    """Compare codeword distance with bit-tuple distance over every pair of rows.

    Returns ``(kind, min_gain, max_gain)`` where gain = d(codewords) - d(bits);
    kind is ``"increasing"`` when every gain >= 1, ``"preserving"`` when every
    gain >= 0 and ``"reducing"`` otherwise.
    """
    gains = [
        hamming_distance(book.words[i], book.words[j]) - hamming_distance(book.bits[i], book.bits[j])
        for i, j in itertools.combinations(range(book.size), 2)
    ]
    lo, hi = min(gains), max(gains)
    kind = "increasing" if lo >= 1 else "preserving" if lo >= 0 else "reducing"
    return kind, lo, hi


def parse_codebook(text: str, name: str = "") -> Codebook:
    bits, words = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{name or 'codebook'}:{lineno}: expected 'bits codeword', got {raw.strip()!r}")
        b, w = parts
        if set(b) - {"0", "1"}:
            raise ConfigError(f"{name or 'codebook'}:{lineno}: bits must be 0/1, got {b!r}")
        try:
            word = parse_word(w)
        except ValueError:
            raise ConfigError(f"{name or 'codebook'}:{lineno}: bad codeword {w!r}") from None
        if bits and len(b) != len(bits[0]):
            raise ConfigError(f"{name or 'codebook'}:{lineno}: bit tuple length differs from earlier rows")
        if words and len(word) != len(words[0]):
            raise ConfigError(f"{name or 'codebook'}:{lineno}: codeword length differs from earlier rows")
        if tuple(sorted(word)) != tuple(range(1, len(word) + 1)):
            raise ConfigError(f"{name or 'codebook'}:{lineno}: {w} is not a permutation of 1..{len(word)}")
        if tuple(int(c) for c in b) in {tuple(x) for x in bits}:
            raise ConfigError(f"{name or 'codebook'}:{lineno}: duplicate bit tuple {b}")
        if word in set(words):
            raise ConfigError(f"{name or 'codebook'}:{lineno}: duplicate codeword {w}")
        bits.append(tuple(int(c) for c in b))
        words.append(word)
    if not words:
        raise ConfigError(f"{name or 'codebook'}: no rows")
    return Codebook(len(words[0]), tuple(bits), tuple(words), name=name)


def load_codebook(ref: str | Path) -> Codebook:
    """Load a codebook from a file path or a built-in name (see ``BUILTIN_BOOKS``)."""
    ref = str(ref)
    if ref in BUILTIN_BOOKS:
        text = resources.files("ptc").joinpath("data", "codebooks", BUILTIN_BOOKS[ref]).read_text()
        return parse_codebook(text, name=ref)
    path = Path(ref)
    return parse_codebook(path.read_text(), name=path.name)
