import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptc.convcode import ConfigError
from ptc.counters import OpCounter
from ptc.permmap import (
    Codebook,
    classify_mapping,
    demap_labels,
    demap_min_distance,
    format_word,
    hamming_distance,
    load_codebook,
    map_forward,
    parse_codebook,
    parse_word,
)

BOOKS = ("table1-m3", "table1-m4", "dpm-m4")


def test_table_rows():
    m3, m4 = load_codebook("table1-m3"), load_codebook("table1-m4")
    assert map_forward(m3, (0, 0)) == (1, 2, 3)
    assert map_forward(m3, (1, 1)) == (2, 3, 1)
    assert map_forward(m4, (1, 0, 1)) == (2, 4, 1, 3)
    assert map_forward(m4, (0, 0, 0)) == (1, 2, 3, 4)


def test_hamming():
    assert hamming_distance((1, 2, 3), (1, 2, 3)) == 0
    assert hamming_distance((1, 2, 3), (1, 3, 2)) == 2
    assert hamming_distance((1, 2, 3, 4), (2, 1, 4, 3)) == 4
    with pytest.raises(ValueError):
        hamming_distance((1, 2), (1, 2, 3))


def test_demap_examples():
    m3, m4 = load_codebook("table1-m3"), load_codebook("table1-m4")
    assert demap_min_distance(m3, (2, 3, 1)) == (1, 1)
    # 233 sits at distance 1 from both 213 and 231; the earlier row (213) wins
    assert demap_min_distance(m3, (2, 3, 3)) == (1, 0)
    assert demap_min_distance(m3, (2, 1, 1)) == (1, 0)
    assert demap_min_distance(m3, (3, 3, 1)) == (1, 1)  # 231 uniquely nearest
    assert demap_min_distance(m4, (1, 2, 3, 4)) == (0, 0, 0)


def test_dmin_by_pair_scan():
    assert load_codebook("table1-m3").d_min == 2
    book = Codebook(2, ((0,), (1,)), ((1, 2), (2, 1)))
    assert book.d_min == 2
    m4 = load_codebook("table1-m4")
    assert m4.d_min == min(hamming_distance(a, b) for a, b in itertools.combinations(m4.words, 2))


@pytest.mark.parametrize("name", BOOKS)
def test_book_invariants(name):
    book = load_codebook(name)
    assert book.size == 1 << book.n and book.n <= book.M
    assert len(set(book.words)) == book.size
    for b, w in zip(book.bits, book.words):
        assert map_forward(book, b) == w
        assert demap_min_distance(book, w) == b
        assert sorted(w) == list(range(1, book.M + 1))


def test_dpm_book_preserves_distance():
    kind, lo, _ = classify_mapping(load_codebook("dpm-m4"))
    assert kind in ("preserving", "increasing") and lo >= 0


def test_rate_ratio():
    assert load_codebook("dpm-m4").rate_ratio == pytest.approx(16 / 24)


def test_parse_errors():
    with pytest.raises(ConfigError, match=":2:"):
        parse_codebook("0 12\n1 11\n")
    with pytest.raises(ConfigError):
        parse_codebook("0 12\n0 21\n")
    with pytest.raises(ConfigError):
        parse_codebook("00 123\n01 132\n10 213\n")  # incomplete
    with pytest.raises(ConfigError):
        parse_codebook("0 12 x\n")


def test_word_format_roundtrip():
    assert format_word((3, 2, 1, 4)) == "3214"
    w = tuple(range(12, 0, -1))
    assert parse_word(format_word(w)) == w


@given(st.lists(st.integers(1, 4), min_size=4, max_size=4))
def test_vector_demap_matches_scalar(word):
    book = load_codebook("table1-m4")
    lab = demap_labels(book, np.array([word]))[0]
    assert book.bits[int(np.flatnonzero(book.row_labels == lab)[0])] == demap_min_distance(book, word)


def test_demap_counts():
    book = load_codebook("table1-m4")
    c = OpCounter()
    demap_labels(book, np.array([[1, 2, 3, 4], [4, 3, 2, 1]]), c)
    assert c.demap == 8 + 8 * 4  # one lookup of ceil(4 log2 4), one full scan
