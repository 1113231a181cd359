import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptc.analysis import perm_label_distance
from ptc.convcode import (
    ConfigError,
    ConvCodeSpec,
    bits_to_label,
    build_trellis,
    distance_spectrum,
    encode,
    encode_labels,
    free_distance,
    label_bits,
    parse_generators,
    viterbi_decode,
)


def test_parse_generators():
    assert parse_generators("7 5") == ((7, 5),)
    assert parse_generators("1 3 0; 3 2 3") == ((1, 3, 0), (3, 2, 3))
    with pytest.raises(ConfigError):
        parse_generators("8 5")
    with pytest.raises(ConfigError):
        parse_generators(" ; ")


def test_spec_validation():
    with pytest.raises(ConfigError):
        ConvCodeSpec.from_octal(1, 2, 3, "17 5")  # four taps on a three-stage register
    with pytest.raises(ConfigError):
        ConvCodeSpec.from_octal(1, 2, 3, "7")
    with pytest.raises(ConfigError):
        ConvCodeSpec.from_octal(2, 1, 3, "7")


def test_state_counts(r12, r23, r14):
    assert r12[1].num_states == 4
    assert r23[1].num_states == 4
    assert r14[1].num_states == 32
    for _, t, _ in (r12, r23, r14):
        U = 1 << t.k
        assert t.next_state.shape == (t.num_states, U)
        incoming = np.bincount(t.next_state.ravel(), minlength=t.num_states)
        assert (incoming == U).all()


def test_r12_transition(r12):
    t = r12[1]
    # state 00, input 1 -> output 11, next state 10
    assert label_bits(int(t.output[0, 1]), 2) == (1, 1)
    assert t.next_state[0, 1] == 0b10


def test_encode_1011(r12):
    out = encode(r12[1], [1, 0, 1, 1])
    assert out.tolist() == [1, 1, 1, 0, 0, 0, 0, 1]


def test_encode_trivial(r23):
    t = r23[1]
    assert encode(t, np.zeros(12, dtype=int)).sum() == 0
    assert encode(t, np.zeros(0, dtype=int)).size == 0
    with pytest.raises(ValueError):
        encode(t, [1, 0, 1])


def test_label_roundtrip():
    for n in (1, 3, 4):
        for lab in range(1 << n):
            assert bits_to_label(label_bits(lab, n)) == lab


def test_flush_returns_to_zero(r12, r23, r14, rng):
    for _, t, _ in (r12, r23, r14):
        msg = rng.integers(0, 2, 30 * t.k)
        state = 0
        steps = np.concatenate([msg, np.zeros(t.flush_steps * t.k, dtype=int)]).reshape(-1, t.k)
        for u in steps @ (1 << np.arange(t.k - 1, -1, -1)):
            state = t.next_state[state, u]
        assert state == 0


def test_viterbi_noiseless(r12):
    t = r12[1]
    labels = encode_labels(t, [1, 0, 1, 1, 0, 0])
    bm = np.ones((len(labels), 4))
    bm[np.arange(len(labels)), labels] = 0
    assert viterbi_decode(t, bm, terminated=True).tolist() == [1, 0, 1, 1, 0, 0]


def test_viterbi_all_equal_goes_to_zero_path(r23):
    bits = viterbi_decode(r23[1], np.ones((6, 8)))
    assert bits.sum() == 0


def test_viterbi_rejects_bad_metrics(r12):
    with pytest.raises(ValueError):
        viterbi_decode(r12[1], np.ones((3, 3)))
    with pytest.raises(ValueError):
        viterbi_decode(r12[1], -np.ones((3, 4)))


@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_viterbi_matches_exhaustive(T, seed):
    spec = ConvCodeSpec.from_octal(1, 2, 3, "7 5")
    t = build_trellis(spec)
    bm = np.random.default_rng(seed).random((T, 4))
    bits, metric = viterbi_decode(t, bm, return_metric=True)
    best = min(
        bm[np.arange(T), encode_labels(t, list(m))].sum() for m in itertools.product((0, 1), repeat=T)
    )
    assert metric == pytest.approx(best)
    assert bm[np.arange(T), encode_labels(t, bits)].sum() == pytest.approx(best)


def test_viterbi_batch_matches_single(r23, rng):
    t = r23[1]
    bm = rng.random((5, 7, 8))
    batch = viterbi_decode(t, bm)
    for b in range(5):
        assert (viterbi_decode(t, bm[b]) == batch[b]).all()


def test_free_distances(r12, r23, r14):
    assert free_distance(r12[1]) == 5
    assert free_distance(r23[1]) == 3
    assert free_distance(r14[1]) == 18


def test_mapped_free_distance_matches_spectrum(r12):
    _, t, book = r12
    D = perm_label_distance(book)
    dfree = free_distance(t, D)
    assert distance_spectrum(t, D).dfree == dfree
    assert dfree >= free_distance(t)  # the M=3 mapping never reduces distance


def test_spectrum_of_7_5(r12):
    sp = distance_spectrum(r12[1], max_distance=9)
    assert sp.complete
    assert [sp.counts[d] for d in range(5, 10)] == [1, 2, 4, 8, 16]
    assert [sp.info_weights[d] for d in range(5, 10)] == [1, 4, 12, 32, 80]


def test_one_state_code():
    spec = ConvCodeSpec.from_octal(1, 2, 1, "1 1")
    t = build_trellis(spec)
    assert t.num_states == 1
    assert free_distance(t) == 2
