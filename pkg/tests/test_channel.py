import math

import numpy as np
import pytest

from ptc.channel import (
    HEAVY_GAMMA,
    HEAVY_T_NOISE,
    ChannelParams,
    RngStream,
    ebno_to_esno,
    impulse_mask,
    transmit,
    transmit_awgn,
    transmit_plc,
)
from ptc.convcode import ConfigError
from ptc.modem import modulate


def test_noiseless_limit():
    S = modulate((2, 3, 1))
    Y = transmit_awgn(S, ChannelParams(EsN0_dB=200), RngStream(1).generator())
    assert np.allclose(np.abs(Y), S)
    assert (transmit(S, ChannelParams(kind="none"), None) == S).all()


def test_rayleigh_mean():
    p = ChannelParams(EsN0_dB=3.0)
    Y = transmit_awgn(np.zeros((100_000, 1, 1)), p, RngStream(7).generator())
    assert np.abs(Y).mean() == pytest.approx(math.sqrt(math.pi * p.N0() / 4), rel=0.02)


def test_noise_power_split():
    p = ChannelParams(EsN0_dB=0.0)
    Y = transmit_awgn(np.zeros((200_000, 1, 1)), p, RngStream(3).generator())
    assert np.var(Y.real) == pytest.approx(p.N0() / 2, rel=0.02)
    assert np.mean(np.abs(Y) ** 2) == pytest.approx(p.N0(), rel=0.02)


def test_seeded_streams_repeat():
    S = modulate(np.tile((1, 2, 3, 4), (5, 1)))
    p = ChannelParams(kind="plc", EsN0_dB=5.0)
    a = transmit_plc(S, p, RngStream(11, (1, 2)))
    b = transmit_plc(S, p, RngStream(11, (1, 2)))
    c = transmit_plc(S, p, RngStream(11, (1, 3)))
    assert (a == b).all() and not (a == c).all()


def test_heavy_hit_probability():
    p = ChannelParams(kind="plc")
    assert p.p_hit == pytest.approx(0.00327, abs=2e-5)
    assert p.p_hit == pytest.approx(HEAVY_GAMMA * HEAVY_T_NOISE)
    hits = impulse_mask((1_000_000, 1, 1), p.p_hit, RngStream(5).generator())
    assert hits.mean() == pytest.approx(p.p_hit, rel=0.05)


def test_impulse_hits_whole_slot():
    mask = impulse_mask((50, 4, 4), 0.5, RngStream(2).generator())
    assert mask.shape == (50, 1, 4)


def test_bad_hit_probability():
    with pytest.raises(ConfigError):
        ChannelParams(kind="plc", gamma=1e6)
    with pytest.raises(ConfigError):
        ChannelParams(kind="fading")


def test_large_A_matches_awgn():
    S = modulate(np.tile((1, 2, 3), (20_000, 1)))
    a = np.abs(transmit_plc(S, ChannelParams(kind="plc", A=1e12, EsN0_dB=4), RngStream(9).generator()))
    b = np.abs(transmit_awgn(S, ChannelParams(EsN0_dB=4), RngStream(10).generator()))
    assert a.mean() == pytest.approx(b.mean(), rel=0.01)


def test_impulse_power():
    p = ChannelParams(kind="plc", A=0.1, EsN0_dB=10.0, gamma=1.0, t_noise=1.0)  # every slot hit
    Y = transmit_plc(np.zeros((50_000, 1, 1)), p, RngStream(4).generator())
    assert np.mean(np.abs(Y) ** 2) == pytest.approx(p.N0() + p.Ni(), rel=0.03)


def test_narrowband_row():
    S = modulate(np.tile((3, 2, 1, 4), (3, 1)))  # three stages: slots 0..11
    p = ChannelParams(kind="plc", EsN0_dB=40, gamma=0.0, nbi_row=1, nbi_slots=4, nbi_start=0, nbi_power_db=20)
    Y = np.abs(transmit_plc(S, p, RngStream(1).generator()))
    first = Y[0] > 0.6
    assert first[0].all()  # interferer fills row 1 of stage 0
    assert (Y[1:, 0] < 1.5).all()  # and nothing past slot 3


def test_ebno_conversion():
    assert ebno_to_esno(3.0, 1.0, 2) == pytest.approx(3.0)
    assert ebno_to_esno(0.0, 1 / 3, 3) == pytest.approx(10 * math.log10(math.log2(3) / 3))
    assert ebno_to_esno(6.0, 0.25, 4) == pytest.approx(6 + 10 * math.log10(0.5))
    with pytest.raises(ValueError):
        ebno_to_esno(1.0, 0.0, 4)
