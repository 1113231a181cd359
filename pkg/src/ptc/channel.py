"""Non-coherent AWGN and powerline (impulse noise + narrowband interference) channels.

Noise conventions: the Gaussian term has total power ``N0`` (``N0/2`` per real
component), the impulse term has total power ``Ni = N0 / A``. Impulses arrive
per time slot: a slot is hit with probability ``p_hit`` and, when hit, every
frequency of that slot receives an independent impulse sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convcode import ConfigError

# heavily disturbed indoor scenario: 0.0196 s mean inter-arrival, 0.0641 ms bursts
HEAVY_GAMMA = 1.0 / 0.0196
HEAVY_T_NOISE = 0.0641e-3


@dataclass(frozen=True)
class RngStream:
    """Reproducible Philox stream identified by a seed and a tuple of indices."""

    seed: int
    stream: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(s) for s in self.stream))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, *index: int) -> "RngStream":
        return RngStream(self.seed, self.stream + tuple(index))


@dataclass(frozen=True)
class ChannelParams:
    EsN0_dB: float = 10.0
    kind: str = "awgn"  # awgn | plc | none
    A: float = 0.1
    gamma: float = HEAVY_GAMMA
    t_noise: float = HEAVY_T_NOISE
    sample_rate: float | None = None
    nbi_row: int | None = None
    nbi_slots: int = 0
    nbi_start: int = 0
    nbi_power_db: float = 10.0
    random_phase: bool = True

    def __post_init__(self):
        if self.kind not in ("awgn", "plc", "none"):
            raise ConfigError(f"unknown channel {self.kind!r}")
        if self.kind == "plc":
            if self.A <= 0:
                raise ConfigError("impulsive index A must be positive")
            if not 0.0 <= self.p_hit <= 1.0:
                raise ConfigError(f"impulse probability {self.p_hit:.4g} outside [0, 1]")

    def N0(self, Es: float = 1.0) -> float:
        return Es / 10 ** (self.EsN0_dB / 10)

    def Ni(self, Es: float = 1.0) -> float:
        return self.N0(Es) / self.A

    @property
    def p_hit(self) -> float:
        """Probability that a time slot is hit by an impulse.

        Without a sample rate this is gamma * t_noise, the fraction of time
        covered by impulses. With one, a slot of length 1/sample_rate is hit
        when a Poisson arrival falls within t_noise before or inside it.
        """
        if self.sample_rate is None:
            return self.gamma * self.t_noise
        return 1.0 - math.exp(-self.gamma * (self.t_noise + 1.0 / self.sample_rate))

    def with_snr(self, EsN0_dB: float) -> "ChannelParams":
        return ChannelParams(**{**self.__dict__, "EsN0_dB": EsN0_dB})


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def _cn(gen: np.random.Generator, shape, power: float) -> np.ndarray:
    scale = math.sqrt(power / 2)
    return scale * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))


def transmit_awgn(S: np.ndarray, params: ChannelParams, rng, Es: float = 1.0) -> np.ndarray:
    """y = e^{j phi} s + v_G with one uniform phase per time slot."""
    gen = _gen(rng)
    S = np.asarray(S, dtype=float)
    M = S.shape[-1]
    if params.random_phase:
        phi = gen.uniform(0.0, 2 * math.pi, S.shape[:-2] + (1, M))
        Y = S * np.exp(1j * phi)
    else:
        Y = S.astype(complex)
    return Y + _cn(gen, S.shape, params.N0(Es))


def impulse_mask(shape, p_hit: float, gen: np.random.Generator) -> np.ndarray:
    """Bernoulli(p_hit) per time slot, broadcast over the frequency rows."""
    return gen.random(shape[:-2] + (1, shape[-1])) < p_hit


def transmit_plc(S: np.ndarray, params: ChannelParams, rng, Es: float = 1.0) -> np.ndarray:
    """AWGN plus slot-gated impulse noise and optional narrowband interference.

    For a stack ``(..., T, M, M)`` the time axis runs over stage ``t`` and
    column ``j`` as slot ``t*M + j``; the interferer occupies row ``nbi_row``
    (1-based) for slots ``nbi_start .. nbi_start + nbi_slots - 1`` of every
    stack entry.
    """
    p = params.p_hit
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"impulse probability {p:.4g} outside [0, 1]")
    gen = _gen(rng)
    Y = transmit_awgn(S, params, gen, Es)
    shape = Y.shape
    hit = impulse_mask(shape, p, gen)
    Y = Y + _cn(gen, shape, params.Ni(Es)) * hit
    if params.nbi_row is not None and params.nbi_slots > 0:
        Y = _add_nbi(Y, params, gen, Es)
    return Y


def _add_nbi(Y: np.ndarray, params: ChannelParams, gen: np.random.Generator, Es: float) -> np.ndarray:
    M = Y.shape[-1]
    row = params.nbi_row - 1
    if not 0 <= row < Y.shape[-2]:
        raise ConfigError(f"nbi_row {params.nbi_row} outside 1..{Y.shape[-2]}")
    T = Y.shape[-3] if Y.ndim >= 3 else 1
    slots = np.arange(params.nbi_start, params.nbi_start + params.nbi_slots)
    slots = slots[slots < T * M]
    amp = math.sqrt(Es * 10 ** (params.nbi_power_db / 10))
    theta = gen.uniform(0.0, 2 * math.pi, Y.shape[:-3] + (len(slots),) if Y.ndim >= 3 else (len(slots),))
    Y = Y.copy()
    if Y.ndim >= 3:
        Y[..., slots // M, row, slots % M] += amp * np.exp(1j * theta)
    else:
        Y[row, slots] += amp * np.exp(1j * theta)
    return Y


def transmit(S: np.ndarray, params: ChannelParams, rng, Es: float = 1.0) -> np.ndarray:
    if params.kind == "none":
        return np.asarray(S, dtype=complex)
    if params.kind == "awgn":
        return transmit_awgn(S, params, rng, Es)
    return transmit_plc(S, params, rng, Es)


def ebno_to_esno(EbN0_dB: float, R_P: float, M: int) -> float:
    """Es/N0 (dB) from Eb/N0 (dB): Es/N0 = Eb/N0 * R_P * log2(M)."""
    if not 0 < R_P <= 1 or M < 2:
        raise ValueError("need 0 < R_P <= 1 and M >= 2")
    lin = 10 ** (EbN0_dB / 10) * R_P * math.log2(M)
    return 10 * math.log10(lin)
