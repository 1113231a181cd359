"""Feed-forward convolutional codes: trellis construction, encoding and Viterbi decoding.

Bit conventions used throughout the package:

* Octal generators are right-aligned integers. For an input whose register holds
  ``L`` taps, bit ``L-1`` (the most significant) connects the current input and
  bit 0 the oldest delayed input, so ``(7 5)`` expands to ``[1 1 1]`` and
  ``[1 0 1]``.
* A state is the concatenation of the per-input memories, each written most
  recent bit first; for ``k = 1`` the state ``10`` (integer 2) means the last
  input was 1.
* An ``n``-bit branch label is stored as an integer with output 1 as its most
  significant bit, so label ``0b10`` is the tuple ``(1, 0)``.
* The ``k`` input bits of one step are consumed in message order and packed the
  same way (first bit most significant).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .counters import OpCounter


class ConfigError(ValueError):
    """Malformed code, codebook or channel configuration."""


@dataclass(frozen=True)
class ConvCodeSpec:
    k: int
    n: int
    K: int
    generators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ConfigError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.K < self.k:
            raise ConfigError(f"constraint length K={self.K} smaller than k={self.k}")
        gens = tuple(tuple(int(g) for g in row) for row in self.generators)
        object.__setattr__(self, "generators", gens)
        if len(gens) != self.k or any(len(row) != self.n for row in gens):
            raise ConfigError(f"generator grid must be {self.k}x{self.n}")
        for i, row in enumerate(gens):
            width = self.memory[i] + 1
            for g in row:
                if g < 0 or g.bit_length() > min(width, self.K):
                    raise ConfigError(
                        f"generator {g:o} (octal) has more than {width} taps for input {i + 1}"
                    )

    @property
    def memory(self) -> tuple[int, ...]:
        """Per-input register memory; the K-k delays are spread evenly, earlier inputs first."""
        m = self.K - self.k
        return tuple(m // self.k + (1 if i < m % self.k else 0) for i in range(self.k))

    @property
    def num_states(self) -> int:
        return 1 << (self.K - self.k)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def from_octal(cls, k: int, n: int, K: int, text: str) -> "ConvCodeSpec":
        return cls(k, n, K, parse_generators(text))


def parse_generators(text: str) -> tuple[tuple[int, ...], ...]:
    """Parse ``"7 5"`` or ``"1 3 0; 3 2 3"`` into rows of integer tap vectors."""
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip().replace(",", " ")
        if not chunk:
            continue
        try:
            rows.append(tuple(int(tok, 8) for tok in chunk.split()))
        except ValueError as exc:
            raise ConfigError(f"bad octal generator in {text!r}") from exc
    if not rows:
        raise ConfigError("empty generator specification")
    return tuple(rows)


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True, eq=False)
class Trellis:
    spec: ConvCodeSpec
    next_state: np.ndarray  # (S, 2^k)
    output: np.ndarray  # (S, 2^k) label integers
    pred_state: np.ndarray = field(repr=False)  # (S, 2^k), sorted by (state, input)
    pred_input: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def num_labels(self) -> int:
        return 1 << self.spec.n

    @property
    def flush_steps(self) -> int:
        """Zero-input steps that drive any state back to state 0."""
        return max(self.spec.memory, default=0)


def build_trellis(spec: ConvCodeSpec) -> Trellis:
    k, n = spec.k, spec.n
    mem = spec.memory
    S = spec.num_states
    nxt = np.zeros((S, 1 << k), dtype=np.int64)
    out = np.zeros((S, 1 << k), dtype=np.int64)
    # bit offset of each input's memory inside the state word (input 0 highest)
    offsets = [sum(mem[i + 1:]) for i in range(k)]
    for s in range(S):
        regs_mem = [(s >> offsets[i]) & ((1 << mem[i]) - 1) for i in range(k)]
        for u in range(1 << k):
            bits = [(u >> (k - 1 - i)) & 1 for i in range(k)]
            regs = [(bits[i] << mem[i]) | regs_mem[i] for i in range(k)]
            label = 0
            for j in range(n):
                o = 0
                for i in range(k):
                    o ^= _parity(regs[i] & spec.generators[i][j])
                label = (label << 1) | o
            ns = 0
            for i in range(k):
                ns |= (regs[i] >> 1) << offsets[i]
            nxt[s, u] = ns
            out[s, u] = label
    pairs = sorted((int(nxt[s, u]), s, u) for s in range(S) for u in range(1 << k))
    pred_s = np.zeros((S, 1 << k), dtype=np.int64)
    pred_u = np.zeros((S, 1 << k), dtype=np.int64)
    fill = [0] * S
    for ns, s, u in pairs:
        if fill[ns] >= 1 << k:
            raise ConfigError("trellis has a state with too many incoming branches")
        pred_s[ns, fill[ns]] = s
        pred_u[ns, fill[ns]] = u
        fill[ns] += 1
    if any(f != 1 << k for f in fill):
        raise ConfigError("trellis is not regular; check the generators")
    return Trellis(spec, nxt, out, pred_s, pred_u)


def label_bits(label: int, n: int) -> tuple[int, ...]:
    return tuple((label >> (n - 1 - j)) & 1 for j in range(n))


def bits_to_label(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def _inputs(trellis: Trellis, message: np.ndarray) -> np.ndarray:
    k = trellis.k
    if message.shape[-1] % k:
        raise ValueError(f"message length {message.shape[-1]} is not a multiple of k={k}")
    steps = message.reshape(message.shape[:-1] + (-1, k)).astype(np.int64)
    weights = 1 << np.arange(k - 1, -1, -1)
    return steps @ weights


def encode_labels(trellis: Trellis, message) -> np.ndarray:
    """Branch labels (one integer per step) for a message or a batch of messages."""
    msg = np.asarray(message, dtype=np.int64)
    u = _inputs(trellis, msg)
    T = u.shape[-1]
    state = np.zeros(u.shape[:-1], dtype=np.int64)
    labels = np.empty(u.shape, dtype=np.int64)
    for t in range(T):
        ut = u[..., t]
        labels[..., t] = trellis.output[state, ut]
        state = trellis.next_state[state, ut]
    return labels


def encode(trellis: Trellis, message) -> np.ndarray:
    """Encode from the all-zero state; no flush bits are appended."""
    labels = encode_labels(trellis, message)
    n = trellis.n
    shifts = np.arange(n - 1, -1, -1)
    bits = (labels[..., None] >> shifts) & 1
    return bits.reshape(labels.shape[:-1] + (-1,)).astype(np.uint8)


def viterbi_decode(
    trellis: Trellis,
    stage_metrics,
    *,
    terminated: bool = False,
    return_metric: bool = False,
    counter: OpCounter | None = None,
):
    """Minimum-metric path through the trellis.

    ``stage_metrics`` has shape ``(T, 2^n)`` or ``(B, T, 2^n)``: the metric of
    every branch label at every stage. Decoding starts in state 0 and, when
    ``terminated``, also ends there. Survivor ties go to the lowest-numbered
    predecessor state.
    """
    bm = np.asarray(stage_metrics, dtype=float)
    single = bm.ndim == 2
    if single:
        bm = bm[None]
    if bm.ndim != 3 or bm.shape[2] != trellis.num_labels:
        raise ValueError(
            f"stage metrics must have {trellis.num_labels} label columns, got shape {np.shape(stage_metrics)}"
        )
    if np.isnan(bm).any() or (bm < 0).any():
        raise ValueError("branch metrics must be non-negative numbers")
    B, T, _ = bm.shape
    S = trellis.num_states
    ps, pu = trellis.pred_state, trellis.pred_input
    plabel = trellis.output[ps, pu]  # (S, 2^k)

    pm = np.full((B, S), np.inf)
    pm[:, 0] = 0.0
    choice = np.empty((B, T, S), dtype=np.int16)
    for t in range(T):
        cand = pm[:, ps] + bm[:, t, :][:, plabel]  # (B, S, 2^k)
        idx = np.argmin(cand, axis=2)
        choice[:, t, :] = idx
        pm = np.take_along_axis(cand, idx[..., None], axis=2)[..., 0]
    if counter is not None:
        counter.viterbi += B * T * S * ps.shape[1]

    if terminated:
        state = np.zeros(B, dtype=np.int64)
    else:
        state = np.argmin(pm, axis=1)
    total = pm[np.arange(B), state]
    k = trellis.k
    inputs = np.empty((B, T), dtype=np.int64)
    rows = np.arange(B)
    for t in range(T - 1, -1, -1):
        c = choice[rows, t, state]
        inputs[:, t] = pu[state, c]
        state = ps[state, c]
    shifts = np.arange(k - 1, -1, -1)
    bits = ((inputs[..., None] >> shifts) & 1).reshape(B, T * k).astype(np.uint8)
    if single:
        bits, total = bits[0], float(total[0])
    if return_metric:
        return bits, total
    return bits


def _label_distance_table(trellis: Trellis, label_distance) -> np.ndarray:
    L = trellis.num_labels
    if label_distance is None:
        lab = np.arange(L)
        x = lab[:, None] ^ lab[None, :]
        return np.array([[bin(int(v)).count("1") for v in row] for row in x])
    if callable(label_distance):
        return np.array([[label_distance(a, b) for b in range(L)] for a in range(L)])
    table = np.asarray(label_distance)
    if table.shape != (L, L):
        raise ValueError(f"label distance table must be {L}x{L}")
    return table


def free_distance(trellis: Trellis, label_distance: Callable[[int, int], int] | np.ndarray | None = None) -> int:
    """Smallest distance of a path leaving state 0 and first re-merging with it.

    ``label_distance`` maps two branch labels to a distance (callable or a
    ``2^n x 2^n`` table); the default is binary Hamming distance.
    """
    D = _label_distance_table(trellis, label_distance)
    zero = int(trellis.output[0, 0])
    S = trellis.num_states
    best = [float("inf")] * S
    heap: list[tuple[float, int, int]] = []
    merged = float("inf")
    for u in range(1, 1 << trellis.k):
        ns = int(trellis.next_state[0, u])
        d = float(D[trellis.output[0, u], zero])
        if ns == 0:
            merged = min(merged, d)
        elif d < best[ns]:
            best[ns] = d
            heapq.heappush(heap, (d, ns, u))
    while heap:
        d, s, _ = heapq.heappop(heap)
        if d > best[s] or d >= merged:
            continue
        for u in range(1 << trellis.k):
            ns = int(trellis.next_state[s, u])
            nd = d + float(D[trellis.output[s, u], zero])
            if ns == 0:
                merged = min(merged, nd)
            elif nd < best[ns]:
                best[ns] = nd
                heapq.heappush(heap, (nd, ns, u))
    if merged == float("inf"):
        raise RuntimeError("no path re-merges with the all-zero state")
    return int(merged) if float(merged).is_integer() else merged


@dataclass
class DistanceSpectrum:
    """Counts of first-merge error events by accumulated distance."""

    counts: dict[int, int]
    info_weights: dict[int, int]
    complete: bool
    max_distance: int

    @property
    def dfree(self) -> int:
        return min(d for d, c in self.counts.items() if c > 0)


def distance_spectrum(
    trellis: Trellis,
    label_distance=None,
    max_distance: int | None = None,
    max_length: int = 200,
) -> DistanceSpectrum:
    """Enumerate error events (diverge from state 0, first re-merge) up to ``max_distance``.

    Returns the number of events ``a_d`` and their total information weight
    ``B_d`` for each distance. ``complete`` is False when events of length
    ``max_length`` were still alive, which happens for catastrophic codes.
    """
    D = _label_distance_table(trellis, label_distance).astype(np.int64)
    zero = int(trellis.output[0, 0])
    if max_distance is None:
        max_distance = free_distance(trellis, D) + 10
    S, U = trellis.num_states, 1 << trellis.k
    W = max_distance + 1
    uw = np.array([bin(u).count("1") for u in range(U)], dtype=np.int64)
    step_d = D[trellis.output, zero]  # (S, U)

    cnt = np.zeros((S, W), dtype=object)
    wt = np.zeros((S, W), dtype=object)
    counts = np.zeros(W, dtype=object)
    weights = np.zeros(W, dtype=object)

    def advance(src_cnt, src_wt, states, inputs_):
        new_c = np.zeros((S, W), dtype=object)
        new_w = np.zeros((S, W), dtype=object)
        for s in states:
            if not src_cnt[s].any():
                continue
            for u in inputs_(s):
                ns = int(trellis.next_state[s, u])
                d = int(step_d[s, u])
                if d > max_distance:
                    continue
                c = np.zeros(W, dtype=object)
                w = np.zeros(W, dtype=object)
                c[d:] = src_cnt[s][: W - d]
                w[d:] = src_wt[s][: W - d] + uw[u] * src_cnt[s][: W - d]
                if ns == 0:
                    counts[:] += c
                    weights[:] += w
                else:
                    new_c[ns] += c
                    new_w[ns] += w
        return new_c, new_w

    start_c = np.zeros((S, W), dtype=object)
    start_w = np.zeros((S, W), dtype=object)
    start_c[0, 0] = 1
    cnt, wt = advance(start_c, start_w, [0], lambda s: range(1, U))
    complete = True
    for _ in range(max_length):
        if not any(cnt[s].any() for s in range(S)):
            break
        cnt, wt = advance(cnt, wt, range(1, S), lambda s: range(U))
    else:
        complete = not any(cnt[s].any() for s in range(S))
    return DistanceSpectrum(
        counts={d: int(counts[d]) for d in range(W) if counts[d]},
        info_weights={d: int(weights[d]) for d in range(W) if counts[d]},
        complete=complete,
        max_distance=max_distance,
    )
