"""Monte Carlo BER sweeps over schemes and SNR points.

Randomness: batch ``b`` of the point at ``Eb/N0 = x`` draws its messages and
channel from ``Philox(SeedSequence(seed, spawn_key=(round(1000 x) + 10**6, b)))``.
The stream does not depend on the scheme, so all schemes at a point see the
same messages and noise (common random numbers), and it does not depend on
worker count or scheduling. A point stops after the first batch at which the
error target or the bit budget is reached.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelParams, RngStream, ebno_to_esno, transmit
from .convcode import ConfigError, ConvCodeSpec, Trellis, build_trellis, encode_labels
from .counters import OpCounter
from .modem import modulate
from .permmap import Codebook, load_codebook
from .schemes import SchemeConfig, decode_blocks

CSV_HEADER = "scheme,ebno_db,bits,bit_errors,ber,solver_ops,demap_ops,viterbi_ops,wall_s"

# the three code configurations: (k, n, K, octal generators, codebook)
CODES = {
    "r12-m3": (1, 2, 3, "7 5", "table1-m3"),
    "r23-m4": (2, 3, 4, "1 3 0; 3 2 3", "table1-m4"),
    "r14-m4": (1, 4, 6, "53 67 71 75", "dpm-m4"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    code: ConvCodeSpec
    codebook: str
    channel: ChannelParams
    schemes: tuple[SchemeConfig, ...]
    ebno_db: tuple[float, ...]
    seed: int = 1
    block_bits: int = 120
    blocks_per_batch: int = 50
    target_errors: int = 100
    max_bits: int = 10_000_000
    Es: float = 1.0
    out: str | None = None
    record_time: bool = True

    def __post_init__(self):
        if not self.ebno_db:
            raise ConfigError("empty Eb/N0 grid")
        if any(b <= a for a, b in zip(self.ebno_db, self.ebno_db[1:])):
            raise ConfigError("Eb/N0 grid must be strictly increasing")
        if self.block_bits % self.code.k:
            raise ConfigError(f"block_bits={self.block_bits} is not a multiple of k={self.code.k}")
        if self.target_errors < 1 or self.max_bits < 1:
            raise ConfigError("target_errors and max_bits must be positive")

    def book(self) -> Codebook:
        return load_codebook(self.codebook)


@dataclass
class BerRecord:
    scheme: str
    ebno_db: float
    bits: int
    bit_errors: int
    counters: OpCounter = field(default_factory=OpCounter)
    blocks: int = 0
    wall_s: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else float("nan")

    def sigma(self) -> float:
        """Binomial standard error of the BER estimate."""
        p = self.ber
        return math.sqrt(max(p * (1 - p), 0.0) / self.bits) if self.bits else float("nan")

    def csv_row(self, record_time: bool = True) -> str:
        c = self.counters
        wall = f"{self.wall_s:.3f}" if record_time else "0"
        return (f"{self.scheme},{self.ebno_db:g},{self.bits},{self.bit_errors},{self.ber:.6e},"
                f"{c.solver},{c.demod + c.compare + c.demap},{c.viterbi},{wall}")


def snr_key(ebno_db: float) -> int:
    return int(round(ebno_db * 1000)) + 1_000_000


def parse_snr(text: str) -> tuple[float, ...]:
    """``"a:b:step"`` (inclusive of b) or a comma/space separated list."""
    text = text.strip()
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ConfigError("snr step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(round(a + i * step, 6) for i in range(count))
    return tuple(float(x) for x in text.replace(",", " ").split())


def parse_schemes(text: str, g_max: int, input_mode: str, random_ties: bool = False) -> tuple[SchemeConfig, ...]:
    """``"hd-td, s1, s1:1, s2"``; a ``:g`` suffix overrides g_max for that entry."""
    out = []
    for tok in text.replace(",", " ").split():
        name, _, g = tok.partition(":")
        out.append(SchemeConfig(name.lower(), int(g) if g else g_max, input_mode, random_ties))
    if not out:
        raise ConfigError("no schemes given")
    return tuple(out)


def read_kv(text: str) -> dict[str, str]:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        kv[key] = value
    return kv


def builtin_config_path(name: str) -> Path | None:
    res = resources.files("ptc").joinpath("data", "configs", f"{name}.cfg")
    return Path(str(res)) if res.is_file() else None


def config_from_kv(kv: dict[str, str]) -> ExperimentConfig:
    kv = dict(kv)
    known = {"code", "k", "n", "K", "generators", "codebook", "channel", "A", "gamma", "t_noise",
             "sample_rate", "nbi_row", "nbi_slots", "nbi_start", "nbi_power_db", "seed", "scheme",
             "g_max", "input_mode", "random_ties", "snr", "block_bits", "blocks_per_batch",
             "target_errors", "max_bits", "out", "record_time", "Es"}
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    preset = CODES.get(kv.get("code", ""), None)
    if "code" in kv and preset is None:
        raise ConfigError(f"unknown code preset {kv['code']!r}; choose from {', '.join(CODES)}")
    if preset:
        k, n, K, gens, book = preset
    else:
        try:
            k, n, K, gens = int(kv["k"]), int(kv["n"]), int(kv["K"]), kv["generators"]
        except KeyError as exc:
            raise ConfigError(f"missing code key {exc.args[0]!r} (or give code = <preset>)") from None
        book = None
    k, n, K = int(kv.get("k", k)), int(kv.get("n", n)), int(kv.get("K", K))
    spec = ConvCodeSpec.from_octal(k, n, K, kv.get("generators", gens))
    book = kv.get("codebook", book)
    if book is None:
        raise ConfigError("missing codebook")
    kind = kv.get("channel", "awgn").lower()
    nbi_row = kv.get("nbi_row")
    channel = ChannelParams(
        kind=kind,
        A=float(kv.get("A", 0.1)),
        gamma=float(kv.get("gamma", ChannelParams.gamma)),
        t_noise=float(kv.get("t_noise", ChannelParams.t_noise)),
        sample_rate=float(kv["sample_rate"]) if "sample_rate" in kv else None,
        nbi_row=int(nbi_row) if nbi_row not in (None, "", "none") else None,
        nbi_slots=int(kv.get("nbi_slots", 0)),
        nbi_start=int(kv.get("nbi_start", 0)),
        nbi_power_db=float(kv.get("nbi_power_db", 10.0)),
    )
    mode = kv.get("input_mode", "auto").lower()
    if mode == "auto":
        mode = "hard" if kind == "plc" else "soft"
    schemes = parse_schemes(kv.get("scheme", "hd-td"), int(kv.get("g_max", 1 << n)), mode,
                            _bool(kv.get("random_ties", "false")))
    return ExperimentConfig(
        code=spec,
        codebook=book,
        channel=channel,
        schemes=schemes,
        ebno_db=parse_snr(kv.get("snr", "0:10:1")),
        seed=int(kv.get("seed", 1)),
        block_bits=int(kv.get("block_bits", 120)),
        blocks_per_batch=int(kv.get("blocks_per_batch", 50)),
        target_errors=int(kv.get("target_errors", 100)),
        max_bits=int(float(kv.get("max_bits", 1e7))),
        Es=float(kv.get("Es", 1.0)),
        out=kv.get("out"),
        record_time=_bool(kv.get("record_time", "true")),
    )


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def load_config(ref: str | Path, **overrides) -> ExperimentConfig:
    """Read a config file (or a built-in recipe name) and apply key overrides."""
    path = Path(ref)
    if not path.is_file():
        builtin = builtin_config_path(str(ref))
        if builtin is None:
            raise ConfigError(f"no config file or built-in recipe named {ref!r}")
        path = builtin
    kv = read_kv(path.read_text())
    kv.update({k: str(v) for k, v in overrides.items() if v is not None})
    return config_from_kv(kv)


def simulate_batch(trellis: Trellis, book: Codebook, cfg: ExperimentConfig, scheme: SchemeConfig,
                   ebno_db: float, batch: int, counter: OpCounter) -> tuple[int, int]:
    """Run one batch; returns (message bits, bit errors)."""
    stream = RngStream(cfg.seed, (snr_key(ebno_db), batch))
    gen = stream.generator()
    B, L = cfg.blocks_per_batch, cfg.block_bits
    msg = gen.integers(0, 2, (B, L), dtype=np.int64)
    flush = np.zeros((B, trellis.flush_steps * trellis.k), dtype=np.int64)
    labels = encode_labels(trellis, np.concatenate([msg, flush], axis=1))
    S = modulate(book.by_label[labels], cfg.Es)
    R_P = trellis.k / book.M
    params = replace(cfg.channel, EsN0_dB=ebno_to_esno(ebno_db, R_P, book.M))
    Y = transmit(S, params, gen, cfg.Es)
    tie_rng = stream.child(1).generator() if scheme.random_ties else None
    bits = decode_blocks(Y, trellis, book, scheme, cfg.Es, terminated=True, counter=counter, rng=tie_rng)
    errors = int((bits[:, :L] != msg).sum())
    return B * L, errors


def simulate_point(cfg: ExperimentConfig, scheme: SchemeConfig, ebno_db: float,
                   trellis: Trellis | None = None, book: Codebook | None = None) -> BerRecord:
    trellis = trellis or build_trellis(cfg.code)
    book = book or cfg.book()
    rec = BerRecord(scheme.label, ebno_db, 0, 0)
    t0 = time.perf_counter()
    batch = 0
    while rec.bit_errors < cfg.target_errors and rec.bits < cfg.max_bits:
        nbits, nerr = simulate_batch(trellis, book, cfg, scheme, ebno_db, batch, rec.counters)
        rec.bits += nbits
        rec.bit_errors += nerr
        rec.blocks += cfg.blocks_per_batch
        batch += 1
    rec.wall_s = time.perf_counter() - t0
    return rec


def _job(args):
    cfg, scheme, ebno = args
    return simulate_point(cfg, scheme, ebno)


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[BerRecord]:
    """Simulate every (scheme, Eb/N0) point; records come back in scheme-major grid order."""
    trellis = build_trellis(cfg.code)
    book = cfg.book()
    if trellis.n != book.n:
        raise ConfigError(f"code emits n={trellis.n} bits but codebook {cfg.codebook!r} maps n={book.n}")
    jobs = [(cfg, s, x) for s in cfg.schemes for x in cfg.ebno_db]
    if workers <= 1:
        return [simulate_point(cfg, s, x, trellis, book) for _, s, x in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs))


def records_to_csv(records: Iterable[BerRecord], record_time: bool = True) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        buf.write(r.csv_row(record_time) + "\n")
    return buf.getvalue()


def write_csv(records: Sequence[BerRecord], path: str | Path, record_time: bool = True) -> None:
    Path(path).write_text(records_to_csv(records, record_time))


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for key in ("ebno_db", "ber", "wall_s"):
            r[key] = float(r[key])
        for key in ("bits", "bit_errors", "solver_ops", "demap_ops", "viterbi_ops"):
            r[key] = int(r[key])
    return rows


def ebno_at_ber(ebno: Sequence[float], ber: Sequence[float], target: float = 1e-3) -> float:
    """Eb/N0 where the curve crosses ``target``, by linear interpolation of log10(BER).

    Uses the first downward crossing; returns ``nan`` when the curve never
    brackets the target.
    """
    x = np.asarray(ebno, dtype=float)
    y = np.asarray(ber, dtype=float)
    lt = np.log10(target)
    for i in range(len(x) - 1):
        y0, y1 = y[i], y[i + 1]
        if y0 >= target > y1 or (y0 > target >= y1):
            if y1 <= 0:
                return float(x[i + 1])
            l0, l1 = np.log10(y0), np.log10(y1)
            return float(x[i] + (lt - l0) * (x[i + 1] - x[i]) / (l1 - l0))
    return float("nan")


def group_by_scheme(records: Iterable[BerRecord]) -> dict[str, list[BerRecord]]:
    out: dict[str, list[BerRecord]] = {}
    for r in records:
        out.setdefault(r.scheme, []).append(r)
    return out


def counters_report(records: Iterable[BerRecord]) -> dict[str, dict[str, float]]:
    """Mean elementary-operation counts per decoded block, per scheme."""
    out: dict[str, dict[str, float]] = {}
    for scheme, recs in group_by_scheme(records).items():
        blocks = sum(r.blocks for r in recs)
        total = OpCounter()
        for r in recs:
            total.add(r.counters)
        out[scheme] = {"blocks": blocks, **{k: v / blocks if blocks else float("nan")
                                           for k, v in total.as_dict().items()}}
    return out


def fit_exponent(sizes: Sequence[float], counts: Sequence[float]) -> float:
    """Slope of log(count) against log(size): the empirical growth order."""
    return float(np.polyfit(np.log(sizes), np.log(counts), 1)[0])


def solver_scaling(sizes: Sequence[int] = (4, 8, 16, 32), trials: int = 20, murty_k: int = 4,
                   seed: int = 0) -> dict[str, dict[int, float]]:
    """Mean solver operation counts on uniform random cost matrices of each size.

    ``murty`` is the work per additional ranked solution beyond the first.
    """
    from .assign import branch_and_bound, hungarian, murty_kbest

    gen = np.random.Generator(np.random.Philox(seed))
    res: dict[str, dict[int, float]] = {"hungarian": {}, "murty": {}, "bb": {}}
    for M in sizes:
        h = m = b = 0
        for _ in range(trials):
            C = gen.random((M, M))
            c1, c2, c3 = OpCounter(), OpCounter(), OpCounter()
            hungarian(C, c1)
            murty_kbest(C, murty_k, c2)
            branch_and_bound(C, c3)
            h += c1.solver
            m += (c2.solver - c1.solver) / (murty_k - 1)
            b += c3.solver
        res["hungarian"][M] = h / trials
        res["murty"][M] = m / trials
        res["bb"][M] = b / trials
    return res
