import math

import numpy as np
import pytest

from ptc.convcode import ConfigError
from ptc.harness import (
    CSV_HEADER,
    BerRecord,
    config_from_kv,
    counters_report,
    ebno_at_ber,
    fit_exponent,
    load_config,
    parse_schemes,
    parse_snr,
    read_csv,
    read_kv,
    records_to_csv,
    run_sweep,
    solver_scaling,
    write_csv,
)


def small(**kv):
    base = {"code": "r23-m4", "channel": "awgn", "scheme": "hd-td s3", "snr": "2:4:1",
            "max_bits": "3000", "blocks_per_batch": "10", "record_time": "false"}
    base.update(kv)
    return config_from_kv(base)


def test_parse_snr():
    assert parse_snr("0:2:0.5") == (0.0, 0.5, 1.0, 1.5, 2.0)
    assert parse_snr("1, 3 5") == (1.0, 3.0, 5.0)
    with pytest.raises(ConfigError):
        parse_snr("0:1:0")


def test_parse_schemes():
    s = parse_schemes("hd-td s1 s1:1", 4, "soft")
    assert [x.label for x in s] == ["hd-td", "s1-g4", "s1-g1"]
    with pytest.raises(ConfigError):
        parse_schemes("  ", 1, "soft")


def test_read_kv():
    assert read_kv("a = 1  # note\n\n# c\nb=x y\n") == {"a": "1", "b": "x y"}
    with pytest.raises(ConfigError, match="line 2"):
        read_kv("a = 1\noops\n")


def test_config_defaults():
    cfg = config_from_kv({"code": "r14-m4", "channel": "plc"})
    assert cfg.schemes[0].input_mode == "hard"
    assert config_from_kv({"code": "r14-m4"}).schemes[0].input_mode == "soft"
    assert config_from_kv({"code": "r23-m4", "scheme": "s1"}).schemes[0].g_max == 8
    assert cfg.max_bits == 10_000_000 and cfg.target_errors == 100


def test_config_errors():
    with pytest.raises(ConfigError, match="unknown config keys"):
        config_from_kv({"code": "r12-m3", "bogus": "1"})
    with pytest.raises(ConfigError):
        config_from_kv({"code": "nope"})
    with pytest.raises(ConfigError):
        config_from_kv({"k": "1", "n": "2"})
    with pytest.raises(ConfigError):
        config_from_kv({"code": "r12-m3", "snr": "3 2"})
    with pytest.raises(ConfigError):
        run_sweep(config_from_kv({"code": "r12-m3", "codebook": "table1-m4", "snr": "1"}))


def test_explicit_code_keys():
    cfg = config_from_kv({"k": "1", "n": "2", "K": "3", "generators": "7 5", "codebook": "table1-m3"})
    assert cfg.code.generators == ((7, 5),)


@pytest.mark.parametrize("name", ["awgn_r12_m3", "plc_r23_m4", "plc_r14_m4"])
def test_builtin_recipes_load(name):
    cfg = load_config(name, snr="5")
    assert cfg.ebno_db == (5.0,)
    assert cfg.book().n == cfg.code.n


def test_noiseless_channel_has_no_errors():
    recs = run_sweep(small(channel="none", scheme="hd-ed hd-td s1 s2 s3 s4 od1 od2"))
    assert all(r.bit_errors == 0 and r.bits >= 3000 for r in recs)


def test_csv_roundtrip(tmp_path):
    recs = run_sweep(small())
    path = tmp_path / "out.csv"
    write_csv(recs, path, record_time=False)
    text = path.read_text()
    assert text.splitlines()[0] == CSV_HEADER
    rows = read_csv(path)
    assert [r["scheme"] for r in rows] == ["hd-td"] * 3 + ["s3"] * 3
    assert all(r["ber"] == pytest.approx(r["bit_errors"] / r["bits"], rel=1e-6) for r in rows)
    assert all(r["wall_s"] == 0 for r in rows)


def test_same_seed_same_bytes():
    a = records_to_csv(run_sweep(small()), record_time=False)
    b = records_to_csv(run_sweep(small()), record_time=False)
    c = records_to_csv(run_sweep(small(seed="2")), record_time=False)
    assert a == b and a != c


def test_workers_do_not_change_output():
    cfg = small()
    assert records_to_csv(run_sweep(cfg, workers=2), False) == records_to_csv(run_sweep(cfg), False)


def test_stopping_rule():
    cfg = small(snr="0", max_bits="1000000", target_errors="50", scheme="hd-td")
    rec = run_sweep(cfg)[0]
    assert rec.bit_errors >= 50 and rec.bits < 1_000_000


def test_ber_record():
    r = BerRecord("s1", 3.0, 1000, 10)
    assert r.ber == 0.01
    assert r.sigma() == pytest.approx(math.sqrt(0.01 * 0.99 / 1000))
    assert math.isnan(BerRecord("s1", 3.0, 0, 0).ber)


def test_ebno_at_ber():
    assert ebno_at_ber([0, 1, 2], [1e-1, 1e-2, 1e-4], 1e-3) == pytest.approx(1.5)
    assert math.isnan(ebno_at_ber([0, 1], [1e-1, 1e-2], 1e-3))


def test_counters_report_per_block():
    recs = run_sweep(small(scheme="hd-td", snr="3"))
    rep = counters_report(recs)["hd-td"]
    stages = 120 // 2 + 1  # message steps plus one flush step
    assert rep["demod"] == 16 * stages  # M^2 per matrix
    assert rep["compare"] == 8 * 16 * stages  # 2^n * M^2 per matrix


def test_solver_growth():
    res = solver_scaling((4, 8, 16), trials=8, seed=1)
    ratio = res["hungarian"][16] / res["hungarian"][8]
    assert 4 <= ratio <= 12  # cubic growth predicts 8
    assert fit_exponent([4, 8, 16], [res["bb"][m] for m in (4, 8, 16)]) == pytest.approx(3, abs=0.5)
    assert fit_exponent([1, 2, 4], [1, 8, 64]) == pytest.approx(3)
