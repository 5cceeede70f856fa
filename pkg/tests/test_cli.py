"""End-to-end CLI behavior: exit codes, file outputs, determinism."""

import json

import pytest

from dnasim import TRIAL_COLUMNS, harness
from dnasim.cli import SCHEMA_VERSION, build_parser, main

TINY = """\
channel.num_molecules = 3
channel.alpha = 2.0
channel.beta = 2.1
inner.rate_b = 0.9
inner.p_b = 0.5
code.num_codewords = 4
code.seed = 3
decoder.tau = 0.2
campaign.trials = 400
campaign.seed = 606
"""

SMALL = """\
channel.num_molecules = 16
channel.alpha = 2.0
inner.rate_b = 1.25
inner.p_b = 0.1
code.num_codewords = 32
campaign.trials = 40
campaign.seed = 11
analysis.sigma_grid = 0.25, 0.5
analysis.kappa_grid = 0.15
analysis.theta_grid = 0.5
"""


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_simulate_writes_json_and_csvs(tmp_path, capsys):
    cfg = _cfg(tmp_path, SMALL)
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "pe=" in captured.out
    assert "wrote" in captured.out

    payload = json.loads((out / "simulate.json").read_text())
    assert payload["schema_version"] == SCHEMA_VERSION
    assert payload["command"] == "simulate"
    assert payload["summary"]["trials"] == 40
    assert payload["summary"]["counting_bounds_held"] is True
    # the bulky per-trial table goes to CSV only
    assert "trials" not in payload["tables"]
    assert "tails" in payload["tables"]

    trials_csv = (out / "simulate_trials.csv").read_text().splitlines()
    assert trials_csv[0] == ",".join(TRIAL_COLUMNS)
    assert len(trials_csv) == 1 + 40
    tails_csv = (out / "simulate_tails.csv").read_text().splitlines()
    assert tails_csv[0].startswith("event,level,empirical")
    assert len(tails_csv) == 1 + 4  # two sigma rows, one kappa, one theta


def test_simulate_is_byte_deterministic(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b)]) == 0
    for name in ("simulate.json", "simulate_trials.csv", "simulate_tails.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_cli_overrides_seed_and_trials(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    out = tmp_path / "out"
    rc = main(
        [
            "simulate",
            "--config",
            str(cfg),
            "--out",
            str(out),
            "--seed",
            "123",
            "--trials",
            "17",
        ]
    )
    assert rc == 0
    payload = json.loads((out / "simulate.json").read_text())
    assert payload["summary"]["trials"] == 17
    assert payload["summary"]["config"]["master_seed"] == 123
    rows = (out / "simulate_trials.csv").read_text().splitlines()
    assert len(rows) == 1 + 17


def test_format_selects_outputs(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    jdir, cdir = tmp_path / "j", tmp_path / "c"
    assert main(["simulate", "--config", str(cfg), "--out", str(jdir), "--format", "json"]) == 0
    assert (jdir / "simulate.json").exists()
    assert not list(jdir.glob("*.csv"))
    assert main(["simulate", "--config", str(cfg), "--out", str(cdir), "--format", "csv"]) == 0
    assert not (cdir / "simulate.json").exists()
    assert (cdir / "simulate_trials.csv").exists()


def test_oracle_reports_exact_value(tmp_path):
    cfg = _cfg(tmp_path, TINY)
    out = tmp_path / "out"
    rc = main(["oracle", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "oracle.json").read_text())
    s = payload["summary"]
    assert s["pe_exact"] == "20855839/45562500"
    assert s["pe_exact_float"] == pytest.approx(20855839 / 45562500, rel=1e-14)
    assert s["mc_trials"] == 400
    assert 0 <= s["pe_mc"] <= 1
    assert s["wilson_low"] < s["wilson_high"]
    # single table -> unsuffixed csv name
    assert (out / "oracle.csv").read_text().splitlines()[0] == "codeword,pe"


def test_oracle_skips_mc_when_trials_zero(tmp_path):
    cfg = _cfg(tmp_path, TINY + "campaign.workers = 0\n")
    out = tmp_path / "out"
    rc = main(
        ["oracle", "--config", str(cfg), "--out", str(out), "--trials", "0"]
    )
    # trials=0 would be rejected by the campaign but oracle treats it as "skip"
    assert rc == 0
    payload = json.loads((out / "oracle.json").read_text())
    assert "pe_mc" not in payload["summary"]


def test_bounds_command(tmp_path):
    out = tmp_path / "out"
    rc = main(["bounds", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "bounds.json").read_text())
    s = payload["summary"]
    assert s["regime"] == "theta"
    assert s["normalization"] == "per-M"
    assert s["zero_rate_exponent"] == pytest.approx(4.0)
    tab = payload["tables"]["bounds"]
    assert tab["columns"] == ["rate", "achievable", "branch", "random_coding", "expurgated"]
    assert len(tab["rows"]) == 21
    vals = [r[1] for r in tab["rows"]]
    assert vals[0] == pytest.approx(4.0)
    assert vals[-1] == pytest.approx(0.0, abs=1e-12)
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_bounds_omega_regime(tmp_path):
    cfg = _cfg(tmp_path, "analysis.regime = omega\nchannel.alpha = 16.0\n")
    out = tmp_path / "out"
    rc = main(["bounds", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "bounds.json").read_text())
    assert payload["summary"]["normalization"] == "per-N"
    # alpha=16, M=64, L=8: ratio = 2.0 < 4 gap = 3, expurgated column is null
    assert payload["summary"]["reads_per_nucleotide"] == pytest.approx(2.0)
    assert all(r[4] is None for r in payload["tables"]["bounds"]["rows"])


def test_capacity_gap_command(tmp_path):
    out = tmp_path / "out"
    rc = main(["capacity-gap", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "capacity_gap.json").read_text())
    tab = payload["tables"]["capacity_gap"]
    assert len(tab["rows"]) == 16  # 4 alphas x 4 crossovers
    by_key = {(r[0], r[1]): r[2] for r in tab["rows"]}
    assert by_key[(4.0, 0.11)] == pytest.approx(0.24159297486904407, rel=1e-10)
    assert payload["summary"]["max_gap_nats"] >= by_key[(4.0, 0.11)]
    csv_head = (out / "capacity_gap.csv").read_text().splitlines()[0]
    assert csv_head == "alpha,crossover,gap_nats,gap_bits,limit_nats,fraction_of_limit"


def test_sweep_command(tmp_path):
    cfg = _cfg(
        tmp_path,
        "channel.num_molecules = 16\n"
        "code.num_codewords = 32\n"
        "campaign.trials = 30\n"
        "sweep.alphas = 1.0, 4.0\n",
    )
    out = tmp_path / "out"
    rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "sweep.json").read_text())
    assert payload["summary"]["alphas"] == [1.0, 4.0]
    assert len(payload["summary"]["pe"]) == 2
    assert "pe_nonincreasing" in payload["summary"]
    rows = payload["tables"]["sweep"]["rows"]
    assert [r[0] for r in rows] == [1.0, 4.0]
    assert rows[0][1] == 16 and rows[1][1] == 64  # reads scale with alpha


def test_spectrum_command(tmp_path):
    cfg = _cfg(tmp_path, "channel.num_molecules = 16\ncode.num_codewords = 64\n")
    out = tmp_path / "out"
    rc = main(["spectrum", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "spectrum.json").read_text())
    tab = payload["tables"]["spectrum"]
    assert tab["columns"] == [
        "distance",
        "gamma",
        "pooled",
        "mean_count",
        "ensemble_mean",
        "chernoff",
    ]
    assert len(tab["rows"]) == 17
    assert sum(r[2] for r in tab["rows"]) == 64 * 63
    assert payload["summary"]["min_distance"] >= 0


def test_expurgate_command(tmp_path):
    cfg = _cfg(tmp_path, "channel.num_molecules = 16\ncode.num_codewords = 64\n")
    out = tmp_path / "out"
    rc = main(["expurgate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "expurgate.json").read_text())
    s = payload["summary"]
    assert s["kept"] + s["removed"] == 64
    assert s["max_log_slack"] <= 0.0
    assert (out / "expurgate_removed.csv").exists()
    assert (out / "expurgate_budget.csv").exists()
    budget = payload["tables"]["budget"]
    assert budget["columns"] == ["distance", "gamma", "log_threshold"]
    assert len(budget["rows"]) == 17


@pytest.mark.parametrize(
    "text",
    [
        "channel.bogus = 1\n",
        "channel.alpha = fast\n",
        "channel.alpha = 0.5\n",  # invalid geometry caught at build time
        "decoder.tau = 0.9\n",
    ],
)
def test_bad_config_exits_2(tmp_path, capsys, text):
    cfg = _cfg(tmp_path, text)
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    rc = main(["simulate", "--config", str(tmp_path / "nope.cfg")])
    assert rc == 2
    assert "config file not found" in capsys.readouterr().err


def test_oracle_on_oversized_instance_exits_2(tmp_path, capsys):
    # defaults are far beyond the exact enumeration caps
    rc = main(["oracle", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "capped at" in capsys.readouterr().err


def test_runtime_invariant_failure_exits_3(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise AssertionError("counting bounds violated at trial 7")

    monkeypatch.setattr(harness, "run_campaign", boom)
    cfg = _cfg(tmp_path, SMALL)
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "runtime invariant violated" in capsys.readouterr().err


def test_parser_rejects_bad_seed():
    ap = build_parser()
    with pytest.raises(SystemExit):
        ap.parse_args(["simulate", "--seed", "-1"])
    with pytest.raises(SystemExit):
        ap.parse_args(["simulate", "--seed", str(1 << 64)])
    with pytest.raises(SystemExit):
        ap.parse_args(["unknown-command"])


def test_out_directory_is_created(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    nested = tmp_path / "deep" / "dir"
    assert main(["simulate", "--config", str(cfg), "--out", str(nested)]) == 0
    assert (nested / "simulate.json").exists()
