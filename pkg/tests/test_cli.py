import json
import subprocess
import sys

import pytest

from clawgate.cli import build_parser, config_from_args, main
from clawgate.harness.samples import CHANNELS, STRESS_N, TELEGRAM


def _config(argv, monkeypatch=None, env=None):
    if monkeypatch is not None:
        for k, v in (env or {}).items():
            monkeypatch.setenv(k, v)
    return config_from_args(build_parser().parse_args(["run", *argv]))


def test_defaults(monkeypatch):
    for var in ("N", "SEED", "CHANNELS", "STRESS", "STATS_ONLY", "WIDENED_DLP", "DISABLE_WITNESS", "OUT_DIR"):
        monkeypatch.delenv("CLAWGATE_" + var, raising=False)
    cfg = _config([])
    assert cfg.n_per_cell == 100 and cfg.channels == list(CHANNELS)
    assert not (cfg.stats_only or cfg.widened_dlp or cfg.disable_witness)
    assert cfg.seed_string is None


def test_stress_shortcut(monkeypatch):
    cfg = _config(["--stress"])
    assert cfg.n_per_cell == STRESS_N and cfg.channels == [TELEGRAM]
    assert _config(["--stress", "--n", "7"]).n_per_cell == 7


def test_env_mirrors_flags_and_flag_wins(monkeypatch):
    env = {"CLAWGATE_N": "12", "CLAWGATE_SEED": "env-seed", "CLAWGATE_WIDENED_DLP": "1",
           "CLAWGATE_CHANNELS": "telegram-mock", "CLAWGATE_DISABLE_WITNESS": "true"}
    cfg = _config([], monkeypatch, env)
    assert (cfg.n_per_cell, cfg.seed_string, cfg.widened_dlp, cfg.channels, cfg.disable_witness) == (
        12, "env-seed", True, ["telegram-mock"], True
    )
    cfg = _config(["--n", "3", "--seed", "flag", "--no-widened-dlp"], monkeypatch, env)
    assert (cfg.n_per_cell, cfg.seed_string, cfg.widened_dlp) == (3, "flag", False)


def test_bad_values_exit_nonzero(capsys):
    with pytest.raises(SystemExit):
        main(["run", "--n", "0"])
    assert main(["run", "--channels", "irc-mock"]) == 2


def test_run_verify_scrub_catalog(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "--n", "3", "--seed", "cli", "--out-dir", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "| gated | all |" in printed and "seed: cli" in printed
    assert main(["verify", str(out / "audit-gated.jsonl")]) == 0
    lines = (out / "audit-gated.jsonl").read_bytes().split(b"\n")
    lines[2] = lines[2].replace(b'"ok":true', b'"ok":false', 1) if b'"ok":true' in lines[2] else lines[2][:-2] + b"0}"
    (out / "audit-gated.jsonl").write_bytes(b"\n".join(lines))
    assert main(["verify", str(out / "audit-gated.jsonl")]) == 1
    assert "tampered at record 2" in capsys.readouterr().out
    assert main(["scrub", str(out / "samples.csv")]) == 0
    assert capsys.readouterr().out.strip() == str(out / "samples.scrubbed.csv")
    assert main(["catalog"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 13


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "clawgate", "run", "--n", "1", "--seed", "m", "--out-dir", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr


def test_verify_witness_journal(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "--n", "2", "--seed", "wit", "--out-dir", str(out), "--subjects", "gated-witness"]) == 0
    report = (out / "report.md").read_text()
    key = next(ln for ln in report.splitlines() if ln.startswith("| gated-witness witness |")).split("|")[2].strip()
    journal = out / "witness.jsonl"
    capsys.readouterr()
    assert main(["verify", str(journal)]) == 1
    assert "--witness-key" in capsys.readouterr().out
    assert main(["verify", "--witness-key", key, str(journal)]) == 0
    assert "ok (" in capsys.readouterr().out
    data = bytearray(journal.read_bytes())
    data[data.index(b"telegram")] ^= 1
    journal.write_bytes(bytes(data))
    assert main(["verify", "--witness-key", key, str(journal)]) == 1
    assert "tampered at record 1" in capsys.readouterr().out
    assert main(["verify", "--witness-key", "zz", str(journal)]) == 2
