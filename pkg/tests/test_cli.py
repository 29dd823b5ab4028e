import csv

import pytest

from ocdmsim.cli import _parse_ebn0, main
from ocdmsim.harness import ConfigError

DESK_CFG = """\
n_symbols_per_block = 64
n_blocks = 2
nfft = 128
cp_samples = 32
sampling_rate_hz = 5760000.0
"""


@pytest.fixture
def desk_cfg_file(tmp_path):
    path = tmp_path / "desk.cfg"
    path.write_text(DESK_CFG)
    return str(path)


def test_parse_ebn0_forms():
    assert _parse_ebn0("6") == (6.0,)
    assert _parse_ebn0("4:1:8") == (4.0, 5.0, 6.0, 7.0, 8.0)
    assert _parse_ebn0("0:0.5:1") == (0.0, 0.5, 1.0)
    for bad in ("8:1:4", "1:2", "a:b:c", "4:0:8", ""):
        with pytest.raises(ConfigError):
            _parse_ebn0(bad)


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") >= 10


def test_run_writes_csv(tmp_path, desk_cfg_file, capsys):
    out = tmp_path / "r.csv"
    code = main(
        [
            "run",
            "--config",
            desk_cfg_file,
            "--ebn0",
            "30",
            "--frames",
            "3",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2
    assert rows[1][0] == "ocdm"
    assert int(rows[1][4]) == 3
    assert rows[1][-1] == "5"
    assert "wrote 1 points" in capsys.readouterr().out


def test_run_overrides(tmp_path, desk_cfg_file):
    out = tmp_path / "r.csv"
    code = main(
        [
            "run",
            "--config",
            desk_cfg_file,
            "--ebn0",
            "30",
            "--frames",
            "2",
            "--waveform",
            "dftp",
            "--mod",
            "16qam",
            "--equalizer",
            "full",
            "--iters",
            "2",
            "--stop",
            "none",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[1][0] == "dftp" and rows[1][1] == "16qam" and rows[1][2] == "full"


def test_run_missing_config_exits_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.cfg"), "--ebn0", "30"]) == 2


def test_run_bad_config_key_exits_2(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("bogus = 1\n")
    assert main(["run", "--config", str(path), "--ebn0", "30"]) == 2


def test_run_bad_ebn0_exits_2(desk_cfg_file):
    assert main(["run", "--config", desk_cfg_file, "--ebn0", "9:1:4"]) == 2


def test_run_inconsistent_override_exits_2(desk_cfg_file):
    # per-bin equalizer on a spreading waveform is rejected
    code = main(
        ["run", "--config", desk_cfg_file, "--ebn0", "30", "--frames", "1", "--equalizer", "ofdm-exact"]
    )
    assert code == 2


def test_histogram_output(desk_cfg_file, capsys):
    code = main(["histogram", "--config", desk_cfg_file, "--ebn0", "30", "--frames", "5"])
    assert code == 0
    out = capsys.readouterr().out
    assert "iteration histogram" in out
    assert "mean iterations" in out


def test_histogram_needs_single_point(desk_cfg_file):
    assert main(["histogram", "--config", desk_cfg_file, "--ebn0", "4:1:8"]) == 2
