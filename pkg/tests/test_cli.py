import csv
import hashlib
import json

import pytest

from sumset_fuchs import Parameters, index_bound_for_n
from sumset_fuchs.cli import main


def write_config(path, **kw):
    lines = []
    for key, val in kw.items():
        lines.append(f"{key} = {json.dumps(val)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def run(*args):
    return main([str(a) for a in args])


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_csv(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def cfg(tmp_path):
    return write_config(tmp_path / "c.toml", k=2, beta=1, n=[64, 128, 256, 512], seed_count=2)


def test_generate_twice_identical(cfg, tmp_path, capsys):
    assert run("generate", "--config", cfg, "--out", tmp_path / "a") == 0
    assert run("generate", "--config", cfg, "--out", tmp_path / "b") == 0
    out = capsys.readouterr().out.split()
    hashes = [tok for tok in out if tok.startswith("sha256=")]
    assert len(hashes) == 4 and hashes[:2] == hashes[2:]
    assert digest(tmp_path / "a/sequence_000.txt") == digest(tmp_path / "b/sequence_000.txt")


def test_generate_midpoint_header(cfg, tmp_path):
    assert run("generate", "--config", cfg, "--mode", "midpoint", "--out", tmp_path / "o") == 0
    head = (tmp_path / "o/sequence_midpoint.txt").read_text().splitlines()[0]
    assert "seed=" not in head


def test_generate_row_count(tmp_path):
    c = write_config(tmp_path / "c.toml", k=3, beta=1, n=[10**4])
    assert run("generate", "--config", c, "--out", tmp_path / "o") == 0
    lines = (tmp_path / "o/sequence_000.txt").read_text().splitlines()
    assert len(lines) - 1 == index_bound_for_n(Parameters(3, 1), 10**4)


def test_generate_unwritable(cfg, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("generate", "--config", cfg, "--out", blocker / "sub") == 3


def test_overwrite_required(cfg, tmp_path, capsys):
    out = tmp_path / "o"
    assert run("shell", "--config", cfg, "--out", out) == 0
    assert run("shell", "--config", cfg, "--out", out) == 2
    assert "overwrite" in capsys.readouterr().err
    assert run("shell", "--config", cfg, "--out", out, "--overwrite") == 0


def test_env_output_dir(cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("SUMSET_FUCHS_OUT", str(tmp_path / "env"))
    assert run("shell", "--config", cfg) == 0
    assert (tmp_path / "env/shell.csv").exists()


def test_flags_override_config(cfg, tmp_path):
    assert run("shell", "--config", cfg, "--k", 3, "--n", "1000,2000", "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o/shell.csv")
    assert [r["n"] for r in rows] == ["1000", "2000"]


def test_discrepancy_reports_target(cfg, tmp_path, capsys):
    assert run("discrepancy", "--config", cfg, "--out", tmp_path / "o") == 0
    fits = read_csv(tmp_path / "o/fits.csv")
    assert fits[0]["quantity"] == "median_abs_dev_S" and float(fits[0]["target_slope"]) == 0.25
    assert "predicted=0.25" in capsys.readouterr().out
    devs = read_csv(tmp_path / "o/deviations.csv")
    assert list(devs[0]) == ["n", "seed", "sigma", "S", "expected", "dev_sigma", "dev_S"]
    assert len(devs) == 8


def test_discrepancy_deterministic(cfg, tmp_path):
    for d in ("a", "b"):
        assert run("discrepancy", "--config", cfg, "--out", tmp_path / d) == 0
    for name in ("deviations.csv", "fits.csv", "summary.json"):
        assert digest(tmp_path / "a" / name) == digest(tmp_path / "b" / name)


@pytest.mark.parametrize("cmd", ["discrepancy", "scaling", "partition"])
def test_empty_grid_is_usage_error(cmd, tmp_path, capsys):
    c = write_config(tmp_path / "c.toml", k=2, beta=1, n=[])
    assert run(cmd, "--config", c, "--out", tmp_path / "o") == 2
    assert "n:" in capsys.readouterr().err


@pytest.mark.parametrize("text,field", [
    ("k = 3\nbeta = 'x'\nn = [10]\n", "beta"),
    ("k = 3\nbeta = 1\nn = [100, 10]\n", "n"),
    ("k = 3\nbeta = 1\nn = [10]\nworkers = 0\n", "workers"),
    ("k = 3\nbeta = 1\nn = [10]\nmode = 'other'\n", "mode"),
    ("k = 3\nbeta = 1\nn = [10]\ncolour = 1\n", "colour"),
    ("beta = 1\nn = [10]\n", "k"),
    ("k = 3\nbeta = 1\nn = [10\n", "config"),
])
def test_malformed_config_names_field(text, field, tmp_path, capsys):
    c = tmp_path / "c.toml"
    c.write_text(text)
    assert run("partition", "--config", c, "--out", tmp_path / "o") == 2
    assert field in capsys.readouterr().err


def test_partition_alpha3(tmp_path, capsys):
    c = write_config(tmp_path / "c.toml", k=3, beta=1, n=[1000, 3162, 10000, 31623])
    assert run("partition", "--config", c, "--out", tmp_path / "o") == 0
    out = capsys.readouterr().out
    assert "quantity slope target" in out
    rep = json.loads((tmp_path / "o/partition_n10000.json").read_text())
    assert rep["asserted"] and rep["violations"]["fiber_overlap"] == 0
    assert set(rep["slopes"]) == {"s", "max_class", "D2"}
    assert [r["quantity"] for r in read_csv(tmp_path / "o/fits.csv")] == ["s", "max_class", "D2"]


def test_partition_k2_reports_only(tmp_path):
    c = write_config(tmp_path / "c.toml", k=2, beta=1, n=[10**4, 10**5, 10**6])
    assert run("partition", "--config", c, "--out", tmp_path / "o") == 0
    rep = json.loads((tmp_path / "o/partition_n1000000.json").read_text())
    assert rep["asserted"] is False


def test_scaling_fits(tmp_path):
    c = write_config(tmp_path / "c.toml", k=3, beta=1, n=[1000, 10000, 100000])
    assert run("scaling", "--config", c, "--out", tmp_path / "o") == 0
    fit = read_csv(tmp_path / "o/fits.csv")[0]
    assert fit["quantity"] == "weighted_shell_count" and float(fit["target_slope"]) == pytest.approx(2 / 3)


def test_hoeffding_rows(tmp_path):
    c = write_config(tmp_path / "c.toml", k=3, beta=1, n=[10**4], trials=200)
    assert run("hoeffding", "--config", c, "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o/hoeffding.csv")
    assert [float(r["y"]) for r in rows] == [0, 0.5, 1, 1.5, 2]
    assert rows[0]["frequency"] == "1" and rows[0]["ok"] == "1"


def test_sigma_sandwich(cfg, tmp_path):
    assert run("sigma", "--config", cfg, "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o/sigma.csv")
    assert len(rows) == 8 and all(r["ok"] == "1" for r in rows)


def test_repcount_csv(cfg, tmp_path):
    assert run("repcount", "--config", cfg, "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o/repcount_001.csv")
    assert len(rows) == 513 and rows[0]["m"] == "0"
    assert int(rows[-1]["S"]) == sum(int(r["r"]) for r in rows)


def test_explicit_seed_list(tmp_path):
    c = write_config(tmp_path / "c.toml", k=2, beta=1, n=[100], seeds=[11, 12, 13])
    assert run("generate", "--config", c, "--out", tmp_path / "o") == 0
    head = (tmp_path / "o/sequence_002.txt").read_text().splitlines()[0]
    assert "seed=13" in head
