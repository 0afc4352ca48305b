import csv
import subprocess
import sys

import pytest

from hybrid_al.cli import main

BASE = """\
dataset.n = 300
dataset.d = 3
dataset.classes = 3
learner.epochs = 3
run.init_fraction = 0.1
run.batch_fraction = 0.1
run.max_iterations = 3
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(BASE)
    return path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_outputs(tmp_path, config):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--out-dir", str(out)]) == 0
    assert len(rows(out / "curve.csv")) == 5
    assert (out / "manifest.json").exists()


def test_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_config_required():
    assert main(["run"]) == 1


def test_unknown_flag(capsys):
    assert main(["run", "--colour", "red"]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_command():
    assert main(["train"]) == 1


def test_bad_jobs(config):
    assert main(["compare", "--config", str(config), "--jobs", "0"]) == 1


def test_bad_strategy_list(config):
    assert main(["compare", "--config", str(config), "--strategies", "LCD,BALD"]) == 1


def test_missing_data_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"dataset.source = csv\ndataset.path = {tmp_path / 'nope.csv'}\n")
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2


def test_malformed_data_file(tmp_path, capsys):
    (tmp_path / "d.csv").write_text("id,label,f0\na,0,1\nb,1,oops\n")
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"dataset.source = csv\ndataset.path = {tmp_path / 'd.csv'}\n")
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_divergence_exit(tmp_path, config):
    config.write_text(BASE + "learner.lr0 = 1e300\n")
    assert main(["run", "--config", str(config), "--out-dir", str(tmp_path)]) == 3


def test_make_data_then_run(tmp_path):
    assert main(["make-data", "--out-dir", str(tmp_path), "--n", "200", "--d", "3",
                 "--classes", "4", "--seed", "5"]) == 0
    data = rows(tmp_path / "data.csv")
    assert data[0] == ["id", "label", "f0", "f1", "f2"] and len(data) == 201
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"dataset.source = csv\ndataset.path = {tmp_path / 'data.csv'}\n"
                   "learner.epochs = 2\nrun.init_fraction = 0.1\nrun.batch_fraction = 0.2\n")
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path / "out")]) == 0
    curve = rows(tmp_path / "out" / "curve.csv")
    assert curve[-1][1] == "160"  # the whole 160-sample pool ends up labeled


def test_make_data_bad_spread(tmp_path):
    assert main(["make-data", "--out-dir", str(tmp_path), "--spread", "0"]) == 1


def test_ablate_extremes_match_run(tmp_path, config):
    assert main(["ablate", "--config", str(config), "--out-dir", str(tmp_path / "ab"),
                 "--ratios", "0,1", "--seeds", "0"]) == 0
    for kind, ratio in (("HCD", "0.0"), ("LCD", "1.0")):
        cfg = tmp_path / f"{kind}.cfg"
        cfg.write_text(BASE + f"strategy.kind = {kind}\n")
        assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path / kind)]) == 0
        ablated = (tmp_path / "ab" / "runs" / f"DSAL(ratio={ratio})" / "seed0" / "curve.csv").read_bytes()
        assert ablated == (tmp_path / kind / "curve.csv").read_bytes()
    assert len(rows(tmp_path / "ab" / "comparison.csv")) == 1 + 2 * 4


def test_compare(tmp_path, config):
    assert main(["compare", "--config", str(config), "--out-dir", str(tmp_path),
                 "--strategies", "LCD,RANDOM,LCHC", "--seeds", "0,1", "--jobs", "2"]) == 0
    table = rows(tmp_path / "comparison.csv")
    assert {r[0] for r in table[1:]} == {"LCD", "RANDOM", "LCHC"}
    assert (tmp_path / "runs" / "LCHC" / "seed1" / "manifest.json").exists()


def test_run_from_manifest(tmp_path, config):
    assert main(["run", "--config", str(config), "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["run", "--manifest", str(tmp_path / "a" / "manifest.json"),
                 "--out-dir", str(tmp_path / "b")]) == 0
    for name in ("curve.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override(tmp_path, config):
    main(["run", "--config", str(config), "--out-dir", str(tmp_path / "a"), "--seed", "4"])
    assert '"run.master_seed": 4' in (tmp_path / "a" / "manifest.json").read_text()


def test_export_embeddings(tmp_path, config):
    assert main(["export-embeddings", "--config", str(config), "--out-dir", str(tmp_path)]) == 0
    emb = rows(tmp_path / "embeddings.csv")
    assert len(emb) == 1 + 240
    assert sum(int(r[2]) for r in emb[1:]) == 24


def test_module_entry_point(tmp_path, config):
    proc = subprocess.run([sys.executable, "-m", "hybrid_al", "run", "--config", str(config),
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "LCD" in proc.stdout
