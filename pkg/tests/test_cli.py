import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pairprox.cli import main
from pairprox.errors import ConfigError
from pairprox.pipeline import RunConfig, analyze, run_pipeline
from pairprox.synthetic import (attributed_sbm, clustered_temporal, write_static_dataset,
                                write_temporal_dataset)


@pytest.fixture(scope="module")
def static_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("static")
    g, attrs = attributed_sbm(150, num_classes=4, p_in=0.12, seed=3)
    return write_static_dataset(d / "data", g, attrs, id_offset=500)


def _config(tmp_path, data, **kw):
    cfg = dict(data, seeds=[0, 1], overrides={"n_estimators": 20}, mask_direct_edge=True,
               out=str(tmp_path / "out"))
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_writes_artifacts(tmp_path, static_data, capsys):
    path = _config(tmp_path, static_data)
    assert main(["run", "--config", str(path)]) == 0
    out = tmp_path / "out"
    for name in ("manifest.json", "remap.csv", "report_auc.json"):
        assert (out / name).exists()
    for f in ("train_pos.tsv", "features_train.csv", "model.json", "importance.csv", "metrics.json"):
        assert (out / "seed_1" / f).exists()
    report = json.loads((out / "report_auc.json").read_text())
    assert report["seeds"] == [0, 1] and len(report["per_seed"]) == 2
    assert report["mean"] > 0.6
    printed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert printed["metric"] == "auc"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"] == [0, 1] and manifest["config"]["preset"] == "auc"


def test_flags_override_config(tmp_path, static_data):
    path = _config(tmp_path, static_data)
    out2 = tmp_path / "o2"
    rc = main(["run", "--config", str(path), "--seed", "4", "--preset", "hits20",
               "--metric", "hits@5", "--metric", "auc", "--workers", "2", "--out", str(out2)])
    assert rc == 0
    rep = json.loads((out2 / "report_hits5.json").read_text())
    assert rep["seeds"] == [4] and rep["k"] == 5 and rep["preset"] == "hits20"
    assert (out2 / "report_auc.json").exists()


def test_stagewise_equals_run(tmp_path, static_data):
    path = _config(tmp_path, static_data, seeds=[2])
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "a")]) == 0
    for stage in ("split", "featurize", "train", "eval"):
        assert main([stage, "--config", str(path), "--out", str(tmp_path / "b")]) == 0
    for f in ("features_test.csv", "model.json", "metrics.json"):
        assert (tmp_path / "a/seed_2" / f).read_bytes() == (tmp_path / "b/seed_2" / f).read_bytes()


def test_manifest_rerun_reproduces_report(tmp_path, static_data):
    path = _config(tmp_path, static_data)
    assert main(["run", "--config", str(path)]) == 0
    first = (tmp_path / "out/report_auc.json").read_text()
    manifest = tmp_path / "out/manifest.json"
    assert main(["run", "--config", str(manifest), "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again/report_auc.json").read_text() == first


def test_analyze_prints_table(tmp_path, static_data, capsys):
    path = _config(tmp_path, static_data)
    assert main(["analyze", "--config", str(path)]) == 0
    text = capsys.readouterr().out
    assert "transitivity" in text and "node_homophily" in text
    diag = json.loads((tmp_path / "out/diagnostics.json").read_text())
    assert 0 <= diag["edge_homophily"] <= 1


def test_validation_errors_exit_2(tmp_path, static_data):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["run", "--config", str(_config(tmp_path, static_data, preset="quick"))]) == 2
    assert main(["run", "--config", str(_config(tmp_path, static_data, metrics=["mrr"]))]) == 2
    assert main(["run", "--config", str(_config(tmp_path, static_data, ratios=[0.5, 0.5, 0]))]) == 2
    assert main(["run", "--config", str(_config(tmp_path, static_data, bogus=1))]) == 2
    assert main(["run", "--config", str(_config(tmp_path, static_data, edges="nope.tsv"))]) == 2
    assert main(["frobnicate", "--config", "x"]) == 2
    assert main(["run", "--config", str(_config(tmp_path, static_data)), "--seed", "a,b"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == 2


def test_runtime_failure_exit_3_and_failed_dir(tmp_path, static_data):
    path = _config(tmp_path, static_data, seeds=[0])
    assert main(["split", "--config", str(path)]) == 0
    assert main(["featurize", "--config", str(path)]) == 0
    # corrupt an artifact so the train stage fails
    (tmp_path / "out/seed_0/features_train.csv").write_text("u,v,label,a\n0,1,1,zz\n")
    assert main(["train", "--config", str(path)]) == 3
    assert (tmp_path / "out/failed/seed_0/features_train.csv").exists()
    assert not (tmp_path / "out/seed_0").exists()


def test_missing_stage_input_exit_3(tmp_path, static_data):
    path = _config(tmp_path, static_data, seeds=[0])
    assert main(["eval", "--config", str(path)]) == 3


def test_profile_requires_its_files(tmp_path, static_data):
    cfg = RunConfig(edges=static_data["edges"], classes=static_data["classes"])
    with pytest.raises(ConfigError, match="attributes"):
        cfg.validate()
    cfg = RunConfig(edges=static_data["edges"], real_attributes=static_data["classes"], profile="collab")
    with pytest.raises(ConfigError, match="temporal"):
        cfg.validate()


def test_ablation_and_logistic_and_sweep(tmp_path, static_data):
    base = dict(seeds=[0])
    for extra in ({"feature_set": "structural"}, {"feature_set": "domain"},
                  {"classifier": "logistic"}, {"lr_sweep": [0.05, 0.3]}):
        path = _config(tmp_path, static_data, **base, **extra)
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "abl")]) == 0
    assert json.loads((tmp_path / "abl/seed_0/sweep.json").read_text())["learning_rate"] in (0.05, 0.3)


def test_temporal_pipeline_with_hits_pool(tmp_path):
    tg, emb = clustered_temporal(n=100, records=900, seed=1)
    data = write_temporal_dataset(tmp_path / "t", tg, emb)
    path = _config(tmp_path, data, profile="collab", preset="hits20", metrics=["hits@10"],
                   hits_negatives=300, seeds=[0])
    assert main(["run", "--config", str(path)]) == 0
    header = (tmp_path / "out/seed_0/features_test.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 3 + 28
    assert (tmp_path / "out/seed_0/features_hits_pool.csv").exists()


def test_console_script_runs(tmp_path, static_data):
    path = _config(tmp_path, static_data, seeds=[0])
    r = subprocess.run([sys.executable, "-m", "pairprox.cli", "analyze", "--config", str(path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
