import json

import pytest

from schottky_zeta.cli import EXIT_CAP, EXIT_CHECK, EXIT_INPUT, EXIT_OK, config_hash, main
from schottky_zeta.schottky import funnel3


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SCHOTTKY_CACHE_DIR", str(tmp_path / "cache"))


def artifacts(out, pattern):
    return sorted(out.glob(pattern))


def test_validate_preset(tmp_path):
    assert main(["validate", "--preset", "funnel3", "--lengths", "6,6,6", "--out", str(tmp_path)]) == EXIT_OK
    (path,) = artifacts(tmp_path, "validate_*.json")
    rep = json.loads(path.read_text())
    assert rep["passed"] is True
    assert path.name == f"validate_{rep['config_hash']}.json"


def test_validate_overlap(tmp_path, capsys):
    data = funnel3(6, 6, 6).to_dict()
    data["disks"][0]["radius"] = 1.0
    group = tmp_path / "g.json"
    group.write_text(json.dumps(data))
    assert main(["validate", "--group", str(group), "--out", str(tmp_path)]) == EXIT_CHECK
    assert "disjoint_closures" in capsys.readouterr().err


def test_malformed_json(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["validate", "--config", str(cfg)]) == EXIT_INPUT


def test_unknown_keys(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "funnel3", "colour": "blue"}))
    assert main(["validate", "--config", str(cfg)]) == EXIT_INPUT


def test_bad_box(tmp_path):
    assert main(["resonances", "--box", "1,0,0,1", "--out", str(tmp_path)]) == EXIT_INPUT
    assert main(["resonances", "--box", "1,2,3", "--out", str(tmp_path)]) == EXIT_INPUT


def test_bad_flag():
    assert main(["delta", "--no-such-flag"]) == EXIT_INPUT


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "cylinder", "lengths": [2.0], "out": str(tmp_path / "o")}))
    assert main(["delta", "--config", str(cfg)]) == EXIT_OK
    (path,) = artifacts(tmp_path / "o", "delta_*.json")
    assert json.loads(path.read_text())["delta_bowen"] == 0.0


def test_delta_funnel(tmp_path):
    assert main(["delta", "--out", str(tmp_path)]) == EXIT_OK
    rec = json.loads(artifacts(tmp_path, "delta_*.json")[0].read_text())
    assert rec["agreement"] < 1e-8
    assert rec["version"]


def test_resonances_deterministic(tmp_path):
    args = ["resonances", "--box", "0.1,0.26,0,5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--cache", "off"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "c")]) == EXIT_OK
    (a,), (b,), (c,) = (artifacts(tmp_path / d, "resonances_*.csv") for d in "abc")
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    head = a.read_text().splitlines()
    assert head[0].startswith("# config_hash=") and head[1].startswith("# version=")
    assert head[2] == "re,im,multiplicity,residual"


def test_count(tmp_path):
    assert main(["count", "--box", "0.1,0.26,0,5", "--sigma", "0.15", "--T", "5", "--out", str(tmp_path)]) == EXIT_OK
    rec = json.loads(artifacts(tmp_path, "count_*.json")[0].read_text())
    assert rec["count"] == 5


def test_count_needs_sigma(tmp_path):
    assert main(["count", "--box", "0.1,0.26,0,5", "--out", str(tmp_path)]) == EXIT_INPUT


def test_zeta(tmp_path):
    assert main(["zeta", "--points", "1+1j,0.9+3j", "--out", str(tmp_path)]) == EXIT_OK
    lines = artifacts(tmp_path, "zeta_*.csv")[0].read_text().splitlines()
    assert len(lines) == 5
    for row in lines[3:]:
        vals = [float(x) for x in row.split(",")]
        assert abs(complex(vals[2], vals[3]) - complex(vals[4], vals[5])) < 1e-6


def test_resource_cap(tmp_path):
    assert main(["zeta", "--points", "1+1j", "--cap-words", "10", "--out", str(tmp_path)]) == EXIT_CAP


def test_hash_depends_on_manifest():
    base = {"command": "x", "version": "1", "group": {}, "box": None}
    assert config_hash(base) == config_hash(dict(reversed(list(base.items()))))
    assert config_hash(base) != config_hash({**base, "box": [0, 1, 0, 1]})


def test_verify_report(tmp_path):
    code = main(["verify", "--out", str(tmp_path)])
    (path,) = artifacts(tmp_path, "verify_*.json")
    rep = json.loads(path.read_text())
    statuses = {k: v["status"] for k, v in rep["suites"].items()}
    assert set(statuses) == {
        "phase_derivatives",
        "oscillatory_decay",
        "separation",
        "hs_norm",
        "jensen",
        "pointwise_estimate",
        "main_estimate",
    }
    assert all(s in ("pass", "fail") for s in statuses.values())
    assert code == (EXIT_OK if all(s == "pass" for s in statuses.values()) else EXIT_CHECK)
