import json

import pytest

from colvar.cli import BUILTINS, main


@pytest.mark.parametrize("name,code", [("eps_squared", 0), ("exp_neg_inv", 0), ("inv_eps", 0), ("exp_inv_sqrt", 2)])
def test_classify_builtins(name, code, capsys):
    assert main(["classify", name]) == code
    doc = json.loads(capsys.readouterr().out)
    assert doc["input"] == f"builtin:{name}"


def test_builtin_list():
    assert "eps_squared" in BUILTINS


def test_classify_csv(tmp_path, capsys):
    p = tmp_path / "net.csv"
    rows = ["epsilon,value"] + [f"{e},{e**3}" for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    p.write_text("\n".join(rows) + "\n")
    assert main(["classify", str(p), "--out", str(tmp_path / "o")]) == 0
    doc = json.loads((tmp_path / "o" / "result.json").read_text())
    assert doc["kind"] == "GenNumber"
    capsys.readouterr()


def test_classify_bad_csv(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("epsilon,value\n0.1,abc\n")
    assert main(["classify", str(p)]) == 64


def test_classify_missing_input(capsys):
    assert main(["classify"]) == 64
    assert main(["classify", "/nonexistent/file.csv"]) == 64


def test_usage_errors(capsys):
    assert main([]) == 64
    assert main(["frobnicate"]) == 64
    assert main(["scenario", "no_such_scenario"]) == 64
    assert main(["classify", "eps_squared", "--eps-count", "two"]) == 64


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["scenario", "hard_rod", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 64


def test_config_rejects_nonfinite(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"f": NaN}')
    assert main(["scenario", "hard_rod", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 64
    cfg.write_text("[1, 2]")
    assert main(["scenario", "hard_rod", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 64


def test_config_bad_grid(tmp_path, capsys):
    assert main(["scenario", "hard_rod", "--eps-min", "0.05", "--eps-max", "0.1",
                 "--out", str(tmp_path / "o")]) == 64


def test_scenario_beam_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 1.0, "h": "eps", "seed": 7}))
    out = tmp_path / "beam"
    assert main(["scenario", "beam_with_joint", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["passed"] and doc["seed"] == 7
    assert doc["checks"]["D_cauchy"] is True and doc["shadow"]["D_converges"] is True
    assert len(doc["shadow"]["D_per_epsilon"]) >= 4
    assert (out / "profile.csv").read_text().startswith("epsilon,")
    assert "beam_with_joint: pass" in capsys.readouterr().out


def test_scenario_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scenario", "rod_general", "--out", str(a)]) == 0
    assert main(["scenario", "rod_general", "--out", str(b)]) == 0
    assert (a / "result.json").read_bytes() == (b / "result.json").read_bytes()


def test_unwritable_output_is_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["scenario", "hard_rod", "--out", str(blocker / "sub")]) == 73


def test_suite_config_warning(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": True}))
    assert main(["suite", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 64


def test_suite_m_max_drift_warning():
    from colvar.suite import SuiteConfig

    assert SuiteConfig().warnings() == []
    assert SuiteConfig(m_max=3).warnings()


def test_classify_m_max_drift_warning(capsys):
    assert main(["classify", "eps_squared", "--m-max", "3"]) == 0
    assert "config drift" in capsys.readouterr().err
