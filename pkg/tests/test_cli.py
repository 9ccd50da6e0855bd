import numpy as np
import pytest
import yaml

from isacopt.cli import main
from isacopt.experiments import read_csv
from isacopt.scenario import Scenario, scenario_to_dict

from test_experiments import SMALL


def _scenario_file(tmp_path):
    rng = np.random.default_rng(0)
    h = (rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))) * 1e-4
    sc = Scenario(2, 3, 2, 2, 1, h, 10 ** -8.7, [40.0, 120.0], [0.05, 0.07], [1.0] * 3, 10.0, 1000.0, 1,
                  meta={"name": "cli-case"})
    path = tmp_path / "case.yaml"
    path.write_text(yaml.safe_dump(scenario_to_dict(sc)))
    return path


def test_sweep_command(tmp_path, capsys):
    cfg = {"template": SMALL, "sweep": {"variable": "sinr_threshold", "values": [1, 2]},
           "realizations": 1, "seed": 1, "methods": ["OPT", "BL2"], "out": str(tmp_path / "o")}
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(cfg))
    code = main(["sweep", "--config", str(path), "--seed", "5", "--gap", "1e-6",
                 "--methods", "OPT,BL4", "--out", str(tmp_path / "x"), "--no-figures"])
    assert code == 0
    rows = read_csv(tmp_path / "x" / "detail.csv")
    assert {r["method"] for r in rows} == {"OPT", "BL4"}
    assert "wrote detail" in capsys.readouterr().out


def test_beampattern_command(tmp_path, capsys):
    code = main(["beampattern", "--config", str(_scenario_file(tmp_path)), "--out", str(tmp_path / "bp")])
    out = capsys.readouterr().out
    assert code == 0
    assert "status=optimal" in out
    rows = read_csv(tmp_path / "bp" / "beampattern.csv")
    assert len(rows) == 719
    assert list(rows[0]) == ["theta_deg", "gain_user1", "gain_user2", "gain_user3"]
    assert (tmp_path / "bp" / "beampattern.png").exists()


def test_oracle_check_command(capsys):
    assert main(["oracle-check", "--instances", "3", "--seed", "2"]) == 0
    assert "3/3 instances agree" in capsys.readouterr().out


def test_export_lp_command(tmp_path):
    out = tmp_path / "m.lp"
    assert main(["export-lp", "--config", str(_scenario_file(tmp_path)), "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("\\ exported by isacopt\nMaximize\n obj: 1.0 tau")
    assert " C2: " in text and "Binaries" in text


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("sweep: {variable: nope, values: [1]}\n")
    assert main(["sweep", "--config", str(path)]) == 3
    assert "error" in capsys.readouterr().err


def test_unknown_method_rejected():
    with pytest.raises(SystemExit):
        main(["sweep", "--config", "x.yaml", "--methods", "OPT,BL9"])
