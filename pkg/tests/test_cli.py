import csv
import json

import pytest

from bbext.cli import CSV_COLUMNS, ConfigError, ExperimentConfig, main


def run_cli(args):
    return main(args)


def test_unknown_suite_is_config_error(capsys):
    assert run_cli(["check", "nonsense"]) == 2


def test_unknown_protocol_is_config_error(capsys):
    assert run_cli(["run", "--protocol", "nope", "--out", "/tmp/x"]) == 2


def test_config_file_plus_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "protocol": "sync-ba-half",
        "n": [4],
        "l": [1024],
        "seeds": [0, 1],
        "adversaries": ["honest"],
        "out": str(tmp_path / "out"),
    }))
    code = run_cli(["run", "--config", str(cfg), "--l", "2048",
                    "--adversary", "honest,silent"])
    assert code == 0
    rows = list(csv.reader((tmp_path / "out" / "aggregate.csv").open()))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + 1 * 1 * 2 * 2  # n x l x adversaries x seeds
    assert {r[3] for r in rows[1:]} == {"2048"}


def test_cells_and_t_rules():
    cfg = ExperimentConfig.from_dict({
        "protocol": "async-ba-third",
        "n": [4, 7, 10],
        "l": [512],
    })
    assert [c["t"] for c in cfg.cells()] == [1, 2, 3]
    cfg2 = ExperimentConfig.from_dict({
        "protocol": "sync-bb-highthresh",
        "n": [12],
        "l": [512],
        "epsilon": 0.25,
    })
    assert cfg2.cells()[0]["t"] == 9
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"protocol": "sync-ba-half", "n": [4],
                                    "l": [64], "t_rule": "explicit"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"protocol": "sync-ba-half",
                                    "adversaries": ["martian"]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"protocol": "sync-ba-half",
                                    "oracles": {"sync_ba": "quantum"}})


def test_seed_env_default(monkeypatch):
    monkeypatch.setenv("BBEXT_SEED", "42")
    cfg = ExperimentConfig.from_dict({"protocol": "sync-ba-half"})
    assert cfg.seeds == [42]


def test_seed_range_form():
    cfg = ExperimentConfig.from_dict({"protocol": "sync-ba-half",
                                      "seeds": {"start": 5, "count": 3}})
    assert cfg.seeds == [5, 6, 7]


def test_run_writes_stable_csv_and_metrics(tmp_path):
    out = tmp_path / "results"
    args = ["run", "--protocol", "sync-ba-half", "--n", "4", "--l", "1024,4096",
            "--seed", "0", "--adversary", "honest", "--out", str(out)]
    assert run_cli(args) == 0
    first = (out / "aggregate.csv").read_bytes()
    assert run_cli(args) == 0
    assert (out / "aggregate.csv").read_bytes() == first
    cells = sorted(p.name for p in out.glob("*.json"))
    assert cells == [
        "sync-ba-half_n4_t1_l1024_honest_s0.json",
        "sync-ba-half_n4_t1_l4096_honest_s0.json",
    ]
    metrics = json.loads((out / cells[0]).read_text())
    assert "honest_bits_total" in metrics and "bits_by_step" in metrics


def test_linear_bits_growth_visible_in_csv(tmp_path):
    out = tmp_path / "results"
    run_cli(["run", "--protocol", "sync-ba-half", "--n", "4",
             "--l", "8192,16384,32768", "--seed", "0", "--out", str(out)])
    rows = list(csv.DictReader((out / "aggregate.csv").open()))
    bits = [int(r["honest_bits"]) for r in rows]
    ls = [int(r["l"]) for r in rows]
    assert sorted(zip(ls, bits)) == list(zip(ls, bits))
    # slope between consecutive points is the model's 2 n (n-1) / b = 8
    for (l1, b1), (l2, b2) in zip(zip(ls, bits), list(zip(ls, bits))[1:]):
        slope = (b2 - b1) / (l2 - l1)
        assert 7.0 <= slope <= 9.0


def test_check_command_reports_json(capsys):
    code = run_cli(["check", "protocols-sync", "--seeds", "2"])
    out = capsys.readouterr().out.strip()
    report = json.loads(out)
    assert report["name"].startswith("protocols:")
    assert report["passed"] is True
    assert code == 0


def test_invalid_cell_rejected(tmp_path):
    # t rule produces an invalid session (t = 0 is fine; force explicit bad t)
    code = run_cli(["run", "--protocol", "sync-ba-half", "--n", "4", "--t", "2",
                    "--l", "64", "--out", str(tmp_path)])
    assert code == 2


def test_coding_check_fits_the_fresh_checkout_budget(capsys):
    assert run_cli(["check", "coding"]) == 0
    report = json.loads(capsys.readouterr().out.strip())
    assert report["elapsed_s"] < 60
