import csv
import io
import json

import numpy as np
import pytest

from conftest import PI
from fidelity import Gaussian
from fidelity.cli import main
from fidelity.runner import (
    CSV_HEADER,
    PRESETS,
    ConfigError,
    ExperimentConfig,
    parse_override,
    preset_config,
    run_experiment,
    run_preset,
    sidecar_path,
)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def small(name, tmp_path, **extra):
    overrides = {"t_max": 10, "out": str(tmp_path / f"{name}.csv"), **extra}
    return preset_config(name, overrides)


def test_golden_header(tmp_path):
    run_experiment(small("fig4", tmp_path, N=20))
    first = (tmp_path / "fig4.csv").read_text().splitlines()[0]
    assert first == "t,method,M,O_re,O_im,std_err,n_samples,seed"
    assert ",".join(CSV_HEADER) == first


# transcribed from the figure captions: (n, k, epsilon, state, N)
CAPTIONS = {
    "fig1a": (1000, 0.95, 0.015, {"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.004}, 1000),
    "fig1b": (1000, 0.95, 0.015, {"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.16}, 1000),
    "fig1c": (1000, 0.95, 0.015, {"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.04}, 1000),
    "fig2a": (200, 0.7, 0.02, {"type": "coherent_pair", "Q1": 0.4, "Q2": 1.2}, 400),
    "fig2b": (200, 0.7, 0.02, {"type": "coherent_pair", "Q1": 0.4, "Q2": 0.42}, 400),
    "fig3": (200, 0.7, 0.02, {"type": "incoherent_pair", "Q1": 0.4, "Q2": 0.42}, 200),
    "fig4": (100, 2.0, 0.03, {"type": "random"}, 1000),
}


@pytest.mark.parametrize("name", sorted(CAPTIONS))
def test_presets_match_captions(name):
    n, k, eps, state, N = CAPTIONS[name]
    cfg = preset_config(name)
    p = cfg.map_params
    assert (p.n, p.k, p.epsilon) == (n, k, eps)
    assert cfg.state == state
    assert cfg.n_trajectories == N
    assert cfg.t_max == 50


def test_preset_names():
    assert set(PRESETS) == set(CAPTIONS)


def test_preset_angles_in_units_of_pi():
    spec = preset_config("fig1a").spec
    assert spec == Gaussian(0.7 * PI, 0.4 * PI, 0.004 * PI)


def test_fig1a_methods_and_times(tmp_path):
    cfg = preset_config("fig1a", {"out": str(tmp_path / "a.csv"), "N": 50})
    run_experiment(cfg)
    rows = read_rows(tmp_path / "a.csv")
    assert {r["method"] for r in rows} == {"exact", "dr_general", "dr_pos_form", "dr_mom_form"}
    assert sorted({int(r["t"]) for r in rows}) == list(range(51))
    assert len(rows) == 4 * 51


def test_fig1a_zero_epsilon_exact_is_one(tmp_path):
    run_preset("fig1a", {"epsilon": 0, "methods": "exact", "t_max": 20, "out": str(tmp_path / "z.csv")})
    rows = read_rows(tmp_path / "z.csv")
    assert max(abs(float(r["M"]) - 1.0) for r in rows) < 1e-10


@pytest.mark.parametrize(
    "name, methods",
    [("fig4", {"exact", "dr_general"}), ("fig2b", {"exact", "dr_general", "dr_no_interference"})],
)
def test_preset_method_sets(tmp_path, name, methods):
    run_experiment(small(name, tmp_path, N=30))
    assert {r["method"] for r in read_rows(tmp_path / f"{name}.csv")} == methods


def test_fig3_byte_identical(tmp_path):
    a = small("fig3", tmp_path, seed=7, out=str(tmp_path / "a.csv"))
    b = small("fig3", tmp_path, seed=7, workers=3, out=str(tmp_path / "b.csv"))
    run_experiment(a)
    run_experiment(b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert all(r["seed"] == "7" for r in read_rows(tmp_path / "a.csv"))


def test_floats_round_trip(tmp_path):
    series = run_experiment(small("fig4", tmp_path, N=40))
    rows = [r for r in read_rows(tmp_path / "fig4.csv") if r["method"] == "dr_general"]
    M = np.array([float(r["M"]) for r in rows])
    assert np.array_equal(M, series["dr_general"].fidelity)


def test_sidecar_contents(tmp_path):
    cfg = small("fig2a", tmp_path, N=20)
    run_experiment(cfg)
    meta = json.loads(sidecar_path(tmp_path / "fig2a.csv").read_text())
    assert meta["version"]
    assert ExperimentConfig.from_json(meta["config"]) == cfg


def test_config_round_trip():
    cfg = preset_config("fig1c", {"seed": 2**63 - 1, "workers": 2})
    text = json.dumps(cfg.to_json())
    again = ExperimentConfig.from_json(json.loads(text))
    assert again == cfg
    assert json.dumps(again.to_json()) == text


@pytest.mark.parametrize(
    "bad",
    [
        {"methods": ["nope"]},
        {"methods": ["dr_pos_form"], "state": {"type": "random"}},
        {"methods": ["wigner_overlap"], "state": {"type": "coherent_pair", "Q1": 0.1, "Q2": 0.5}},
        {"t_max": -1},
        {"n_trajectories": 0},
        {"bogus": 1},
    ],
)
def test_invalid_configs(bad):
    obj = preset_config("fig4").to_json()
    obj.update(bad)
    with pytest.raises((ConfigError, ValueError)):
        ExperimentConfig.from_json(obj)


def test_parse_override():
    assert parse_override("epsilon=0") == ("epsilon", 0)
    assert parse_override("methods=exact,dr_general") == ("methods", "exact,dr_general")
    with pytest.raises(ConfigError):
        parse_override("oops")


def test_cli_unknown_preset(capsys):
    assert main(["preset", "fig9"]) == 1
    err = capsys.readouterr().err
    assert "fig1a" in err and "fig4" in err


def test_cli_unwritable_output():
    assert main(["preset", "fig4", "N=5", "--t-max", "2", "--out", "/proc/forbidden/x.csv"]) == 2


def test_cli_invalid_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"methods": ["exact"]}))
    assert main(["run", "--config", str(path)]) == 1


def test_cli_run_config_and_seed_precedence(tmp_path, monkeypatch):
    cfg = preset_config("fig4", {"N": 20, "t_max": 3, "seed": 1, "out": str(tmp_path / "r.csv")})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert main(["run", "--config", str(path)]) == 0
    assert {r["seed"] for r in read_rows(tmp_path / "r.csv")} == {"1"}

    monkeypatch.setenv("FIDELITY_SEED", "5")
    assert main(["run", "--config", str(path)]) == 0
    assert {r["seed"] for r in read_rows(tmp_path / "r.csv")} == {"5"}

    assert main(["run", "--config", str(path), "--seed", "9"]) == 0
    assert {r["seed"] for r in read_rows(tmp_path / "r.csv")} == {"9"}

    monkeypatch.setenv("FIDELITY_SEED", "x")
    assert main(["run", "--config", str(path)]) == 1


def test_cli_diagnostics(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["diagnostics", "--k", "2", "--lags", "8", "--samples", "20000", "--out", str(out)]) == 0
    text = out.read_text()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["lag", "C_W", "C_V"]
    assert len(rows) == 1 + 9
    summary = json.loads(sidecar_path(out).read_text())
    for key in ("K_W", "K_V", "C_W_inf", "C_V_inf"):
        assert key in summary
    assert abs(float(rows[1][1]) - 2.0) <= 3 * summary["C_W0_std_error"]
    assert abs(float(rows[1][2]) - 0.5) <= 3 * summary["C_V0_std_error"]


def test_cli_diagnostics_bad_args(tmp_path):
    assert main(["diagnostics", "--k", "2", "--lags", "-1", "--out", str(tmp_path / "d.csv")]) == 1
