import numpy as np
import pytest
from conftest import read_csv

from cavent import __version__, experiments
from cavent.errors import InvalidOverride, NotConverged, UnknownScenario
from cavent.experiments import (
    CONFIG_KEYS,
    Dataset,
    Scenario,
    SweepResult,
    format_csv,
    list_scenarios,
    model_params,
    parse_overrides,
    ratio_grid,
    resolve_config,
    run_scenario,
)

EXPECTED = {
    "coherence-dynamics",
    "dispersive-dynamics",
    "dispersive-peak-sweep",
    "dissipative-dynamics",
    "driven-dynamics",
    "eigvec-coeff-sweep",
    "mes-lapse",
    "overlap-dynamics",
    "resonant-peak-sweep",
    "sz-dynamics",
    "steady-vs-drive",
    "steady-vs-ratio",
}
SMALL = ["r_min=0.3", "r_max=0.5", "r_step=0.1"]


def test_registry():
    listed = list_scenarios()
    names = [n for n, _ in listed]
    assert names == sorted(names)
    assert set(names) == EXPECTED
    assert all(desc for _, desc in listed)
    with pytest.raises(UnknownScenario):
        experiments.get_scenario("no-such-thing")


def test_parse_overrides():
    assert parse_overrides(["omega = 12", "eps=3"]) == [("omega", "12"), ("eps", "3")]
    for bad in ["omega", "=3", "bogus=1"]:
        with pytest.raises(InvalidOverride):
            parse_overrides([bad])


@pytest.mark.parametrize("item", ["omega=nan", "kappa=inf", "n_max=2.5", "omega=abc", "ratios="])
def test_bad_values_rejected(item):
    with pytest.raises(InvalidOverride):
        resolve_config(None, (), parse_overrides([item]))


def test_model_params_validation_is_an_override_error():
    cfg, _ = resolve_config(None, (), parse_overrides(["kappa=-1"]))
    with pytest.raises(InvalidOverride):
        model_params(cfg)


def test_resolve_precedence_and_alias(monkeypatch):
    monkeypatch.delenv("CAVENT_OUT_DIR", raising=False)
    cfg, applied = resolve_config(
        {"omega": 20.0, "n_max": 3},
        parse_overrides(["omega=30", "eps=7"]),
        parse_overrides(["omega=40", "ratios=1,0.5"]),
    )
    assert cfg["omega"] == 40.0
    assert cfg["eps1"] == cfg["eps2"] == 7.0
    assert cfg["n_max"] == 3 and isinstance(cfg["n_max"], int)
    assert cfg["ratios"] == (1.0, 0.5)
    assert applied == ["omega=30", "eps=7", "omega=40", "ratios=1,0.5"]
    assert cfg["out_dir"] == "out"
    monkeypatch.setenv("CAVENT_OUT_DIR", "/tmp/somewhere")
    assert resolve_config()[0]["out_dir"] == "/tmp/somewhere"


def test_ratio_grid_is_exact():
    cfg, _ = resolve_config()
    r = ratio_grid(cfg)
    assert len(r) == 96
    assert r[0] == 0.05 and r[-1] == 1.0
    assert 0.41 in r and 0.42 in r
    with pytest.raises(InvalidOverride):
        ratio_grid({**cfg, "r_step": 0.0})


def test_sweep_result_shape_check():
    SweepResult(np.arange(3.0), {"a": [1, 2, 3]})
    with pytest.raises(ValueError):
        SweepResult(np.arange(3.0), {"a": [1, 2]})


def test_dataset_check():
    assert Dataset("", ("a", "b"), [[1, 2]]).check().shape == (1, 2)
    with pytest.raises(ValueError):
        Dataset("", ("a", "b"), [[1, 2, 3]]).check()
    with pytest.raises(ValueError):
        Dataset("", ("a", "a"), [[1, 2]]).check()
    with pytest.raises(ValueError):
        Dataset("", ("a",), [[np.inf]]).check()


def test_format_csv_layout():
    sc = experiments.get_scenario("coherence-dynamics")
    cfg, applied = resolve_config(sc.defaults, (), parse_overrides(["omega=50"]))
    ds = Dataset("x", ("t", "v"), [[0.1, np.nan], [1 / 3, 2.0]], {"n_max_used": 4})
    text = format_csv(sc, cfg, applied, ds)
    lines = text.split("\n")
    assert lines[0] == f"# cavent_version={__version__}"
    assert lines[1] == "# scenario=coherence-dynamics"
    assert lines[2] == "# dataset=x"
    assert lines[3] == "# override omega=50"
    assert "# omega=50.0" in lines
    assert "# n_max_used=4" in lines
    assert lines[-4:] == ["t,v", "0.10000000000000001,nan", "0.33333333333333331,2", ""]
    assert "\r" not in text
    keys = [ln[2:].split("=")[0] for ln in lines if ln.startswith("# ") and "=" in ln]
    assert set(CONFIG_KEYS) - {"out_dir"} <= set(keys)


def test_run_writes_csv_with_header(tmp_path):
    paths = run_scenario("resonant-peak-sweep", SMALL + ["eps=10.0"], out_dir=tmp_path)
    assert [p.name for p in paths] == ["resonant-peak-sweep.csv"]
    header, cols, data = read_csv(paths[0])
    header = [h[2:] for h in header]
    assert "override eps=10.0" in header
    assert "seed=0" in header
    assert cols[0] == "r"
    assert np.allclose(data[:, 0], [0.3, 0.4, 0.5])
    assert not list(tmp_path.glob("*.tmp"))


def test_config_file_and_cli_precedence(tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("# comment\nr_min=0.2\nr_max = 0.4   # trailing\nr_step=0.1\n")
    paths = run_scenario("resonant-peak-sweep", ["r_max=0.3"], config_file=conf, out_dir=tmp_path)
    header, _, data = read_csv(paths[0])
    header = [h[2:] for h in header]
    assert np.allclose(data[:, 0], [0.2, 0.3])
    assert header.index("override r_min=0.2") < header.index("override r_max=0.3")


def test_multi_dataset_scenario(tmp_path):
    paths = run_scenario("eigvec-coeff-sweep", SMALL, out_dir=tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["eigvec-coeff-sweep__dispersive.csv", "eigvec-coeff-sweep__resonant.csv"]
    header, cols, data = read_csv(tmp_path / "eigvec-coeff-sweep__resonant.csv")
    assert "# dataset=resonant" in header
    assert cols[:4] == ["r", "e1", "e2", "e3"]
    assert np.all(data[:, 1] == 0)


def test_determinism_and_threads(tmp_path):
    a = run_scenario("dispersive-peak-sweep", SMALL, out_dir=tmp_path / "a")[0].read_bytes()
    b = run_scenario("dispersive-peak-sweep", SMALL, out_dir=tmp_path / "b")[0].read_bytes()
    c = run_scenario("dispersive-peak-sweep", SMALL, out_dir=tmp_path / "c", threads=3)[0].read_bytes()
    assert a == b == c


def test_failed_run_leaves_nothing(tmp_path, monkeypatch):
    def runner(cfg, threads):
        return [Dataset("good", ("a",), [[1.0]]), Dataset("bad", ("a", "a"), [[1.0, 2.0]])]

    sc = Scenario("broken", "fails on its second dataset", {}, runner, ())
    monkeypatch.setitem(experiments.SCENARIOS, "broken", sc)
    with pytest.raises(ValueError):
        run_scenario("broken", out_dir=tmp_path)
    assert list(tmp_path.iterdir()) == []

    def raising(cfg, threads):
        raise NotConverged("no cutoff")

    monkeypatch.setitem(experiments.SCENARIOS, "broken", Scenario("broken", "", {}, raising, ()))
    with pytest.raises(NotConverged):
        run_scenario("broken", out_dir=tmp_path)
    assert list(tmp_path.iterdir()) == []


def test_bad_override_writes_nothing(tmp_path):
    with pytest.raises(InvalidOverride):
        run_scenario("resonant-peak-sweep", ["omega=nan"], out_dir=tmp_path)
    assert not tmp_path.exists() or list(tmp_path.iterdir()) == []


def test_coherence_dynamics_columns(tmp_path):
    path = run_scenario("coherence-dynamics", ["sample_count=101"], out_dir=tmp_path)[0]
    _, cols, data = read_csv(path)
    assert cols == ["t", "E", "C"]
    assert data.shape == (101, 3)
    assert np.allclose(data[:, 2], data[:, 1] / 2, atol=1e-15)
