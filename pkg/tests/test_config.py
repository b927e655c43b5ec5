from pathlib import Path

import pytest

from hololine.config import ExperimentConfig, dumps_config, load_config, loads_config
from hololine.geometry import ConfigError, SystemGeometry

CONFIGS = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.toml"))

BASE = """\
[geometry]
L_s = 0.16
L_r = 0.16
d = 1.0
lambda = 0.01
delta_s = 0.005
delta_r = 0.005
"""


def test_configs_present():
    assert len(CONFIGS) >= 9


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    cfg = load_config(path)
    assert cfg.geometry.N_s >= 2
    assert cfg.output_dir.startswith("out/")


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_round_trip(path):
    cfg = load_config(path)
    text = dumps_config(cfg)
    again = loads_config(text)
    assert dumps_config(again) == text
    assert again.geometry == cfg.geometry
    assert [s.name for s in again.scenarios] == [s.name for s in cfg.scenarios]


def test_defaults():
    cfg = loads_config("")
    assert cfg.geometry == SystemGeometry.reference()
    assert cfg.metrics.master_seed == 2024 and cfg.metrics.trials == 500
    assert cfg.wdm.N == 25 and cfg.los == "em"
    assert cfg == ExperimentConfig()


def test_scenario_profiles():
    cfg = loads_config(BASE + """
[[scenario]]
name = "a"
model = "nlos"
receive = { kind = "clusters", clusters = [{ weight = 1.0, mean_deg = 90.0, alpha = 40.0 }] }
source = { kind = "isotropic" }
""")
    tx, rx = cfg.scenarios[0].profiles()
    assert tx.is_isotropic and not rx.is_isotropic
    assert rx.clusters[0].alpha == 40.0
    spec = cfg.scenarios[0].ensemble(cfg.geometry, cfg.los, cfg.nlos_gain)
    assert spec.model == "nlos" and spec.source == tx


def line_of(text, needle):
    return next(i for i, ln in enumerate(text.splitlines(), 1) if needle in ln)


@pytest.mark.parametrize(
    "extra, needle, path",
    [
        ("[metrics]\nepsilon = 1.5\n", "epsilon", "metrics.epsilon"),
        ("[metrics]\ntrials = 1\n", "trials", "metrics.trials"),
        ("[channel]\nlos = \"fdtd\"\n", "los =", "channel.los"),
        ("[wdm]\nN = 40\n", "N = 40", "wdm.N"),
        ("[psd]\nkx_max = 1.0\n", "kx_max", "psd.kx_max"),
        ("[metrics]\nspacings = [0.5, -1]\n", "spacings", "metrics.spacings"),
        ("[acf]\npoints = \"many\"\n", "points", "acf.points"),
    ],
)
def test_errors_carry_line_numbers(extra, needle, path):
    text = BASE + extra
    with pytest.raises(ConfigError) as ei:
        loads_config(text, "x.toml")
    msg = str(ei.value)
    assert msg.startswith(f"x.toml:{line_of(text, needle)}: {path}:")


def test_unknown_key():
    text = BASE + "colour = 3\n"
    with pytest.raises(ConfigError, match=r"x.toml:8: geometry.colour: unknown key"):
        loads_config(text, "x.toml")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown key"):
        loads_config("[plotting]\nx = 1\n")


def test_scenario_error_line():
    text = BASE + """
[[scenario]]
name = "ok"
model = "iid"

[[scenario]]
name = "bad"
model = "nlos"
[scenario.receive]
kind = "clusters"
clusters = [{ weight = 1.0, mean_deg = 30.0, nu2 = 0.01, alpha = 3.0 }]
"""
    with pytest.raises(ConfigError) as ei:
        loads_config(text, "s.toml")
    assert "scenario[1].receive.clusters[0]" in str(ei.value)
    assert str(ei.value).startswith(f"s.toml:{line_of(text, 'clusters =')}:")


def test_scenario_missing_profile():
    with pytest.raises(ConfigError, match="needs a \\[receive\\] profile"):
        loads_config(BASE + '[[scenario]]\nname = "x"\nmodel = "composite"\n')


def test_duplicate_scenario():
    text = BASE + '[[scenario]]\nname = "x"\nmodel = "iid"\n[[scenario]]\nname = "x"\nmodel = "iid"\n'
    with pytest.raises(ConfigError, match="duplicate"):
        loads_config(text)


def test_weights_validated():
    text = BASE + """[[scenario]]
name = "w"
model = "nlos"
receive = { kind = "clusters", clusters = [{ weight = 0.4, mean_deg = 30.0, nu2 = 0.01 }] }
"""
    with pytest.raises(ConfigError, match="scenario\\[0\\].receive"):
        loads_config(text)


def test_bad_geometry():
    with pytest.raises(ConfigError, match="geometry"):
        loads_config(BASE.replace("d = 1.0", "d = -1.0"))


def test_toml_syntax_error():
    with pytest.raises(ConfigError, match="bad.toml"):
        loads_config("[geometry\n", "bad.toml")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.toml")


def test_overrides():
    cfg = loads_config(BASE)
    o = cfg.with_overrides(seed=7, trials=10, output_dir=Path("elsewhere"))
    assert o.metrics.master_seed == 7 and o.metrics.trials == 10 and o.output_dir == "elsewhere"
    assert cfg.metrics.master_seed == 2024
    assert cfg.with_overrides() == cfg
    with pytest.raises(ConfigError):
        cfg.with_overrides(seed=-1)
    with pytest.raises(ConfigError):
        cfg.with_overrides(trials=1)
