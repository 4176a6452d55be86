import numpy as np
import pytest

from leobeam.config import ConfigError, SystemConfig, config_from_dict, load_config, save_config


def test_reference_defaults():
    cfg = SystemConfig()
    assert cfg.carrier_freq_hz == 12.7e9
    assert cfg.subcarrier_spacing_hz == 120e3
    assert cfg.num_subcarriers == 1024
    assert cfg.power_budget_dbm == 50.0
    assert cfg.noise_psd_dbm_hz == -173.855
    assert cfg.noise_figure_db == 10.0
    assert (cfg.num_sats, cfg.num_uts, cfg.num_rfc, cfg.num_antennas) == (4, 16, 8, 256)


def test_derived_power_and_noise():
    cfg = SystemConfig()
    assert cfg.power_per_subcarrier_w == pytest.approx(100.0 / 1024)
    # -173.855 dBm/Hz + 10 dB over 120 kHz
    expected = 10 ** ((-173.855 + 10 - 30) / 10) * 120e3
    assert cfg.noise_power_w == pytest.approx(expected, rel=1e-12)
    assert cfg.num_served == 8


def test_eval_subcarriers_evenly_strided():
    cfg = SystemConfig(num_eval_subcarriers=4)
    np.testing.assert_array_equal(cfg.eval_subcarriers(), [0, 256, 512, 768])
    np.testing.assert_array_equal(SystemConfig().eval_subcarriers(), [0])


def test_yaml_round_trip(tmp_path):
    cfg = SystemConfig(num_sats=3, panel_dims=(8, 4), power_budget_dbm=42.5)
    path = tmp_path / "c.yaml"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_numeric_strings_and_nested_sections(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("solver:\n  wmmse_tol: 1e-5\npdd:\n  rho0: 2\natmosphere:\n  model: constant\n  loss_db: 0.3\n")
    cfg = load_config(path)
    assert cfg.solver.wmmse_tol == 1e-5
    assert cfg.pdd.rho0 == 2.0
    assert cfg.atmosphere.model == "constant"


@pytest.mark.parametrize("data, key", [
    ({"num_sat": 3}, "num_sat"),
    ({"solver": {"tolerance": 1}}, "solver.tolerance"),
    ({"num_uts": 0}, "num_uts"),
    ({"num_rfc": 2.5}, "num_rfc"),
    ({"rician_range_db": [20, 15]}, "rician_range_db"),
    ({"pdd": {"q": 1.5}}, "pdd.q"),
    ({"scintillation": {"model": "gamma"}}, "scintillation.model"),
    ({"panel_dims": [16]}, "panel_dims"),
])
def test_invalid_configs_name_the_key(data, key):
    with pytest.raises(ConfigError, match=key):
        config_from_dict(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("num_sats: [1, 2\n")
    with pytest.raises(ConfigError, match="parse error"):
        load_config(bad)
