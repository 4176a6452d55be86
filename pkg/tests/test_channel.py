import numpy as np
import pytest

from conftest import desk_config
from leobeam.beams import build_analog_beamformer, effective_channels, schedule_users
from leobeam.channel import (PEAK_GAIN, array_phases, build_channel_stats, free_space_loss_db, path_loss_db,
                             radiation_gain, rician_moments, sample_alpha)
from leobeam.config import AtmosphereModel, ScintillationModel, SystemConfig
from leobeam.geometry import generate_scenario


def test_free_space_loss_reference_value():
    # 500 km at 12.7 GHz
    expected = 20 * np.log10(5e5) + 20 * np.log10(12.7e9) - 147.55
    assert free_space_loss_db(5e5, 12.7e9) == pytest.approx(expected)
    assert free_space_loss_db(5e5, 12.7e9) == pytest.approx(168.51, abs=0.01)


def test_rician_moments_preserve_gamma():
    gamma = np.array([1e-17, 3e-18])
    kappa = np.array([10 ** 1.5, 100.0])
    a_bar, beta = rician_moments(gamma, kappa)
    np.testing.assert_allclose(2 * a_bar ** 2 + 2 * beta, gamma, rtol=1e-12)
    np.testing.assert_allclose(a_bar ** 2 / beta, kappa, rtol=1e-12)
    a_inf, b_inf = rician_moments(gamma, np.inf)
    assert np.all(b_inf == 0)
    np.testing.assert_allclose(2 * a_inf ** 2, gamma)


def test_sampled_gains_match_moments(rng):
    a = sample_alpha(0.3, 0.02, rng, size=400_000)
    assert np.mean(a) == pytest.approx(0.3 + 0.3j, abs=2e-3)
    assert np.var(a) == pytest.approx(0.04, rel=1e-2)
    assert np.mean(np.abs(a) ** 2) == pytest.approx(2 * 0.09 + 0.04, rel=1e-2)


def test_radiation_gain_pattern():
    assert radiation_gain(np.pi / 2) == pytest.approx(PEAK_GAIN)
    assert radiation_gain(0.0) == pytest.approx(0.0, abs=1e-15)
    assert radiation_gain(-0.2) == 0.0


def test_array_phases_unit_modulus_and_kronecker_order():
    a = array_phases((4, 2), 0.3, 0.7)
    assert a.shape == (8,)
    np.testing.assert_allclose(np.abs(a), 1.0)
    a_h = array_phases((4, 1), 0.3, 0.7)
    a_v = array_phases((1, 2), 0.3, 0.7)
    np.testing.assert_allclose(a, np.kron(a_h, a_v))
    np.testing.assert_allclose(array_phases((4, 4), 0.0, np.pi / 2), np.ones(16), atol=1e-12)


def test_single_antenna_effective_channel_is_the_radiation_gain():
    cfg = desk_config(panel_dims=(1, 1), num_rfc=1)
    scn = generate_scenario(cfg, 0)
    stats = build_channel_stats(cfg, scn)
    sched = schedule_users(scn.distances(), cfg.num_rfc)
    full = effective_channels(stats, build_analog_beamformer(stats, sched))
    served = [(s, u) for s in range(2) for u in sched.served[s]]
    for s, u in served:
        assert full.g_eff[s, u, 0] == pytest.approx(stats.gain[s, u])


def test_gamma_decreases_over_the_band_and_flat_option():
    cfg = SystemConfig(num_eval_subcarriers=4)
    scn = generate_scenario(cfg, 0)
    pl = path_loss_db(cfg, scn, cfg.eval_subcarriers())
    assert np.all(np.diff(pl, axis=0) > 0)
    flat = path_loss_db(cfg.replace(flat_gamma=True), scn, cfg.eval_subcarriers())
    np.testing.assert_allclose(flat, flat[:1].repeat(4, axis=0))


def test_atmosphere_and_scintillation_options():
    cfg = SystemConfig(atmosphere=AtmosphereModel(model="constant", loss_db=0.0))
    scn = generate_scenario(cfg, 0)
    base = path_loss_db(cfg, scn, [0])
    more = path_loss_db(cfg.replace(scintillation=ScintillationModel(loss_db=1.5)), scn, [0])
    np.testing.assert_allclose(more - base, 1.5)
    rnd = cfg.replace(scintillation=ScintillationModel(model="lognormal", sigma_db=2.0))
    a, b = path_loss_db(rnd, scn, [0]), path_loss_db(rnd, scn, [0])
    np.testing.assert_array_equal(a, b)
    assert np.std(a - base) > 0.5
    zen = path_loss_db(SystemConfig(), scn, [0]) - base
    assert np.all(zen >= 0.5 - 1e-12)


def test_stats_subset_consistency():
    cfg = SystemConfig()
    stats = build_channel_stats(cfg, generate_scenario(cfg, 0))
    sub = stats.subset([1, 3], [0, 5, 7])
    assert sub.gamma.shape == (1, 2, 3)
    assert sub.gamma[0, 1, 2] == stats.gamma[0, 3, 7]
    np.testing.assert_array_equal(sub.phases[0, 1], stats.phases[1, 5])
