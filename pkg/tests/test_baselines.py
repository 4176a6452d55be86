import numpy as np
import pytest

from conftest import desk_config
from leobeam import build_system
from leobeam.baselines import S3Assignment, mrt_beamformers, s3_run, zf_beamformers_info, zf_directions
from leobeam.beams import Schedule
from leobeam.rates import sum_rate
from leobeam.wmmse import run_central


def test_mrt_full_budget_and_mask(table1):
    bf = mrt_beamformers(table1.stats, table1.schedule, table1.analog, table1.budget)
    np.testing.assert_allclose(bf.power(table1.analog.gram), table1.budget, rtol=1e-12)
    assert bf.mask_violation() == 0.0
    s, u = 0, table1.schedule.served[0][0]
    w = bf.at(0)[s][:, u]
    g = table1.stats.g_eff[s, u]
    assert abs(np.vdot(w, g.conj())) == pytest.approx(np.linalg.norm(w) * np.linalg.norm(g), rel=1e-12)


def test_mrt_beats_random_directions_on_signal(table1):
    rng = np.random.default_rng(0)
    stats, gram, sched = table1.stats, table1.analog.gram, table1.schedule
    mrt = mrt_beamformers(stats, sched, table1.analog, table1.budget).at(0)
    s = 1
    users = sched.served[s]

    def signal(w):
        return sum(stats.alpha_bar[0, s, u] * abs(stats.g_eff[s, u] @ w[:, u]) for u in users)

    base_norms = np.linalg.norm(mrt[s], axis=0)
    for _ in range(100):
        rnd = np.zeros_like(mrt[s])
        for u in users:
            d = rng.normal(size=rnd.shape[0]) + 1j * rng.normal(size=rnd.shape[0])
            rnd[:, u] = d / np.linalg.norm(d) * base_norms[u]
        assert signal(rnd) <= signal(mrt[s]) * (1 + 1e-12)


def test_zf_nulls_intra_satellite_interference(table1):
    bf, flagged = zf_beamformers_info(table1.stats, table1.schedule, table1.analog, table1.budget)
    assert flagged == []
    np.testing.assert_allclose(bf.power(table1.analog.gram), table1.budget, rtol=1e-12)
    for s, users in enumerate(table1.schedule.served):
        g = table1.stats.g_eff[s, users]
        w = bf.at(0)[s][:, users]
        cross = g @ w
        off = cross - np.diag(np.diag(cross))
        bound = 1e-9 * np.linalg.norm(g, axis=1)[:, None] * np.linalg.norm(w, axis=0)[None, :]
        assert np.all(np.abs(off) <= bound)


def test_zf_equals_mrt_for_orthogonal_channels():
    g = np.diag([2.0, 0.5]).astype(complex)
    w, reg = zf_directions(g)
    assert not reg
    mrt = g.conj().T
    for col in range(2):
        cos = abs(np.vdot(w[:, col], mrt[:, col])) / (np.linalg.norm(w[:, col]) * np.linalg.norm(mrt[:, col]))
        assert cos == pytest.approx(1.0)


def test_zf_rank_deficient_falls_back():
    g = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
    w, reg = zf_directions(g)
    assert reg and np.all(np.isfinite(w))


def test_s3_assignment():
    d = np.array([[1.0, 2.0, 9.0, 1.5], [5.0, 1.0, 8.0, 7.0], [6.0, 6.0, 6.0, 6.0]])
    a = S3Assignment.from_distances(d, 1)
    np.testing.assert_array_equal(a.serving, [0, 1, 2, 0])
    np.testing.assert_array_equal(a.schedule.served[0], [0])      # capped at the nearest member
    np.testing.assert_array_equal(a.schedule.served[1], [1])
    np.testing.assert_array_equal(a.schedule.served[2], [2])


def test_s3_empty_satellite_spends_nothing():
    sy = build_system(desk_config(num_sats=3, num_uts=1), 0)
    bf, rep, info = s3_run(sy.stats, sy.scenario.distances(), 4, sy.sigma2, sy.budget, "mrt", 1024, 120e3)
    power = bf.power(info["analog"].gram)[0]
    assert np.count_nonzero(power) == 1
    assert rep.objective > 0


@pytest.mark.parametrize("scheme", ["wmmse", "mrt", "zf"])
def test_s3_single_satellite_matches_networked(scheme):
    sy = build_system(desk_config(num_sats=1), 2)
    bf, rep, _ = s3_run(sy.stats, sy.scenario.distances(), sy.cfg.num_rfc, sy.sigma2, sy.budget, scheme,
                        1024, 120e3)
    if scheme == "wmmse":
        ref = run_central(sy.stats, sy.schedule, sy.analog, sy.sigma2, sy.budget).bf
    elif scheme == "mrt":
        ref = mrt_beamformers(sy.stats, sy.schedule, sy.analog, sy.budget)
    else:
        ref = zf_beamformers_info(sy.stats, sy.schedule, sy.analog, sy.budget)[0]
    expected = sum_rate(sy.stats, ref, sy.sigma2, 1024, 120e3)
    assert rep.objective == pytest.approx(expected.objective, rel=1e-9)


def test_s3_unknown_scheme(desk):
    with pytest.raises(ValueError, match="unknown"):
        s3_run(desk.stats, desk.scenario.distances(), 4, desk.sigma2, desk.budget, "mmse", 1024, 120e3)


def test_networked_wmmse_beats_s3(table1):
    net = run_central(table1.stats, table1.schedule, table1.analog, table1.sigma2, table1.budget).trace[-1]
    _, rep, _ = s3_run(table1.stats, table1.scenario.distances(), 8, table1.sigma2, table1.budget, "wmmse",
                       1024, 120e3)
    assert net > rep.objective
