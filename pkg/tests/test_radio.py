import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavplace.channel import ArrayConfig, LinkParams, los_channel
from uavplace.errors import ZeroChannel
from uavplace.geometry import CandidateGrid
from uavplace.radio import (Network, build_sinr_matrix, db_to_linear, dbm_to_mw, equal_power,
                            iter_sinr_rows, linear_to_db, mrt_beamformer, precompute_gain_tables,
                            sinr_direct, write_gain_tables, write_matrix_csv)
from uavplace.scenario import build_scenario, prepare
from uavplace.selection import CombinationSpace, combination_to_positions

N0 = 10 ** -3.5


def test_mrt_basis():
    h = np.zeros(6, complex)
    h[0] = 1
    np.testing.assert_array_equal(mrt_beamformer(h), h)


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=8).filter(lambda v: np.linalg.norm(v) > 1e-6))
def test_mrt_gain_and_scale(v):
    h = np.array(v)
    w = mrt_beamformer(h)
    assert np.linalg.norm(w) == pytest.approx(1, abs=1e-12)
    assert abs(np.vdot(h, w)) ** 2 == pytest.approx(np.linalg.norm(h) ** 2, rel=1e-9)
    np.testing.assert_allclose(mrt_beamformer(2 * h), w, atol=1e-12)


def test_mrt_zero():
    with pytest.raises(ZeroChannel):
        mrt_beamformer(np.zeros(3))


@pytest.mark.parametrize("total, n, each", [(1.0, 5, 0.2), (1.0, 1, 1.0), (0.0, 5, 0.0)])
def test_equal_power(total, n, each):
    alloc = equal_power(total, n)
    np.testing.assert_allclose(alloc.per_user, each)
    assert alloc.per_user.sum() <= total + 1e-15


def test_db_conversions():
    assert dbm_to_mw(0) == 1.0
    assert dbm_to_mw(-35) == pytest.approx(3.1623e-4, rel=1e-4)
    for x in (-35.0, -6.58, 0.0, 12.3):
        assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-12)
    np.testing.assert_allclose(db_to_linear([0, 10]), [1, 10])


def _single_link_net(power=1.0, users=((0, 0, 0),), n=6):
    return Network(users=np.array(users, float), serving=np.zeros(len(users), int),
                   alphas=np.ones(len(users)), powers=np.full(len(users), power), n0_mw=N0,
                   params=LinkParams(2.0), cfg=ArrayConfig(n, 0.5))


def test_sinr_direct_single_user():
    net = _single_link_net()
    sinr = sinr_direct([(0, 0, 3)], 0, net)
    # closed form p ||h||^2 / N0 = 1 * 6/(1+9) / 10^-3.5
    assert sinr == pytest.approx(0.6 / N0, rel=1e-12)
    assert sinr == pytest.approx(1897.4, rel=1e-4)
    assert linear_to_db(sinr) == pytest.approx(32.78, abs=0.01)


def test_sinr_direct_zero_power():
    assert sinr_direct([(0, 0, 3)], 0, _single_link_net(power=0.0)) == 0.0


def test_sinr_direct_orthogonal_users():
    # N = 2, half-wavelength: straight-down (sin=1) and horizontal (sin=0) responses are orthogonal
    net = _single_link_net(power=0.5, users=((0, 0, 0), (10, 0, 10)), n=2)
    uav = (0, 0, 10)
    ha = los_channel(uav, (0, 0, 0), 1, net.params, net.cfg)
    hb = los_channel(uav, (10, 0, 10), 1, net.params, net.cfg)
    assert abs(np.vdot(ha, hb)) < 1e-15
    assert sinr_direct([uav], 0, net) == pytest.approx(0.5 * np.linalg.norm(ha) ** 2 / N0, rel=1e-12)
    assert sinr_direct([uav], 1, net) == pytest.approx(0.5 * np.linalg.norm(hb) ** 2 / N0, rel=1e-12)


def test_tables_degenerate():
    net = _single_link_net()
    grid = CandidateGrid(0, [(0, 0, 3)])
    tables = precompute_gain_tables([grid], net)
    assert tables.signal[0][0, 0] == pytest.approx(0.6, rel=1e-12)
    assert tables.intra[0][0, 0] == 0
    S = build_sinr_matrix(CombinationSpace((1,)), tables, net)
    assert S.shape == (1, 1)
    assert S[0, 0] == pytest.approx(sinr_direct([(0, 0, 3)], 0, net), rel=1e-12)


def _assert_assembly_matches(solved, n_pairs, seed):
    sc = solved.scenario
    space = sc.space
    rng = np.random.default_rng(seed)
    for a, k in zip(rng.integers(0, space.size, n_pairs), rng.integers(0, sc.net.n_users, n_pairs)):
        pos = combination_to_positions(int(a), space, sc.grids)
        direct = sinr_direct(pos, int(k), sc.net)
        assert solved.S[a, k] == pytest.approx(direct, rel=1e-9)


def test_assembly_matches_direct_exhaustive(small_solved):
    sc = small_solved.scenario
    for a in range(sc.space.size):
        pos = combination_to_positions(a, sc.space, sc.grids)
        direct = [sinr_direct(pos, k, sc.net) for k in range(sc.net.n_users)]
        np.testing.assert_allclose(small_solved.S[a], direct, rtol=1e-9, atol=0)


def test_assembly_matches_direct_gaussian(small_gaussian):
    _assert_assembly_matches(prepare(small_gaussian), 300, seed=1)


def test_tables_deterministic(small_gaussian):
    t1 = prepare(small_gaussian).tables
    t2 = prepare(small_gaussian).tables
    for name in ("signal", "intra", "inter"):
        for a, b in zip(getattr(t1, name), getattr(t2, name)):
            np.testing.assert_array_equal(a, b)


def test_streaming_equals_materialized(small_solved):
    sc = small_solved.scenario
    blocks = list(iter_sinr_rows(sc.space, small_solved.tables, sc.net, chunk=37))
    np.testing.assert_array_equal(np.concatenate([b for _, b in blocks]), small_solved.S)
    assert [s for s, _ in blocks] == list(range(0, sc.space.size, 37))


def test_sinr_nonnegative(small_solved):
    assert np.all(small_solved.S >= 0) and np.all(np.isfinite(small_solved.S))


def test_phase_rotation_invariance(small_gaussian):
    sc = build_scenario(small_gaussian)
    base = build_sinr_matrix(sc.space, precompute_gain_tables(sc.grids, sc.net), sc.net)
    rng = np.random.default_rng(4)
    sc.net.alphas = sc.net.alphas * np.exp(1j * rng.uniform(0, 2 * np.pi, sc.net.n_users))
    rotated = build_sinr_matrix(sc.space, precompute_gain_tables(sc.grids, sc.net), sc.net)
    np.testing.assert_allclose(rotated, base, rtol=1e-9, atol=0)


def test_noise_increase_lowers_every_sinr(small_solved):
    sc = small_solved.scenario
    sc.net.n0_mw *= 2
    louder = build_sinr_matrix(sc.space, small_solved.tables, sc.net)
    pos = small_solved.S > 0
    assert np.all(louder[pos] < small_solved.S[pos])


def test_removing_interferer_never_hurts(small_solved):
    sc = small_solved.scenario
    net = sc.net
    rng = np.random.default_rng(2)
    for a in rng.integers(0, sc.space.size, 20):
        pos = combination_to_positions(int(a), sc.space, sc.grids)
        keep = net.serving != 3
        reduced = Network(net.users[keep], net.serving[keep], net.alphas[keep], net.powers[keep],
                          net.n0_mw, net.params, net.cfg)
        for k_new, k_old in enumerate(np.flatnonzero(keep)):
            assert sinr_direct(pos[:3], k_new, reduced) >= sinr_direct(pos, int(k_old), net) * (1 - 1e-12)


def test_dumps(tmp_path, small_solved):
    write_matrix_csv(tmp_path / "S.csv", small_solved.S, seed=5)
    lines = (tmp_path / "S.csv").read_text().splitlines()
    assert lines[0] == "# rows=256 cols=12 seed=5"
    assert len(lines) == 257
    np.testing.assert_array_equal(np.loadtxt(tmp_path / "S.csv", delimiter=","), small_solved.S)
    write_gain_tables(tmp_path / "G.csv", small_solved.tables, seed=5)
    lines = (tmp_path / "G.csv").read_text().splitlines()
    assert lines[0] == "# regions=4 counts=4x4x4x4 seed=5"
    assert len(lines) == 2 + 3 * 4 * 4 * 12
