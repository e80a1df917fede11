import numpy as np
import pytest

from oracles import bloch_grid_discord
from synclab import qmat
from synclab.discord import (
    DiscordConfig,
    MeasurementFamily,
    _Objective,
    check_theorem2,
    discord_oz_given,
    discord_z_given,
    distdis_decomposition,
    local_search,
    measure,
    minimize_discord,
    mutual_information,
)
from synclab.sync import two_clock_sync_state

LN2 = np.log(2)
COMPUTATIONAL = MeasurementFamily.from_basis(np.eye(2))


def entropy(m):
    return qmat.von_neumann_entropy(m)


@pytest.fixture(scope="module")
def sigma2():
    return two_clock_sync_state(2).sigma


def classical_correlated():
    return np.diag([0.5, 0, 0, 0.5]).astype(complex)


def test_family_validation():
    with pytest.raises(ValueError):
        MeasurementFamily("A", (np.diag([1.0, 0]),))
    with pytest.raises(ValueError):
        MeasurementFamily("A", (np.diag([1.0, 0]), np.diag([1.0, 1.0]) / 2))
    with pytest.raises(ValueError):
        MeasurementFamily("C", (np.eye(2),))
    coarse = MeasurementFamily("A", (np.diag([1.0, 1, 0]), np.diag([0, 0, 1.0])))
    assert coarse.dim == 3


def test_measure_product_state():
    rng = np.random.default_rng(0)
    ra, rb = qmat.random_density(2, rng), qmat.random_density(3, rng)
    _, vecs = np.linalg.eigh(ra)
    out = measure(np.kron(ra, rb), MeasurementFamily.from_basis(vecs), (2, 3))
    for r in out.reduced_B:
        np.testing.assert_allclose(r, rb, atol=1e-12)


def test_measure_unselected_state_is_dephasing():
    rng = np.random.default_rng(1)
    sigma = qmat.random_density(6, rng)
    m = MeasurementFamily.from_basis(qmat.random_unitary(2, rng))
    out = measure(sigma, m, (2, 3))
    post = sum(p * s for p, s in zip(out.probs, out.selected_states))
    ref = sum(np.kron(p, np.eye(3)) @ sigma @ np.kron(p, np.eye(3)) for p in m.projections)
    np.testing.assert_allclose(post, ref, atol=1e-10)
    assert out.probs.sum() == pytest.approx(1.0, abs=1e-9)
    for p, s in zip(m.projections, out.selected_states):
        lift = np.kron(p, np.eye(3))
        np.testing.assert_allclose(lift @ s @ lift, s, atol=1e-9)


def test_measure_drops_impossible_outcomes():
    out = measure(np.kron(np.diag([1.0, 0]), np.eye(2) / 2), COMPUTATIONAL, (2, 2))
    assert len(out.probs) == 1


def test_measure_two_clock_state(sigma2):
    np.testing.assert_allclose(measure(sigma2, COMPUTATIONAL, (2, 2)).probs, [0.5, 0.5], atol=1e-12)


def test_mutual_information():
    rng = np.random.default_rng(2)
    prod = np.kron(qmat.random_density(2, rng), qmat.random_density(2, rng))
    assert mutual_information(prod, (2, 2)) == pytest.approx(0.0, abs=1e-10)
    bell = qmat.projector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert mutual_information(bell, (2, 2)) == pytest.approx(2 * LN2)
    assert mutual_information(two_clock_sync_state(2).sigma, (2, 2)) == pytest.approx(0.5 * LN2, abs=1e-12)


def test_oz_discord_zero_cases():
    assert discord_oz_given(classical_correlated(), COMPUTATIONAL, (2, 2)) == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(3)
    ra = qmat.random_density(2, rng)
    _, vecs = np.linalg.eigh(ra)
    prod = np.kron(ra, qmat.random_density(2, rng))
    assert discord_oz_given(prod, MeasurementFamily.from_basis(vecs), (2, 2)) == pytest.approx(0.0, abs=1e-10)


def test_oz_discord_term_by_term(sigma2):
    # assemble the entropies by hand with explicit slicing
    s4 = sigma2.reshape(2, 2, 2, 2)
    cond = 0.0
    for j in range(2):
        block = s4[j, :, j, :]
        p = np.trace(block).real
        cond += p * entropy(block / p)
    expected = entropy(np.einsum("ibjb->ij", s4)) - entropy(sigma2) + cond
    assert discord_oz_given(sigma2, COMPUTATIONAL, (2, 2)) == pytest.approx(expected, abs=1e-12)
    # sigma_j^B = I/2 for both outcomes, so the value is ln 2 - (3/2) ln 2 + ln 2
    assert expected == pytest.approx(0.5 * LN2, abs=1e-12)


def test_z_discord_product_state_zero():
    rng = np.random.default_rng(4)
    ra = qmat.random_density(2, rng)
    _, vecs = np.linalg.eigh(ra)
    prod = np.kron(ra, qmat.random_density(3, rng))
    assert discord_z_given(prod, MeasurementFamily.from_basis(vecs), (2, 3)) == pytest.approx(0.0, abs=1e-10)
    assert distdis_decomposition(prod, MeasurementFamily.from_basis(vecs), (2, 3)) == pytest.approx((0, 0, 0), abs=1e-10)


def test_z_discord_two_clock_state_matches_distdis(sigma2):
    val = discord_z_given(sigma2, COMPUTATIONAL, (2, 2))
    t1, t2, total = distdis_decomposition(sigma2, COMPUTATIONAL, (2, 2))
    assert val == pytest.approx(total, abs=1e-9)
    assert t1 >= 0 and t2 >= 0


def test_distdis_block_diagonal_state_has_no_first_term():
    rng = np.random.default_rng(5)
    sigma = qmat.random_density(6, rng)
    dephased = sum(np.kron(p, np.eye(3)) @ sigma @ np.kron(p, np.eye(3)) for p in COMPUTATIONAL.projections)
    assert distdis_decomposition(dephased, COMPUTATIONAL, (2, 3))[0] == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2)])
@pytest.mark.parametrize("side", ["A", "B"])
def test_distdis_random(dims, side):
    rng = np.random.default_rng([6, dims[1], ord(side)])
    for _ in range(50):
        sigma = qmat.random_density(dims[0] * dims[1], rng)
        d = dims[0] if side == "A" else dims[1]
        m = MeasurementFamily.from_basis(qmat.random_unitary(d, rng), side)
        t1, t2, total = distdis_decomposition(sigma, m, dims)
        z = discord_z_given(sigma, m, dims)
        assert abs(total - z) < 1e-8
        assert t1 >= 0 and t2 >= 0 and z >= 0
        # z - oz = S(sum p_j sigma_j^meas) - S(sigma^meas)
        out = measure(sigma, m, dims)
        meas = out.reduced_A if side == "A" else out.reduced_B
        gap = entropy(sum(p * r for p, r in zip(out.probs, meas))) - entropy(qmat.partial_trace(sigma, *dims, side))
        assert z - discord_oz_given(sigma, m, dims) == pytest.approx(gap, abs=1e-8)


def test_distdis_coarse_family():
    rng = np.random.default_rng(7)
    sigma = qmat.random_density(6, rng)
    m = MeasurementFamily("A", (np.diag([1.0, 1, 0]), np.diag([0, 0, 1.0])))
    assert distdis_decomposition(sigma, m, (3, 2))[2] == pytest.approx(discord_z_given(sigma, m, (3, 2)), abs=1e-8)


@pytest.mark.parametrize("variant", ["z", "oz"])
def test_fast_objective_matches_generic(variant):
    rng = np.random.default_rng(8)
    generic = discord_z_given if variant == "z" else discord_oz_given
    for dims in ((2, 2), (3, 2), (3, 4)):
        for _ in range(10):
            sigma = qmat.random_density(dims[0] * dims[1], rng)
            u = qmat.random_unitary(dims[0], rng)
            fast = _Objective(sigma, dims, variant)(u)
            assert fast == pytest.approx(generic(sigma, MeasurementFamily.from_basis(u), dims), abs=1e-10)


def test_local_search_never_worsens():
    rng = np.random.default_rng(9)
    sigma = qmat.random_density(9, rng)
    obj = _Objective(sigma, (3, 3), "z")
    start = qmat.random_unitary(3, rng)
    basis, value = local_search(obj, start)
    assert value <= obj(start)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(3), atol=1e-10)


def test_minimize_product_and_classical():
    rng = np.random.default_rng(10)
    prod = np.kron(qmat.random_density(2, rng), qmat.random_density(2, rng))
    cfg = DiscordConfig(restarts=4, seed=1)
    for variant in ("z", "oz"):
        assert minimize_discord(prod, (2, 2), "A", variant, cfg).value == pytest.approx(0.0, abs=1e-7)
        assert minimize_discord(classical_correlated(), (2, 2), "B", variant, cfg).value == pytest.approx(0.0, abs=1e-7)


def test_minimize_matches_grid_oracle(sigma2):
    oracle, theta, phi = bloch_grid_discord(sigma2)
    res = minimize_discord(sigma2, (2, 2), "A", "z", DiscordConfig(restarts=8, seed=7, grid=True))
    assert abs(res.value - oracle) < 1e-6
    # pure restarts without the grid reach the same value
    plain = minimize_discord(sigma2, (2, 2), "A", "z", DiscordConfig(restarts=8, seed=7))
    assert abs(plain.value - oracle) < 1e-6


def test_minimize_not_above_any_probe():
    rng = np.random.default_rng(11)
    sigma = qmat.random_density(9, rng)
    res = minimize_discord(sigma, (3, 3), "A", "z", DiscordConfig(restarts=6, seed=3))
    for _ in range(30):
        m = MeasurementFamily.from_basis(qmat.random_unitary(3, rng))
        assert res.value <= discord_z_given(sigma, m, (3, 3)) + 1e-12
    assert res.value == pytest.approx(discord_z_given(sigma, MeasurementFamily.from_basis(res.basis), (3, 3)), abs=1e-10)


def test_minimize_deterministic_and_monotone_in_restarts():
    rng = np.random.default_rng(12)
    sigma = qmat.random_density(9, rng)
    a = minimize_discord(sigma, (3, 3), "A", "z", DiscordConfig(restarts=3, seed=5, threads=1))
    b = minimize_discord(sigma, (3, 3), "A", "z", DiscordConfig(restarts=3, seed=5, threads=3))
    assert a.value == b.value
    np.testing.assert_array_equal(a.basis, b.basis)
    c = minimize_discord(sigma, (3, 3), "A", "z", DiscordConfig(restarts=6, seed=5))
    assert c.value <= a.value + 1e-12


def test_minimize_side_b_uses_swap():
    rng = np.random.default_rng(13)
    sigma = qmat.random_density(6, rng)
    cfg = DiscordConfig(restarts=4, seed=2)
    res = minimize_discord(sigma, (2, 3), "B", "z", cfg)
    assert res.basis.shape == (3, 3)
    direct = discord_z_given(sigma, MeasurementFamily.from_basis(res.basis, "B"), (2, 3))
    assert res.value == pytest.approx(direct, abs=1e-10)


def test_two_clock_discord_symmetric_and_positive():
    s = two_clock_sync_state(3)
    cfg = DiscordConfig(restarts=8, seed=0)
    ba = minimize_discord(s.sigma, s.dims, "A", "z", cfg).value
    ab = minimize_discord(s.sigma, s.dims, "B", "z", cfg).value
    assert ba == pytest.approx(ab, abs=1e-8)
    assert ba > 0.1


def test_theorem2_n2():
    rep = check_theorem2(2, cfg=DiscordConfig(restarts=8, seed=0, grid=True))
    assert rep.holds
    assert rep.rhs == pytest.approx(1 / (256 * (rep.dt * rep.dE) ** 2))
    assert rep.delta_BA == pytest.approx(rep.delta_AB, abs=1e-8)
    assert rep.rhs < rep.delta_BA


def test_cross_block_matches_explicit_slice():
    rng = np.random.default_rng(14)
    sigma = qmat.random_density(6, rng)
    obj = _Objective(sigma, (2, 3), "z")
    u, v = qmat.random_unitary(2, rng).T
    ref = np.kron(u.conj()[None, :], np.eye(3)) @ sigma @ np.kron(v[:, None], np.eye(3))
    np.testing.assert_allclose(obj.cross_block(u, v), ref, atol=1e-12)
