import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynarena.baselines import REGISTRY, make_rater
from dynarena.baselines.active_ranking import confidence_radius
from dynarena.baselines.base import UnknownModelError, batch_score
from dynarena.baselines.elo import INITIAL_RATING, K_FACTOR, expected_score
from dynarena.baselines.glicko2 import R0, RD0, glicko2_update
from dynarena.baselines.rank_centrality import rank_centrality, transition_matrix
from dynarena.baselines.trueskill import trueskill_1v1
from dynarena.rating import MicroBatchResult

from oracles import power_iteration_rank_centrality

WIN, LOSS, DRAW = MicroBatchResult(15, 0, 0), MicroBatchResult(0, 15, 0), MicroBatchResult(5, 5, 5)


def _feed_noiseless(rater, skill):
    ms = list(rater.propose())
    if len(ms) == 2:
        a, b = ms
        rater.observe(a, b, WIN if skill[a] > skill[b] else LOSS)
        return
    counts = [(15, 0, 0) if skill[x] > skill[y] else (0, 15, 0) for x, y in itertools.combinations(ms, 2)]
    rater.observe_list(ms, np.array(counts))


# -- shared interface --------------------------------------------------------------------


def test_batch_score_mapping():
    assert batch_score(WIN) == 1.0 and batch_score(LOSS) == 0.0
    assert batch_score(DRAW) == 0.5
    assert batch_score(MicroBatchResult(0, 0, 0)) is None


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_conformance(name):
    rng = np.random.default_rng(1)
    r = make_rater(name, seed=3)
    ids = [f"m{i}" for i in range(6)]
    for m in ids:
        r.register(m)
    for _ in range(1000):
        ms = list(r.propose())
        assert len(set(ms)) == len(ms) >= 2 and set(ms) <= set(ids)
        if len(ms) == 2:
            r.observe(ms[0], ms[1], MicroBatchResult(*rng.multinomial(15, [0.4, 0.4, 0.2])))
        else:
            q = len(ms) * (len(ms) - 1) // 2
            r.observe_list(ms, rng.multinomial(15, [0.4, 0.4, 0.2], size=q))
    order = r.rank()
    assert sorted(order) == sorted(ids)
    assert set(r.scores()) == set(ids)
    r.inject("late")
    assert sorted(r.rank()) == sorted(ids + ["late"])
    with pytest.raises(ValueError):
        r.register("late")
    with pytest.raises(UnknownModelError):
        r.observe("m0", "ghost", WIN)


@pytest.mark.parametrize("name", sorted(set(REGISTRY) - {"rucb"}))
def test_noiseless_outcomes_recover_true_order(name):
    ids = [f"m{i}" for i in range(8)]
    skill = {m: i for i, m in enumerate(ids)}
    truth = sorted(ids, key=lambda m: -skill[m])
    r = make_rater(name, seed=0)
    for m in ids:
        r.register(m)
    for _ in range(3000):
        _feed_noiseless(r, skill)
    assert r.rank() == truth


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_reset_restores_fresh_state(name):
    fresh = make_rater(name, seed=2)
    used = make_rater(name, seed=2)
    for m in ("a", "b", "c"):
        fresh.register(m)
        used.register(m)
    for _ in range(50):
        _feed_noiseless(used, {"a": 2, "b": 1, "c": 0})
    used.reset()
    assert used.scores() == fresh.scores()
    assert [used.propose() for _ in range(5)] == [fresh.propose() for _ in range(5)]


# -- Elo ---------------------------------------------------------------------------------------


def test_elo_equal_ratings_win_moves_sixteen_points():
    r = make_rater("elo")
    r.register("a")
    r.register("b")
    r.observe("a", "b", WIN)
    s = r.scores()
    assert s["a"] == INITIAL_RATING + K_FACTOR / 2 == 1516.0
    assert s["b"] == 1484.0


def test_elo_draw_between_equals_is_a_fixed_point():
    r = make_rater("elo")
    r.register("a")
    r.register("b")
    r.observe("a", "b", DRAW)
    assert r.scores() == {"a": 1500.0, "b": 1500.0}


@given(st.floats(0, 3000), st.floats(0, 3000))
def test_elo_expectation_is_complementary(x, y):
    assert expected_score(x, y) + expected_score(y, x) == pytest.approx(1.0, abs=1e-12)


# -- Glicko-2 ----------------------------------------------------------------------------------


def test_glicko2_draw_with_equal_opponent_keeps_rating():
    r, rd, vol = glicko2_update(R0, RD0, 0.06, R0, RD0, 0.5)
    assert r == pytest.approx(R0, abs=1e-9)
    assert rd < RD0


def test_glicko2_draw_against_certain_opponent_keeps_rating():
    r, rd, vol = glicko2_update(1500.0, 200.0, 0.06, 1500.0, 0.0, 0.5)
    assert r == pytest.approx(1500.0, abs=1e-9)


def test_glicko2_single_game_matches_direct_evaluation():
    mu, phi = 0.0, 200 / 173.7178
    mu_j, phi_j = (1400 - 1500) / 173.7178, 30 / 173.7178
    g = 1 / np.sqrt(1 + 3 * phi_j**2 / np.pi**2)
    e = 1 / (1 + np.exp(-g * (mu - mu_j)))
    r, rd, vol = glicko2_update(1500, 200, 0.06, 1400, 30, 1.0)
    v = 1 / (g * g * e * (1 - e))
    phi_star = np.sqrt(phi**2 + vol**2)
    phi2 = 1 / np.sqrt(1 / phi_star**2 + 1 / v)
    assert rd == pytest.approx(173.7178 * phi2, rel=1e-12)
    assert r == pytest.approx(1500 + 173.7178 * phi2**2 * g * (1 - e), rel=1e-12)
    assert 0.0599 < vol < 0.0601


# -- TrueSkill ---------------------------------------------------------------------------------


def test_trueskill_win_is_mirror_of_loss():
    a = trueskill_1v1(25.0, 8.0, 22.0, 5.0, 1.0)
    b = trueskill_1v1(22.0, 5.0, 25.0, 8.0, 0.0)
    assert a == pytest.approx((b[2], b[3], b[0], b[1]), abs=1e-12)
    assert a[0] > 25.0 and a[2] < 22.0 and a[1] < 8.0 and a[3] < 5.0


def test_trueskill_draw_between_equals_keeps_means():
    mu_a, sa, mu_b, sb = trueskill_1v1(25.0, 8.0, 25.0, 8.0, 0.5)
    assert mu_a == pytest.approx(25.0, abs=1e-12) and mu_b == pytest.approx(25.0, abs=1e-12)
    assert sa < 8.0 and sb < 8.0


# -- Rank Centrality ---------------------------------------------------------------------------


def test_rank_centrality_two_model_dominance():
    res = rank_centrality(np.array([[0.0, 9.0], [1.0, 0.0]]))
    assert res.scores[0] > res.scores[1] and not res.partial
    assert res.scores == pytest.approx([0.9, 0.1])


def test_rank_centrality_symmetric_wins_give_uniform_scores():
    w = np.full((4, 4), 3.0)
    np.fill_diagonal(w, 0.0)
    assert rank_centrality(w).scores == pytest.approx([0.25] * 4, abs=1e-12)
    r = make_rater("rank_centrality")
    for m in ("d", "b", "c", "a"):
        r.register(m)
    assert r.rank() == ["a", "b", "c", "d"]


def test_rank_centrality_cycle_is_near_uniform():
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 2] = w[2, 0] = 10.0
    w[1, 0] = w[2, 1] = w[0, 2] = 1.0
    assert rank_centrality(w).scores == pytest.approx([1 / 3] * 3, abs=0.05)


def test_rank_centrality_flags_disconnected_graph():
    w = np.zeros((4, 4))
    w[0, 1], w[2, 3] = 2.0, 1.0
    res = rank_centrality(w)
    assert res.partial and len(set(res.components.tolist())) == 2


@settings(max_examples=60)
@given(st.integers(2, 6), st.integers(0, 2**31), st.sampled_from([0.0, 0.2, 1.0]))
def test_rank_centrality_matches_power_iteration(n, seed, reg):
    rng = np.random.default_rng(seed)
    w = rng.integers(1, 8, size=(n, n)).astype(float)
    np.fill_diagonal(w, 0.0)
    p = transition_matrix(w, reg)
    assert p.sum(axis=1) == pytest.approx(np.ones(n), abs=1e-12)
    ref = power_iteration_rank_centrality(w.tolist(), reg)
    assert rank_centrality(w, reg).scores == pytest.approx(ref, abs=1e-9)


# -- bandits -------------------------------------------------------------------------------------


def _bernoulli_batch(rng, p):
    return WIN if rng.random() < p else LOSS


def test_rucb_finds_dominant_arm():
    hits = 0
    for trial in range(20):
        rng = np.random.default_rng(100 + trial)
        r = make_rater("rucb", seed=trial)
        ids = [f"m{i}" for i in range(6)]
        for m in ids:
            r.register(m)
        for _ in range(500):
            a, b = r.propose()
            if a == b:
                continue
            p = 0.8 if a == "m3" else 0.2 if b == "m3" else 0.5
            r.observe(a, b, _bernoulli_batch(rng, p))
        hits += r.rank()[0] == "m3"
    assert hits >= 19


def test_active_ranking_orders_well_separated_arms():
    # P(i beats j) = 0.9 for i above j
    hits = 0
    for trial in range(20):
        rng = np.random.default_rng(200 + trial)
        r = make_rater("active_ranking", seed=trial)
        for m in ("x", "y", "z"):
            r.register(m)
        level = {"x": 2, "y": 1, "z": 0}
        for _ in range(600):
            a, b = r.propose()
            p = 0.9 if level[a] > level[b] else 0.1
            r.observe(a, b, _bernoulli_batch(rng, p))
        hits += r.rank() == ["x", "y", "z"]
    assert hits >= 19


def test_active_ranking_radius_shrinks():
    rs = [confidence_radius(n, 5) for n in (1, 10, 100, 1000, 10_000)]
    assert rs == sorted(rs, reverse=True)
    assert confidence_radius(0, 5) == float("inf")


def test_ksort_noiseless_lists_recover_order():
    ids = [f"m{i}" for i in range(10)]
    skill = {m: i for i, m in enumerate(ids)}
    r = make_rater("ksort", seed=4)
    for m in ids:
        r.register(m)
    for _ in range(300):
        ms = r.propose()
        assert len(ms) == 4
        _feed_noiseless(r, skill)
    assert r.rank() == sorted(ids, key=lambda m: -skill[m])
