import math

import numpy as np
import pytest

from alsrec import engine
from alsrec.engine import (AlsRecommender, Hyperparams, ModelParams,
                           als_item_step, als_user_step, bias_item_step,
                           bias_user_step, init_params, objective, predict,
                           train)
from alsrec.sparse import BY_ITEM, BY_USER, from_triples, transpose

from conftest import naive_objective, random_csr_pair, ridge_solve_oracle


def make_params(n_users, n_items, k, mu=3.5, seed=0):
    return init_params(Hyperparams(k=k, seed=seed), n_users, n_items, mu)


class TestHyperparams:
    @pytest.mark.parametrize("kwargs", [
        {"k": -1}, {"lam": 0.0}, {"tau": 0.0}, {"tau": -0.1}, {"epochs": 0},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            Hyperparams(**kwargs)


class TestInit:
    def test_bias_only_degenerate(self):
        p = make_params(3, 4, k=0)
        assert p.U.shape == (3, 0) and p.V.shape == (4, 0)
        assert not p.b_user.any() and not p.b_item.any()

    def test_trait_std_matches_one_over_sqrt_k(self):
        p = init_params(Hyperparams(k=4, seed=11), 125_000, 125_000, 3.5)
        draws = np.concatenate([p.U.ravel(), p.V.ravel()])
        # 1e6 draws; sample std within 1% of 1/sqrt(4)
        assert abs(draws.std() - 0.5) < 0.005
        assert abs(draws.mean()) < 0.01

    def test_same_seed_bit_identical(self):
        a = make_params(5, 6, k=3, seed=9)
        b = make_params(5, 6, k=3, seed=9)
        assert np.array_equal(a.U, b.U) and np.array_equal(a.V, b.V)


class TestBiasSteps:
    def test_single_rating_closed_form(self):
        # one rating r=4.5, mu=3.5, b_i=0, lam=0.1, tau=0.05 -> 0.1/(0.15) = 2/3
        by_user = from_triples([0], [0], [4.5], 1, 1, BY_USER)
        p = make_params(1, 1, k=0)
        h = Hyperparams(k=0, lam=0.1, tau=0.05)
        bias_user_step(p, by_user, h)
        assert p.b_user[0] == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_symmetric_item_case(self):
        by_item = from_triples([0], [0], [4.5], 1, 1, BY_ITEM)
        p = make_params(1, 1, k=0)
        bias_item_step(p, by_item, Hyperparams(k=0, lam=0.1, tau=0.05))
        assert p.b_item[0] == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_empty_row_gets_zero(self):
        by_user = from_triples([1], [0], [4.0], 2, 1, BY_USER)
        p = make_params(2, 1, k=0)
        p.b_user[:] = 9.9
        bias_user_step(p, by_user, Hyperparams(k=0))
        assert p.b_user[0] == 0.0

    def test_matches_scalar_brute_force_minimizer(self):
        rng = np.random.default_rng(13)
        by_user, _ = random_csr_pair(rng, n_users=4, n_items=6)
        h = Hyperparams(k=0, lam=0.3, tau=0.2)
        p = make_params(4, 6, k=0, mu=float(by_user.values.mean()))
        p.b_item[:] = rng.normal(0, 0.2, 6)
        bias_user_step(p, by_user, h)
        # refine a grid around the closed-form answer for user 0
        u = 0
        cols, vals = by_user.row(u)
        def loss(b):
            return h.lam * np.sum((vals - p.mu - b - p.b_item[cols]) ** 2) + h.tau * b * b
        lo, hi = -2.0, 2.0
        for _ in range(60):
            grid = np.linspace(lo, hi, 41)
            best = grid[np.argmin([loss(b) for b in grid])]
            span = (hi - lo) / 40
            lo, hi = best - span, best + span
        assert p.b_user[u] == pytest.approx(best, abs=1e-6)

    def test_swap_roles_transpose_equivalence(self):
        rng = np.random.default_rng(14)
        by_user, by_item = random_csr_pair(rng, n_users=6, n_items=8)
        h = Hyperparams(k=0, lam=0.2, tau=0.1)
        mu = float(by_user.values.mean())
        p = make_params(6, 8, k=0, mu=mu)
        p.b_item[:] = rng.normal(0, 0.1, 8)
        q = ModelParams(mu, p.b_item.copy(), p.b_user.copy(),
                        np.zeros((8, 0)), np.zeros((6, 0)))
        bias_user_step(p, by_user, h)
        bias_item_step(q, transpose(by_item), h)  # transposed world: items act as users
        assert np.allclose(p.b_user, q.b_item, atol=0)


class TestAlsSteps:
    def test_empty_row_zeroed(self):
        by_user = from_triples([1], [0], [4.0], 2, 2, BY_USER)
        p = make_params(2, 2, k=3, seed=2)
        als_user_step(p, by_user, Hyperparams(k=3))
        assert p.b_user[0] == 0.0
        assert np.all(p.U[0] == 0.0)

    def test_matches_dense_ridge_oracle(self):
        rng = np.random.default_rng(15)
        h = Hyperparams(k=3, lam=0.1, tau=0.25)
        by_user = from_triples([0] * 5, range(5), rng.uniform(1, 5, 5), 1, 5, BY_USER)
        p = make_params(1, 5, k=3, mu=3.0, seed=3)
        p.b_item[:] = rng.normal(0, 0.1, 5)
        u_before = p.U[0].copy()
        als_user_step(p, by_user, h)
        cols, vals = by_user.row(0)
        base = vals - p.mu - p.b_item[cols]
        b_expect = h.lam * (base - p.V[cols] @ u_before).sum() / (h.tau + h.lam * 5)
        w_expect = ridge_solve_oracle(p.V[cols], base - b_expect, h.lam, h.tau)
        assert p.b_user[0] == pytest.approx(b_expect, abs=1e-12)
        assert np.allclose(p.U[0], w_expect, atol=1e-8)

    def test_stationary_after_update(self):
        rng = np.random.default_rng(16)
        by_user, by_item = random_csr_pair(rng, n_users=5, n_items=6)
        h = Hyperparams(k=2, lam=0.1, tau=0.1)
        p = make_params(5, 6, k=2, mu=float(by_user.values.mean()), seed=4)
        als_user_step(p, by_user, h)
        step = 1e-5
        for u in range(5):
            for f in range(2):
                for sign, acc in ((1, 0.0),):
                    p.U[u, f] += step
                    hi = objective(p, by_user, h)
                    p.U[u, f] -= 2 * step
                    lo = objective(p, by_user, h)
                    p.U[u, f] += step
                    assert abs((hi - lo) / (2 * step)) < 1e-6

    def test_divergence_detected(self):
        by_user = from_triples([0], [0], [1e300], 1, 1, BY_USER)
        p = make_params(1, 1, k=1)
        p.V[:] = 1e300
        with pytest.raises(FloatingPointError, match="row 0"):
            als_user_step(p, by_user, Hyperparams(k=1))


class TestObjectiveAndPredict:
    def test_zero_params_plug_in(self):
        rng = np.random.default_rng(17)
        by_user, _ = random_csr_pair(rng, n_users=4, n_items=5)
        mu = float(by_user.values.mean())
        p = make_params(4, 5, k=0, mu=mu)
        h = Hyperparams(k=0, lam=0.4, tau=0.1)
        expect = 0.4 * float(np.sum((by_user.values - mu) ** 2))
        assert objective(p, by_user, h) == pytest.approx(expect, rel=1e-12)

    def test_perfect_fit_leaves_regularizer(self):
        by_user = from_triples([0, 1], [0, 1], [4.0, 3.0], 2, 2, BY_USER)
        p = make_params(2, 2, k=0, mu=3.5)
        p.b_user[:] = [0.5, -0.5]
        h = Hyperparams(k=0, lam=1.0, tau=0.2)
        assert objective(p, by_user, h) == pytest.approx(0.2 * 0.5, rel=1e-12)

    def test_matches_naive_triple_loop(self):
        rng = np.random.default_rng(18)
        by_user, _ = random_csr_pair(rng, n_users=6, n_items=7)
        h = Hyperparams(k=3, lam=0.3, tau=0.15)
        p = make_params(6, 7, k=3, mu=3.2, seed=5)
        p.b_user[:] = rng.normal(0, 0.2, 6)
        p.b_item[:] = rng.normal(0, 0.2, 7)
        rows = by_user.row_of_entry()
        triples = list(zip(rows.tolist(), by_user.indices.tolist(),
                           by_user.values.tolist()))
        expect = naive_objective(p.mu, p.b_user, p.b_item, p.U, p.V,
                                 triples, h.lam, h.tau)
        assert objective(p, by_user, h) == pytest.approx(expect, abs=1e-10)

    def test_predict_arithmetic(self):
        p = make_params(1, 1, k=1, mu=3.5)
        p.b_user[0], p.b_item[0] = 0.5, -0.25
        p.U[0, 0], p.V[0, 0] = 0.5, 0.2
        assert predict(p, 0, 0) == pytest.approx(3.85)

    def test_predict_clips(self):
        p = make_params(1, 1, k=0, mu=3.5)
        p.b_user[0] = 3.0
        assert predict(p, 0, 0, clip=True) == 5.0
        assert predict(p, 0, 0, clip=False) == pytest.approx(6.5)

    def test_all_zero_params_return_mu(self):
        p = make_params(2, 3, k=0, mu=3.53)
        assert predict(p, 1, 2) == pytest.approx(3.53)

    def test_predict_range_check(self):
        p = make_params(2, 2, k=0)
        with pytest.raises(ValueError):
            predict(p, 2, 0)
        with pytest.raises(ValueError):
            predict(p, 0, -1)


class TestTrain:
    def test_objective_monotone_over_epochs(self):
        rng = np.random.default_rng(19)
        by_user, by_item = random_csr_pair(rng, n_users=12, n_items=10)
        h = Hyperparams(k=3, lam=0.1, tau=0.1, epochs=20, seed=6)
        _, history = train(by_user, by_item, h)
        objs = [r.objective for r in history.records]
        for a, b in zip(objs, objs[1:]):
            assert b <= a + 1e-9 * abs(a)

    def test_bias_only_matches_independent_loop(self):
        rng = np.random.default_rng(20)
        by_user, by_item = random_csr_pair(rng, n_users=8, n_items=9)
        h = Hyperparams(k=0, lam=0.2, tau=0.1, epochs=5)
        params, _ = train(by_user, by_item, h)
        # separately coded bias loop, identical traversal order
        mu = float(by_user.values.mean())
        bu, bi = np.zeros(8), np.zeros(9)
        for _ in range(5):
            for u in range(8):
                cols, vals = by_user.row(u)
                bu[u] = (h.lam * np.sum(vals - mu - bi[cols]) / (h.tau + h.lam * len(vals))
                         if len(vals) else 0.0)
            for i in range(9):
                cols, vals = by_item.row(i)
                bi[i] = (h.lam * np.sum(vals - mu - bu[cols]) / (h.tau + h.lam * len(vals))
                         if len(vals) else 0.0)
        assert np.array_equal(params.b_user, bu)
        assert np.array_equal(params.b_item, bi)

    def test_thread_count_does_not_change_results(self):
        rng = np.random.default_rng(21)
        by_user, by_item = random_csr_pair(rng, n_users=15, n_items=13)
        h = Hyperparams(k=4, lam=0.1, tau=0.1, epochs=3, seed=7)
        p1, _ = train(by_user, by_item, h, n_threads=1)
        p4, _ = train(by_user, by_item, h, n_threads=4)
        assert np.array_equal(p1.U, p4.U)
        assert np.array_equal(p1.V, p4.V)
        assert np.array_equal(p1.b_user, p4.b_user)
        assert np.array_equal(p1.b_item, p4.b_item)

    def test_history_has_timing_and_test_rmse(self):
        rng = np.random.default_rng(22)
        by_user, by_item = random_csr_pair(rng, n_users=6, n_items=6)
        test, _ = random_csr_pair(rng, n_users=6, n_items=6, density=0.2)
        h = Hyperparams(k=2, epochs=2)
        _, history = train(by_user, by_item, h, test_by_user=test)
        assert len(history.records) == 2
        assert all(r.seconds >= 0 for r in history.records)
        assert all(np.isfinite(r.test_rmse) for r in history.records)


class TestEstimator:
    def test_fit_predict_roundtrip(self):
        rng = np.random.default_rng(23)
        by_user, _ = random_csr_pair(rng, n_users=10, n_items=8)
        model = AlsRecommender(k=2, epochs=3, seed=1).fit(by_user)
        preds = model.predict([(0, 0), (1, 2)])
        assert preds.shape == (2,)
        assert np.all(np.isfinite(preds))

    def test_get_params_roundtrip(self):
        model = AlsRecommender(k=5, lam=0.5)
        params = model.get_params()
        assert params["k"] == 5 and params["lam"] == 0.5
        clone = AlsRecommender(**params)
        assert clone.get_params() == params

    def test_fit_requires_by_user_orientation(self):
        rng = np.random.default_rng(24)
        _, by_item = random_csr_pair(rng, n_users=4, n_items=4)
        with pytest.raises(ValueError, match="by-user"):
            AlsRecommender().fit(by_item)
