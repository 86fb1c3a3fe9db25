import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatialmc.design import build_design_matrix
from spatialmc.errors import InvalidInputError, RankUnreachableError
from spatialmc.lrmc import SolverSettings, lrmc_closed_form, lrmc_solve
from spatialmc.simulate import apply_mcar, gen_dataset, load_preset
from spatialmc.smc import (extract_pc_scores, lambda_grid_top, predict_new_locations,
                           select_lambda_for_rank, smc_closed_form, smc_objective, smc_solve)

from .conftest import trace_violation
from .helpers import centered_orthonormal, orthonormal

TIGHT = SolverSettings(rel_tol=1e-10, max_iters=20000)


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def instance(seed, n=20, p=4, k=5, level=0.25):
    r = np.random.default_rng(seed)
    z = np.column_stack([np.ones(n), r.standard_normal((n, k - 1))])
    x = z @ r.standard_normal((k, p)) + 0.5 * r.standard_normal((n, p))
    xm, mask = apply_mcar(x, level, r)
    return x, xm, mask, z


def explicit_hat(z):
    return z @ np.linalg.inv(z.T @ z) @ z.T


class TestClosedForm:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_explicit_inverse(self, seed):
        # oracle: hat matrix through (Z'Z)^-1 and an independent SVD
        x, _, _, z = instance(seed)
        lam = 0.8
        xc = x - x.mean(0)
        u, d, vt = np.linalg.svd(explicit_hat(z) @ xc, full_matrices=False)
        expected = u @ np.diag(np.maximum(d - lam, 0)) @ vt
        fit = smc_closed_form(x, z, lam)
        assert rel_err(fit.w_hat, expected) < 1e-10

    def test_identity_design_is_lrmc(self, rng):
        x = rng.standard_normal((10, 4))
        a = smc_closed_form(x, np.eye(10), 0.9)
        b = lrmc_closed_form(x, 0.9)
        np.testing.assert_allclose(a.w_hat, b.w_hat, atol=1e-12)

    def test_zero_lambda_is_least_squares(self, rng):
        x, _, _, z = instance(1)
        fit = smc_closed_form(x, z, 0.0)
        xc = x - x.mean(0)
        coef, *_ = np.linalg.lstsq(z, xc, rcond=None)
        np.testing.assert_allclose(fit.w_hat, z @ coef, atol=1e-10)

    def test_data_in_column_space(self, rng):
        z = np.column_stack([np.ones(15), rng.standard_normal((15, 3))])
        x = z @ rng.standard_normal((4, 3))
        fit = smc_closed_form(x, z, 0.0)
        np.testing.assert_allclose(fit.w_hat, x - x.mean(0), atol=1e-8)
        np.testing.assert_allclose(fit.x_hat, x, atol=1e-12)

    def test_errors(self, rng):
        with pytest.raises(InvalidInputError):
            smc_closed_form(np.array([[np.nan, 1.0], [1.0, 2.0]]), np.ones((2, 1)), 0.1)
        with pytest.raises(InvalidInputError):
            smc_closed_form(rng.standard_normal((4, 2)), np.zeros((4, 2)), 0.1)
        with pytest.raises(InvalidInputError):
            smc_closed_form(rng.standard_normal((4, 2)), np.ones((5, 1)), 0.1)
        with pytest.raises(InvalidInputError):
            smc_closed_form(rng.standard_normal((4, 2)), np.ones((4, 1)), -1.0)


class TestSolve:
    @pytest.mark.parametrize("seed", range(4))
    def test_full_mask_matches_closed_form(self, seed):
        x, _, _, z = instance(seed)
        cf = smc_closed_form(x, z, 1.2)
        it = smc_solve(x, np.ones(x.shape, bool), z, lam=1.2)
        assert rel_err(it.w_hat, cf.w_hat) < 1e-6

    @pytest.mark.parametrize("seed", range(4))
    def test_identity_design_matches_lrmc(self, seed):
        _, xm, mask, _ = instance(seed)
        a = smc_solve(xm, mask, np.eye(len(xm)), TIGHT, lam=0.6)
        b = lrmc_solve(xm, mask, TIGHT, lam=0.6)
        assert rel_err(a.w_hat, b.w_hat) < 1e-6

    @pytest.mark.parametrize("seed", range(6))
    def test_invariants(self, seed):
        _, xm, mask, z = instance(seed, level=0.1 * (seed % 4 + 1))
        fit = smc_solve(xm, mask, z, SolverSettings(lam=0.5 + seed * 0.2, record_trace=True))
        nw = max(np.linalg.norm(fit.w_hat), 1e-300)
        assert np.linalg.norm(fit.w_hat - explicit_hat(z) @ fit.w_hat) <= 1e-8 * nw
        assert np.linalg.norm(fit.w_hat - z @ fit.m_hat) <= 1e-6 * nw
        assert fit.m_hat.shape == (z.shape[1], xm.shape[1])
        assert trace_violation(fit.objective_trace) is None
        q = fit.loadings.shape[1]
        np.testing.assert_allclose(fit.loadings.T @ fit.loadings, np.eye(q), atol=1e-8)
        np.testing.assert_array_equal(fit.x_hat[mask], xm[mask])

    @pytest.mark.parametrize("seed", range(3))
    def test_optimality_spot_check(self, seed):
        _, xm, mask, z = instance(seed, n=16, p=3, k=5)
        lam = 0.7
        fit = smc_solve(xm, mask, z, TIGHT, lam=lam)
        xc = xm - fit.offsets
        base = smc_objective(xc, mask, z, fit.m_hat, lam)
        r = np.random.default_rng(100 + seed)
        worst = np.inf
        for _ in range(200):
            delta = r.standard_normal(fit.m_hat.shape)
            delta *= r.uniform(0, 0.1) / np.linalg.norm(delta)
            worst = min(worst, smc_objective(xc, mask, z, fit.m_hat + delta, lam) - base)
        assert worst >= -1e-12

    def test_row_without_observations(self):
        _, xm, mask, z = instance(7)
        xm[3] = np.nan
        mask[3] = False
        fit = smc_solve(xm, mask, z, lam=0.5)
        assert np.isfinite(fit.x_hat).all()
        np.testing.assert_allclose(fit.x_hat[3], z[3] @ fit.m_hat + fit.offsets, atol=1e-10)

    def test_errors(self):
        _, xm, mask, z = instance(8)
        with pytest.raises(InvalidInputError):
            smc_solve(xm, mask, None, lam=0.1)
        with pytest.raises(InvalidInputError):
            smc_solve(xm, mask, z[:-1], lam=0.1)
        xm[:, 2] = np.nan
        with pytest.raises(InvalidInputError, match="column 2"):
            smc_solve(xm, None, z, lam=0.1)

    def test_scenario_c_beats_lrmc(self):
        cfg = load_preset("toy-C").replace(mcar_level=0.2)
        ds = gen_dataset(cfg, seed=7)
        m = cfg.n_monitor
        z = build_design_matrix(ds.monitor_coords, ds.r_o_monitor, ["ro1", "ro2"])
        _, smc = select_lambda_for_rank(ds.x_masked, ds.mask, z, 1)
        _, lr = select_lambda_for_rank(ds.x_masked, ds.mask, None, 1)
        hidden = ~ds.mask
        truth = ds.x_true[:m]
        mse_s = np.mean((smc.x_hat - truth)[hidden] ** 2)
        mse_l = np.mean((lr.x_hat - truth)[hidden] ** 2)
        assert mse_s < mse_l


class TestObjective:
    def test_matches_definition(self, rng):
        x, _, mask, z = instance(2)
        m = rng.standard_normal((z.shape[1], x.shape[1]))
        w = z @ m
        expected = 0.5 * np.sum(np.where(mask, x - w, 0) ** 2) + 0.3 * np.linalg.svd(w, compute_uv=False).sum()
        assert smc_objective(x, mask, z, m, 0.3) == pytest.approx(expected, rel=1e-12)


class TestSelectLambda:
    def test_full_rank_target(self, rng):
        x = rng.standard_normal((12, 4))
        lam, fit = select_lambda_for_rank(x, None, None, 4)
        assert fit.attained_rank == 4
        assert lam <= 0.05 * lambda_grid_top(x)

    @pytest.mark.parametrize("q", [1, 2, 3])
    @pytest.mark.parametrize("prefer", ["smallest", "largest"])
    def test_gap_spectrum(self, rng, q, prefer):
        u, v = centered_orthonormal(rng, 30, 6), orthonormal(rng, 6, 6)
        x = u @ np.diag([10, 8, 6, 0.1, 0.05, 0.01]) @ v.T
        lam, fit = select_lambda_for_rank(x, None, None, q, prefer=prefer)
        assert fit.attained_rank == q and fit.lam == lam

    def test_gap_spectrum_with_design(self, rng):
        u, v = centered_orthonormal(rng, 30, 4), orthonormal(rng, 4, 4)
        x = u @ np.diag([10, 8, 6, 0.1]) @ v.T
        z = np.column_stack([np.ones(30), u, rng.standard_normal((30, 3))])
        _, fit = select_lambda_for_rank(x, None, z, 3)
        assert fit.attained_rank == 3

    def test_rank_one_recovery(self, rng):
        x = np.outer(rng.standard_normal(40), rng.standard_normal(6))
        xm, mask = apply_mcar(x, 0.2, rng)
        _, fit = select_lambda_for_rank(xm, mask, None, 1)
        truth = x - x.mean(0)
        assert np.corrcoef(fit.w_hat.ravel(), truth.ravel())[0, 1] > 0.99

    def test_gapless_spectrum_unreachable(self, rng):
        u, v = centered_orthonormal(rng, 8, 4), orthonormal(rng, 4, 4)
        x = 3.0 * u @ v.T
        with pytest.raises(RankUnreachableError) as err:
            select_lambda_for_rank(x, None, None, 2)
        assert err.value.target_rank == 2
        assert set(err.value.attained_ranks) == {0, 4}

    def test_rank_nonincreasing_along_grid(self, rng):
        x, xm, mask, z = instance(4, n=30, p=5, k=8)
        top = lambda_grid_top(xm, mask, z)
        ranks, w = [], None
        for lam in np.geomspace(top, 1e-3 * top, 25):
            fit = smc_solve(xm, mask, z, lam=lam, w0=w)
            ranks.append(fit.attained_rank)
            w = fit.w_hat
        assert all(a <= b for a, b in zip(ranks, ranks[1:]))

    def test_invalid_target(self, rng):
        x = rng.standard_normal((6, 3))
        for q in (0, 4):
            with pytest.raises(InvalidInputError):
                select_lambda_for_rank(x, None, None, q)
        with pytest.raises(InvalidInputError):
            select_lambda_for_rank(x, None, np.ones((6, 1)), 2)
        with pytest.raises(InvalidInputError):
            select_lambda_for_rank(x, None, None, 1, prefer="middle")


class TestPredict:
    def test_training_design_reproduces_fit(self):
        _, xm, mask, z = instance(3)
        fit = smc_solve(xm, mask, z, lam=0.5)
        np.testing.assert_allclose(predict_new_locations(fit, z), fit.lowrank, atol=1e-10)
        np.testing.assert_allclose(predict_new_locations(fit, z[5]), fit.lowrank[5:6], atol=1e-10)

    def test_rejections(self):
        _, xm, mask, z = instance(3)
        fit = smc_solve(xm, mask, z, lam=0.5)
        with pytest.raises(InvalidInputError):
            predict_new_locations(fit, z[:, :-1])
        with pytest.raises(InvalidInputError):
            predict_new_locations(lrmc_solve(xm, mask, lam=0.5), z)


class TestPcScores:
    def test_orthogonal_square_input(self, rng):
        x = orthonormal(rng, 5, 5) @ np.diag([5.0, 4, 3, 2, 1])
        scores, loadings = extract_pc_scores(x, 4)
        g = scores.T @ scores
        assert np.abs(g - np.diag(np.diag(g))).max() <= 1e-10 * np.trace(g)
        xc = x - x.mean(0)
        np.testing.assert_allclose(scores @ loadings.T, xc, atol=1e-10)

    def test_rank_one(self, rng):
        s, v = rng.standard_normal(10), orthonormal(rng, 4, 1)[:, 0]
        s -= s.mean()
        scores, loadings = extract_pc_scores(np.outer(s, v), 1)
        sign = np.sign(loadings[0, 0] * v[0])
        np.testing.assert_allclose(loadings[:, 0], sign * v, atol=1e-12)
        np.testing.assert_allclose(scores[:, 0], sign * s, atol=1e-12)

    def test_rank_exceeded(self, rng):
        x = np.outer(rng.standard_normal(6), rng.standard_normal(3))
        with pytest.raises(InvalidInputError):
            extract_pc_scores(x, 2)

    def test_scores_track_truth(self):
        cfg = load_preset("toy-C")
        ds = gen_dataset(cfg, seed=3)
        z = build_design_matrix(ds.monitor_coords, ds.r_o_monitor, ["ro1", "ro2"])
        _, fit = select_lambda_for_rank(ds.x_masked, ds.mask, z, 1)
        est, _ = extract_pc_scores(fit, 1)
        ref, _ = extract_pc_scores(ds.x_monitor, 1)
        assert abs(np.corrcoef(est[:, 0], ref[:, 0])[0, 1]) > 0.9

    @settings(max_examples=30, deadline=None, derandomize=True)
    @given(seed=st.integers(0, 2**31 - 1), q=st.integers(1, 4))
    def test_scores_uncorrelated(self, seed, q):
        x = np.random.default_rng(seed).standard_normal((15, 5))
        scores, loadings = extract_pc_scores(x, q)
        g = scores.T @ scores
        assert np.abs(g - np.diag(np.diag(g))).max() <= 1e-6 * np.trace(g)
        np.testing.assert_allclose(loadings.T @ loadings, np.eye(q), atol=1e-8)
