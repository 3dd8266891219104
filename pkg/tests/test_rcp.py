"""Step-math and driver tests for the robust path-following loop."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ripm import problem as problem_mod
from ripm.barriers import BlockBarriers, log_box, log_positive
from ripm.errors import IterationLimit
from ripm.rcp import (
    ACTIVATION,
    PathParams,
    centrality_errors,
    gamma,
    mu,
    potential,
    scaled_direction,
    soft_coeff,
    softmax_potential,
    solve,
    step_direction,
)

from conftest import embedded_instance

ALPHA_CAP = 0.99 / ACTIVATION ** 2


# ---------------------------------------------------------------------------
# parameter schedules
# ---------------------------------------------------------------------------

class TestPathParams:
    def test_faithful_constants(self):
        p = PathParams.paper(3, 5.0)
        lam = 2.0 ** 16 * math.log(3)
        assert p.lam == pytest.approx(lam, rel=1e-15)
        assert p.alpha == pytest.approx(2.0 ** -20 / lam ** 2, rel=1e-15)
        assert p.kappa == pytest.approx(2.0 ** -10 * p.alpha, rel=1e-15)
        assert p.mode == "paper"
        # the default accuracy exceeds 1/lam here, so it gets clamped
        assert p.delta == pytest.approx(1.0 / lam, rel=1e-15)

    def test_practical_saturates_alpha(self):
        p = PathParams.practical(16, 20.0, delta=1e-2)
        assert p.lam == pytest.approx(2.0 * math.log(16))
        assert p.alpha == pytest.approx(ALPHA_CAP)  # stability cap binds
        assert p.kappa == pytest.approx(0.75 * p.alpha)
        assert p.delta == 1e-2
        assert p.threshold == pytest.approx(math.sqrt(0.99))

    def test_practical_honours_a_small_alpha_request(self):
        p = PathParams.practical(16, 20.0, c_alpha=1e-3)
        assert p.alpha == pytest.approx(1e-3 / p.lam ** 2, rel=1e-15)
        assert p.alpha < ALPHA_CAP

    def test_derived_schedule_quantities(self):
        p = PathParams(lam=1.0, alpha=1e-4, kappa=0.5, nu=4.0, delta=1.0)
        assert p.t_end == pytest.approx(1.0 / 16.0)
        assert p.shrink == pytest.approx(0.75)
        # 0.75^9 = 0.0751 is still above 1/16, 0.75^10 = 0.0563 is below
        assert p.predicted_iterations() == 10

    def test_potential_cap_floor(self):
        assert PathParams(lam=1.0, alpha=1e-4, kappa=1e-4, nu=2.0,
                          delta=0.5, m=6).potential_cap() == pytest.approx(80 * 6 / 1e-4)
        assert PathParams(lam=1.0, alpha=1e-4, kappa=1e-4, nu=2.0,
                          delta=0.5).potential_cap() == pytest.approx(80 / 1e-4)

    @pytest.mark.parametrize("kwargs,match", [
        (dict(lam=10.0, alpha=2e-3), "exceeds 1/100"),
        (dict(lam=0.01, alpha=0.5), "96"),
        (dict(kappa=3.0, nu=4.0), "kappa"),
        (dict(nu=0.5), "nu"),
        (dict(lam=4.0, delta=0.5), "1/lam"),
        (dict(mode="fast"), "mode"),
        (dict(alpha=-1e-4), "positive"),
        (dict(delta=math.nan), "positive"),
    ])
    def test_invariant_violations_are_rejected(self, kwargs, match):
        base = dict(lam=1.0, alpha=1e-4, kappa=1e-4, nu=2.0, delta=0.5)
        base.update(kwargs)
        with pytest.raises(ValueError, match=match):
            PathParams(**base)


# ---------------------------------------------------------------------------
# residuals, soft-max weights, directions
# ---------------------------------------------------------------------------

def _two_positive_blocks(gam0=1.2, gam1=1.5):
    """x = (1, 2) with s chosen so the block errors are exactly (gam0, gam1).

    For -log x at x the error is |s - t/x| * x / t; solving at t = 1 gives
    s = 1/x +- gam/x.
    """
    bb = BlockBarriers([log_positive(), log_positive()])
    x = np.array([1.0, 2.0])
    s = np.array([1.0 - gam0, 0.5 + gam1 / 2.0])
    return bb, x, s


class TestResiduals:
    def test_block_residual_of_the_log_barrier(self):
        bb = BlockBarriers([log_positive()])
        m0 = mu(0, np.array([1.0]), np.array([0.0]), 1.0, bb)
        assert_allclose(m0, [-1.0])
        assert gamma(0, m0, np.array([1.0]), bb) == pytest.approx(1.0)

    def test_gamma_is_scale_invariant_for_log(self):
        # s = 0 leaves mu = -1/x, whose local dual norm is 1 at every x > 0.
        bb = BlockBarriers([log_positive()])
        for xv in (0.5, 2.0, 40.0):
            x = np.array([xv])
            assert gamma(0, mu(0, x, np.zeros(1), 1.0, bb), x, bb) == \
                pytest.approx(1.0, rel=1e-12)

    def test_zero_at_an_exact_center(self):
        bb = BlockBarriers([log_box(0.0, 2.0)])
        x = np.array([1.0])
        m0 = mu(0, x, np.zeros(1), 0.3, bb)
        assert_allclose(m0, [0.0], atol=1e-15)
        assert gamma(0, m0, x, bb) == 0.0

    def test_vectorized_errors_match_blockwise(self, rng):
        emb, mp, params, bb = embedded_instance(n=9, d=4, seed=8)
        s = mp.s0 + 0.1 * rng.standard_normal(mp.s0.size)
        mu_vec, gammas = centrality_errors(mp.x0, s, 0.7, bb)
        for i in range(bb.m):
            sl = bb.structure.slice(i)
            assert_allclose(mu_vec[sl], mu(i, mp.x0, s, 0.7, bb), rtol=1e-13)
            assert gammas[i] == pytest.approx(
                gamma(i, mu_vec[sl], mp.x0, bb), rel=1e-12, abs=1e-15)


class TestSoftCoeff:
    LAM = 2.0

    def test_quiet_blocks_get_zero_weight(self):
        thr = ACTIVATION * math.sqrt(ALPHA_CAP)
        g = np.array([0.5 * thr, 0.99 * thr, 0.0])
        assert_allclose(soft_coeff(g, self.LAM, ALPHA_CAP), np.zeros(3))

    def test_single_active_block_gets_inverse_gamma(self):
        out = soft_coeff(np.array([1.2]), self.LAM, ALPHA_CAP)
        assert out[0] == pytest.approx(1.0 / 1.2, rel=1e-14)

    def test_mixed_blocks_match_the_direct_formula(self):
        g = np.array([1.2, 0.0, 0.0])
        out = soft_coeff(g, self.LAM, ALPHA_CAP)
        denom = math.sqrt(sum(math.exp(2 * self.LAM * v) for v in g))
        assert out[0] == pytest.approx(math.exp(self.LAM * 1.2) / 1.2 / denom,
                                       rel=1e-13)
        assert out[1] == out[2] == 0.0

    def test_enormous_lambda_is_overflow_safe(self):
        g = np.array([5.0, 4.9, 0.1])
        out = soft_coeff(g, 2.0 ** 16, ALPHA_CAP)
        assert np.isfinite(out).all()
        # the largest block dominates the soft-max completely
        assert out[0] == pytest.approx(1.0 / 5.0, rel=1e-12)
        assert out[1] == pytest.approx(0.0, abs=1e-280)

    @given(st.lists(st.floats(0.0, 3.0), min_size=1, max_size=8),
           st.floats(0.5, 4.0))
    @settings(max_examples=150, deadline=None)
    def test_weight_caps(self, gam_list, lam):
        g = np.array(gam_list)
        out = soft_coeff(g, lam, ALPHA_CAP)
        thr = ACTIVATION * math.sqrt(ALPHA_CAP)
        assert np.all(out[g < thr] == 0.0)
        assert np.all(out <= 1.0 / thr + 1e-9)
        assert float(np.sum((out * g) ** 2)) <= 1.0 + 1e-9


class TestDirections:
    def test_blockwise_assembly(self):
        bb, x, s = _two_positive_blocks(gam0=1.2, gam1=0.0)
        params = PathParams.practical(2, 2.0, delta=0.1)
        h, w = step_direction(x, s, 1.0, params, bb)
        mu_vec, gammas = centrality_errors(x, s, 1.0, bb)
        c = soft_coeff(gammas, params.lam, params.alpha)
        assert_allclose(h[:1], -params.alpha * c[0] * mu_vec[:1], rtol=1e-14)
        assert h[1] == 0.0  # quiet block is untouched

    def test_all_active_energy_is_exactly_alpha(self):
        # With every block active the soft-max weights are a unit vector in
        # the (c_i gamma_i) coordinates, so the total dual-norm energy of the
        # correction collapses to alpha^2 identically.
        bb, x, s = _two_positive_blocks(gam0=1.2, gam1=1.5)
        params = PathParams.practical(2, 2.0, delta=0.1)
        h, w = step_direction(x, s, 1.0, params, bb)
        energy = float(np.sum(w.quadform_norms(h) ** 2))
        assert energy == pytest.approx(params.alpha ** 2, rel=1e-12)

    def test_partial_activity_energy_stays_below_alpha(self):
        emb, mp, params, bb = embedded_instance(n=10, d=4, seed=6)
        t = mp.delta / (params.threshold * 4.0)  # a few blocks active
        h, w = step_direction(mp.x0, mp.s0, t, params, bb)
        energy = float(np.sum(w.quadform_norms(h) ** 2))
        assert 0.0 < energy <= params.alpha ** 2 * (1 + 1e-12)


class TestPotential:
    def test_floor_at_zero_errors(self):
        val = softmax_potential(np.zeros(7), 3.0)
        assert val.value == pytest.approx(7.0)
        assert val.log == pytest.approx(math.log(7.0))

    def test_two_block_value(self):
        lam = 2.5
        val = softmax_potential(np.array([0.8, 0.0]), lam)
        assert val.value == pytest.approx(math.exp(lam * 0.8) + 1.0, rel=1e-14)

    def test_log_form_survives_overflow(self):
        lam = 2.0 ** 16
        val = softmax_potential(np.array([400.0, 1.0]), lam)
        assert val.value == math.inf
        assert val.log == pytest.approx(lam * 400.0, rel=1e-12)

    def test_start_point_sits_near_the_floor(self):
        # a delta-central start has lam * gamma_i <= lam * delta <= 1, so the
        # potential is at most e per block
        emb, mp, params, bb = embedded_instance(n=8, d=3, seed=2)
        val = potential(mp.x0, mp.s0, 1.0, params, bb)
        assert emb.m <= val.value <= math.e * emb.m


# ---------------------------------------------------------------------------
# the driver loop
# ---------------------------------------------------------------------------

class TestSolveDriver:
    def test_budget_exhaustion_raises(self):
        lp = problem_mod.random_lp(n=6, d=2, seed=3)
        with pytest.raises(IterationLimit, match="budget"):
            solve(lp, delta=0.05, max_iters=5, keep_log=False)

    def test_rejects_params_sized_for_another_problem(self):
        lp = problem_mod.random_lp(n=6, d=2, seed=3)
        wrong = PathParams.practical(7, 99.0)
        with pytest.raises(ValueError, match="params sized"):
            solve(lp, wrong)

    def test_quiet_phase_records(self):
        # From the delta-central start at t = 1 every error is far below the
        # activation threshold: the loop must coast (h = 0, lazy branch) while
        # t tracks the deterministic schedule bit for bit.
        lp = problem_mod.random_lp(n=6, d=2, seed=3)
        emb = problem_mod.build_modified(lp, 0.05).problem
        params = PathParams.practical(emb.m, emb.nu, 0.05)
        recs = []
        with pytest.raises(IterationLimit):
            solve(lp, delta=0.05, max_iters=120, callback=recs.append,
                  keep_log=False)
        assert [r.iteration for r in recs] == list(range(1, 121))
        for r in recs:
            assert r.t == pytest.approx(params.shrink ** r.iteration, abs=1e-15)
            assert r.h_norm == 0.0
            assert r.branch == "partial" and r.r == 0
            assert math.log(emb.m) <= r.log_phi <= math.log(emb.m) + 1.0
        gam = [r.max_gamma for r in recs]
        assert all(b >= a for a, b in zip(gam, gam[1:]))

    def test_full_reference_solve(self):
        # End-to-end run of the pure-numpy driver on a pinned one-variable
        # problem (the equality forces x = 1.3).  Deliberately the slowest
        # unit test (~6 s): it exercises embedding, the complete t schedule,
        # extraction, and certification in one pass.
        lp = problem_mod.StandardProblem(
            A=np.array([[1.0]]), b=np.array([1.3]), c=np.array([1.0]),
            barriers=[log_box(0.0, 2.0)], R_diam=2.0, name="pinned-1d")
        params = PathParams(lam=1.0, alpha=ALPHA_CAP, kappa=0.75 * ALPHA_CAP,
                            nu=3.0, delta=0.9, m=2)
        sol = solve(lp, params, keep_log=False, bank_count=256,
                    engine="reference")

        assert sol.status == "converged"
        assert sol.certificate_valid is True
        schedule = params.predicted_iterations()
        # the t schedule is deterministic; terminal centering may append a
        # few fixed-t steps on top
        assert schedule <= sol.iterations <= schedule + 2000
        assert sol.rebuilds > 0
        # the equality constraint leaves a residual proportional to the
        # homogenizing variable, and nothing else
        residual = (lp.A @ sol.x - lp.b).item()
        assert residual == pytest.approx((1.0 - 1.3) * sol.tau, rel=1e-9)
        assert 0.0 < sol.tau < 0.5
        assert sol.x[0] == pytest.approx(1.3, abs=0.1)
        assert 0.0 < sol.gap_bound <= 4.0 * params.t_end * 3.0
        assert sol.objective_excess_bound == pytest.approx(
            lp.L_lip * lp.R_diam * params.delta)
