"""Barrier evaluators, finite-difference consistency, self-concordance checks."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ripm.barriers import (
    BlockBarriers,
    ball,
    check_gradient_bound,
    check_hessian_stability,
    custom_barrier,
    epigraph_abs,
    from_tag,
    log_box,
    log_positive,
)
from ripm.errors import MissingAnalyticCenter, OutOfDomain


# -- finite-difference oracles ----------------------------------------------

def fd_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(g, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((g(x + e) - g(x - e)) / (2 * h))
    return np.stack(cols, axis=1)


def sample_interior(kind, rng):
    """A comfortably-interior random point for each barrier kind."""
    if kind == "log_positive":
        return np.array([rng.uniform(0.2, 5.0)])
    if kind == "log_box":
        return np.array([rng.uniform(-0.8, 0.8)])
    if kind == "ball":
        v = rng.standard_normal(3)
        return v / np.linalg.norm(v) * rng.uniform(0.0, 0.85)
    if kind == "epigraph_abs":
        z = rng.uniform(0.5, 3.0)
        return np.array([rng.uniform(-0.8, 0.8) * z, z])
    raise ValueError(kind)


BARRIERS = {
    "log_positive": log_positive(),
    "log_box": log_box(-1.0, 1.0),
    "ball": ball(3),
    "epigraph_abs": epigraph_abs(),
}


# ---------------------------------------------------------------------------
# pinned values
# ---------------------------------------------------------------------------

class TestPinnedValues:
    def test_log_positive_at_two(self):
        b = log_positive()
        assert b.grad([2.0])[0] == pytest.approx(-0.5)
        assert b.hess([2.0])[0, 0] == pytest.approx(0.25)
        assert b.nu == 1.0

    def test_log_positive_closed_forms_exact(self):
        b = log_positive()
        for x in (0.1, 1.0, 7.5):
            assert b.grad([x])[0] == -1.0 / x
            assert b.hess([x])[0, 0] == 1.0 / x**2

    def test_ball_1d_center(self):
        b = ball(1)
        assert b.grad([0.0])[0] == pytest.approx(0.0)
        assert b.hess([0.0])[0, 0] == pytest.approx(2.0)

    def test_epigraph_abs_at_origin_slice(self):
        b = epigraph_abs()
        np.testing.assert_allclose(b.grad([0.0, 1.0]), [0.0, -2.0])

    def test_log_box_center(self):
        b = log_box(0.0, 4.0)
        np.testing.assert_allclose(b.analytic_center(), [2.0])
        assert b.grad([2.0])[0] == pytest.approx(0.0)
        assert b.nu == 2.0


# ---------------------------------------------------------------------------
# domain handling
# ---------------------------------------------------------------------------

class TestDomains:
    @pytest.mark.parametrize("kind,point", [
        ("log_positive", [-1.0]),
        ("log_positive", [0.0]),
        ("log_box", [1.5]),
        ("ball", [1.0, 0.0, 0.0]),
        ("epigraph_abs", [1.0, 0.5]),
    ])
    def test_out_of_domain_raises(self, kind, point):
        with pytest.raises(OutOfDomain):
            BARRIERS[kind].grad(np.array(point, dtype=float))

    def test_margin_is_strict(self):
        b = log_positive()
        assert not b.interior([1e-13])
        assert b.interior([1e-6])

    def test_missing_analytic_center(self):
        with pytest.raises(MissingAnalyticCenter):
            log_positive().analytic_center()
        with pytest.raises(MissingAnalyticCenter):
            epigraph_abs().analytic_center()


# ---------------------------------------------------------------------------
# finite-difference consistency
# ---------------------------------------------------------------------------

class TestFiniteDifferences:
    @pytest.mark.parametrize("kind", list(BARRIERS))
    def test_grad_matches_value_fd(self, kind):
        bar = BARRIERS[kind]
        rng = np.random.default_rng(hash(kind) % 2**32)
        for _ in range(300):
            x = sample_interior(kind, rng)
            g = bar.grad(x)
            g_fd = fd_grad(bar.value, x)
            np.testing.assert_allclose(g, g_fd, rtol=1e-6, atol=1e-6)

    @pytest.mark.parametrize("kind", list(BARRIERS))
    def test_hess_matches_grad_fd(self, kind):
        bar = BARRIERS[kind]
        rng = np.random.default_rng((hash(kind) + 1) % 2**32)
        for _ in range(300):
            x = sample_interior(kind, rng)
            H = bar.hess(x)
            H_fd = fd_jacobian(bar.grad, x)
            np.testing.assert_allclose(H, 0.5 * (H_fd + H_fd.T), rtol=1e-5, atol=1e-5)


# ---------------------------------------------------------------------------
# self-concordance consequences
# ---------------------------------------------------------------------------

class TestHessianStability:
    def test_zero_displacement(self):
        b = ball(2)
        x = np.array([0.1, -0.2])
        assert check_hessian_stability(b, x, x)

    def test_log_positive_worked_example(self):
        # x=1, y=1.5: local step norm 0.5, H(x)=1, H(y)=4/9
        # sandwich: 0.25*1 <= 4/9 <= 4*1
        b = log_positive()
        assert b.hess([1.0])[0, 0] == 1.0
        assert b.hess([1.5])[0, 0] == pytest.approx(4.0 / 9.0)
        assert check_hessian_stability(b, np.array([1.0]), np.array([1.5]))

    @pytest.mark.parametrize("kind", list(BARRIERS))
    def test_randomized_small_steps(self, kind):
        bar = BARRIERS[kind]
        rng = np.random.default_rng((hash(kind) + 2) % 2**32)
        for _ in range(1000):
            x = sample_interior(kind, rng)
            H = bar.hess(x)
            u = rng.standard_normal(bar.dim)
            u /= math.sqrt(max(float(u @ H @ u), 1e-300))
            y = x + u * rng.uniform(0.0, 0.9)
            assert check_hessian_stability(bar, x, y)

    def test_rejects_unit_or_larger_steps(self):
        b = log_positive()
        with pytest.raises(ValueError, match="local norm"):
            check_hessian_stability(b, np.array([1.0]), np.array([2.5]))


class TestGradientBound:
    def test_log_positive_exact_equality(self):
        b = log_positive()
        for x in (0.05, 1.0, 40.0):
            # ||-1/x||_{x^2} = 1 = sqrt(nu) exactly
            assert check_gradient_bound(b, np.array([x]))

    def test_ball_center(self):
        assert check_gradient_bound(ball(3), np.zeros(3))

    @pytest.mark.parametrize("kind", list(BARRIERS))
    def test_random_interior_points(self, kind):
        bar = BARRIERS[kind]
        rng = np.random.default_rng((hash(kind) + 3) % 2**32)
        for _ in range(1000):
            assert check_gradient_bound(bar, sample_interior(kind, rng))


@given(st.floats(0.05, 20.0), st.floats(-0.9, 0.9))
@settings(max_examples=200, deadline=None)
def test_log_positive_sandwich_property(x, frac):
    bar = log_positive()
    # step with local norm |frac| < 1: y = x + frac*x since ||u||_x = |u|/x
    assert check_hessian_stability(bar, np.array([x]), np.array([x * (1 + frac)]))


# ---------------------------------------------------------------------------
# tags and products
# ---------------------------------------------------------------------------

class TestTagsAndProducts:
    def test_from_tag_roundtrip(self):
        b = from_tag("log_box", {"lo": 0.0, "hi": 2.0})
        assert b.kind == "log_box"
        assert b.params == {"lo": 0.0, "hi": 2.0}
        assert from_tag("log_positive").nu == 1.0
        with pytest.raises(ValueError):
            from_tag("no_such_tag")
        with pytest.raises(ValueError):
            from_tag("custom")

    def test_custom_declares_nu(self):
        b = custom_barrier(
            dim=1, nu=1.0,
            value=lambda x: -math.log(x[0]),
            grad=lambda x: np.array([-1.0 / x[0]]),
            hess=lambda x: np.array([[1.0 / x[0] ** 2]]),
            interior=lambda x: x[0] > 0,
        )
        assert b.kind == "custom"
        assert b.grad([2.0])[0] == pytest.approx(-0.5)

    def test_nu_below_one_rejected(self):
        with pytest.raises(ValueError, match="nu"):
            custom_barrier(1, 0.5, lambda x: 0.0, lambda x: np.zeros(1),
                           lambda x: np.eye(1), lambda x: True)

    def test_block_barriers_assembly(self):
        bb = BlockBarriers([log_box(0, 4), log_box(0, 4), epigraph_abs()])
        assert bb.n == 4
        assert bb.m == 3
        assert bb.nu_total == 6.0
        x = np.array([1.0, 3.0, 0.2, 1.0])
        g = bb.gradient(x)
        np.testing.assert_allclose(g[:1], log_box(0, 4).grad([1.0]))
        np.testing.assert_allclose(g[2:], epigraph_abs().grad([0.2, 1.0]))
        H = bb.hessian(x)
        assert H.block(2).shape == (2, 2)

    def test_block_barriers_center_requires_all(self):
        bb = BlockBarriers([log_box(0, 1), log_positive()])
        with pytest.raises(MissingAnalyticCenter):
            bb.analytic_center()
        bb2 = BlockBarriers([log_box(0, 1), log_box(-1, 1)])
        np.testing.assert_allclose(bb2.analytic_center(), [0.5, 0.0])

    def test_hessian_inverse_scalar_fast_path(self):
        bb = BlockBarriers([log_box(0, 2), log_positive()])
        x = np.array([0.5, 2.0])
        W = bb.hessian_inverse(x)
        H = bb.hessian(x)
        np.testing.assert_allclose(W.diag_vector() * H.diag_vector(),
                                   np.ones(2), rtol=1e-12)
