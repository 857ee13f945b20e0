import numpy as np
import pytest

from gdtree import ForwardMode, loss_and_gradients
from gdtree.grad import backward_from_cache, forward_cached
from gdtree.losses import LossConfig, logits_loss_and_grad
from gdtree.training import init_params
from gdtree.tree import DenseTreeParams

from oracles import tree_loss_and_grads_oracle


def soft_loss(params, X, y, cfg):
    cache = forward_cached(params, X, ForwardMode.SOFT)
    loss, _, _ = logits_loss_and_grad(cache.Z, y, cfg)
    return loss


def finite_difference_grads(params, X, y, cfg, h=1e-4):
    grads = []
    for name in ("select_logits", "thresholds", "leaf_logits"):
        base = getattr(params, name)
        g = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            orig = base[idx]
            base[idx] = orig + h
            up = soft_loss(params, X, y, cfg)
            base[idx] = orig - h
            dn = soft_loss(params, X, y, cfg)
            base[idx] = orig
            g[idx] = (up - dn) / (2 * h)
        grads.append(g)
    return grads


def assert_grads_close(analytic, numeric, rtol=1e-4, small=1e-8):
    """Relative comparison with an absolute floor at the truncation noise of
    central differences themselves (~h^2 * f''' ~ 1e-8 at h = 1e-4)."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    small_mask = np.abs(numeric) < small
    np.testing.assert_allclose(analytic[small_mask], numeric[small_mask], atol=1e-7)
    big = ~small_mask
    np.testing.assert_allclose(analytic[big], numeric[big], rtol=rtol, atol=5e-8)


def random_problem(rng, kind="ce", poly=False):
    d = int(rng.integers(1, 4))
    n = int(rng.integers(2, 6))
    c = int(rng.integers(2, 4))
    params = init_params(d, n, c, rng)
    # spread logits so entmax supports are not razor-thin
    params = DenseTreeParams(
        d, n, c,
        params.select_logits * 3.0,
        params.thresholds,
        params.leaf_logits * 2.0,
    )
    B = int(rng.integers(3, 9))
    X = rng.normal(size=(B, n))
    y = rng.integers(0, c, size=B)
    cfg = LossConfig(kind=kind, focal_gamma=3.0, poly_enabled=poly, poly_epsilon=2.0)
    return params, X, y, cfg


class TestSoftModeFiniteDifferences:
    def test_cross_entropy_grads_match_fd(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            params, X, y, cfg = random_problem(rng)
            loss, _, grads = loss_and_gradients(params, X, y, cfg, ForwardMode.SOFT)
            fd_sel, fd_thr, fd_leaf = finite_difference_grads(params, X, y, cfg)
            assert_grads_close(grads.d_select_logits, fd_sel)
            assert_grads_close(grads.d_thresholds, fd_thr)
            assert_grads_close(grads.d_leaf_logits, fd_leaf)

    def test_focal_and_poly_grads_match_fd(self):
        rng = np.random.default_rng(99)
        for kind, poly in (("focal", False), ("ce", True), ("focal", True)):
            for _ in range(5):
                params, X, y, cfg = random_problem(rng, kind=kind, poly=poly)
                _, _, grads = loss_and_gradients(params, X, y, cfg, ForwardMode.SOFT)
                fd_sel, fd_thr, fd_leaf = finite_difference_grads(params, X, y, cfg)
                assert_grads_close(grads.d_select_logits, fd_sel)
                assert_grads_close(grads.d_thresholds, fd_thr)
                assert_grads_close(grads.d_leaf_logits, fd_leaf)

    def test_leaf_gradients_match_fd_tightly(self):
        rng = np.random.default_rng(5)
        params, X, y, cfg = random_problem(rng)
        _, _, grads = loss_and_gradients(params, X, y, cfg, ForwardMode.SOFT)
        _, _, fd_leaf = finite_difference_grads(params, X, y, cfg)
        assert_grads_close(grads.d_leaf_logits, fd_leaf, rtol=1e-5)


class TestOracleChainRule:
    """Per-sample scalar reimplementation of the whole backward pass."""

    @pytest.mark.parametrize("hard", [False, True])
    @pytest.mark.parametrize("kind,poly", [("ce", False), ("focal", False), ("focal", True)])
    def test_engine_matches_oracle(self, hard, kind, poly):
        rng = np.random.default_rng(hash((hard, kind, poly)) % 2 ** 32)
        for _ in range(8):
            params, X, y, cfg = random_problem(rng, kind=kind, poly=poly)
            mode = ForwardMode.HARD if hard else ForwardMode.SOFT
            loss, _, grads = loss_and_gradients(params, X, y, cfg, mode)
            eps = cfg.poly_epsilon if cfg.poly_enabled else None
            o_loss, o_sel, o_thr, o_leaf = tree_loss_and_grads_oracle(
                params.select_logits, params.thresholds, params.leaf_logits,
                X, y, params.depth, hard, kind=kind, gamma=cfg.focal_gamma,
                poly_epsilon=eps)
            assert abs(loss - o_loss) < 1e-9
            np.testing.assert_allclose(grads.d_select_logits, o_sel, atol=1e-9)
            np.testing.assert_allclose(grads.d_thresholds, o_thr, atol=1e-9)
            np.testing.assert_allclose(grads.d_leaf_logits, o_leaf, atol=1e-9)


class TestHardModeContracts:
    def test_hard_forward_probs_equal_hardened_tree(self):
        from gdtree import to_vanilla, tree_pass

        rng = np.random.default_rng(8)
        params, X, y, cfg = random_problem(rng)
        probs = tree_pass(params, X, ForwardMode.HARD)
        np.testing.assert_array_equal(probs, to_vanilla(params).predict_proba(X))

    def test_straight_through_gradients_flow_despite_discrete_forward(self):
        rng = np.random.default_rng(12)
        params, X, y, cfg = random_problem(rng)
        _, _, grads = loss_and_gradients(params, X, y, cfg, ForwardMode.HARD)
        # thresholds and leaves receive usable gradient even though the
        # forward pass is piecewise constant
        assert np.any(grads.d_thresholds != 0)
        assert np.any(grads.d_leaf_logits != 0)

    def test_backward_reuses_hard_indicator_terms(self):
        rng = np.random.default_rng(13)
        params, X, y, cfg = random_problem(rng)
        cache = forward_cached(params, X, ForwardMode.HARD)
        assert set(np.unique(cache.terms)) <= {0.0, 1.0}
        _, _, dZ = logits_loss_and_grad(cache.Z, y, cfg)
        grads = backward_from_cache(cache, dZ)
        assert np.all(np.isfinite(grads.d_select_logits))
        assert np.all(np.isfinite(grads.d_thresholds))
        assert np.all(np.isfinite(grads.d_leaf_logits))
