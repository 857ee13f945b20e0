import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdtree.ops import (
    entmax15,
    entmax15_vjp,
    hardmax_st,
    round_st,
    sigmoid,
    sigmoid_grad,
    softmax,
)

from oracles import entmax15_bisect_oracle, entmax15_fd_jacobian


class TestEntmax15:
    def test_symmetric_input_is_uniform(self):
        np.testing.assert_allclose(entmax15(np.zeros(3)), np.full(3, 1 / 3), atol=1e-9)

    def test_saturates_to_exact_onehot(self):
        out = entmax15(np.array([10.0, 0.0]))
        assert out[0] == 1.0 and out[1] == 0.0

    def test_matches_bisection_oracle_frozen_value(self):
        out = entmax15(np.array([0.5, 0.1, -0.2]))
        np.testing.assert_allclose(
            out, [0.55145287, 0.29441338, 0.15413376], atol=1e-7)

    def test_agrees_with_oracle_on_random_vectors(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            k = rng.integers(2, 65)
            z = rng.normal(scale=rng.uniform(0.1, 4.0), size=k)
            mine = entmax15(z)
            ref = entmax15_bisect_oracle(z)
            assert np.max(np.abs(mine - ref)) <= 1e-6

    def test_simplex_on_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(10000):
            z = rng.normal(scale=3.0, size=rng.integers(1, 33))
            p = entmax15(z)
            assert np.all(p >= 0)
            assert abs(p.sum() - 1.0) <= 1e-9

    def test_matrix_rows_match_vector_calls(self):
        rng = np.random.default_rng(3)
        Z = rng.normal(size=(5, 6))
        rows = entmax15(Z)
        for r in range(5):
            np.testing.assert_allclose(rows[r], entmax15(Z[r]), atol=1e-12)

    @given(st.lists(st.floats(-20, 20), min_size=2, max_size=16),
           st.randoms(use_true_random=False))
    @settings(max_examples=200, deadline=None)
    def test_permutation_equivariant(self, vals, rnd):
        z = np.array(vals)
        perm = np.arange(len(vals))
        rnd.shuffle(perm)
        np.testing.assert_allclose(entmax15(z)[perm], entmax15(z[perm]), atol=1e-9)

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ValueError):
            entmax15(np.array([]))
        with pytest.raises(ValueError):
            entmax15(np.array([1.0, np.nan]))


class TestEntmax15Vjp:
    def test_two_point_example(self):
        out = entmax15_vjp(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        np.testing.assert_allclose(out, [0.3535533905932738, -0.3535533905932738],
                                   atol=1e-12)

    def test_constant_upstream_annihilated(self):
        for c in (1.0, -3.7, 42.0):
            out = entmax15_vjp(np.array([0.5, 0.5]), np.array([c, c]))
            np.testing.assert_allclose(out, [0.0, 0.0], atol=1e-12)

    def test_saturated_point_kills_gradient(self):
        out = entmax15_vjp(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(out, [0.0, 0.0], atol=1e-15)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            entmax15_vjp(np.array([0.5, 0.5]), np.array([1.0, 0.0, 0.0]))

    def test_matches_finite_differences_where_support_stable(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 40:
            z = rng.normal(scale=1.5, size=int(rng.integers(2, 8)))
            p = entmax15(z)
            # keep points whose support is stable under the FD perturbation
            if np.any((p > 0) & (p < 1e-4)):
                continue
            jac = entmax15_fd_jacobian(z, h=1e-5)
            g = rng.normal(size=p.size)
            mine = entmax15_vjp(p, g)
            ref = jac.T @ g
            scale = np.maximum(np.abs(ref), 1e-8)
            assert np.max(np.abs(mine - ref) / scale) <= 1e-4
            checked += 1


class TestHardmaxSt:
    def test_argmax_one_hot(self):
        np.testing.assert_array_equal(hardmax_st(np.array([0.2, 0.7, 0.1])), [0, 1, 0])

    def test_tie_breaks_to_lowest_index(self):
        np.testing.assert_array_equal(hardmax_st(np.array([0.5, 0.5])), [1, 0])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            hardmax_st(np.array([np.inf, 0.0]))


class TestRoundSt:
    def test_rounds_up_from_half(self):
        assert round_st(0.6225) == 1.0
        assert round_st(0.5) == 1.0
        assert round_st(0.4999) == 0.0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            round_st(1.2)
        with pytest.raises(ValueError):
            round_st(-0.1)


class TestSigmoidSoftmax:
    def test_sigmoid_values(self):
        assert sigmoid(0.0) == 0.5
        assert abs(sigmoid(0.5) - 0.6224593312018546) < 1e-12
        assert sigmoid_grad(0.5) == 0.25

    def test_sigmoid_monotone_and_extreme_safe(self):
        xs = np.linspace(-800, 800, 101)
        ys = sigmoid(xs)
        assert np.all(np.diff(ys) >= 0)
        assert np.all(np.isfinite(ys))

    def test_softmax_values(self):
        np.testing.assert_allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5])
        np.testing.assert_allclose(softmax(np.array([np.log(2), 0.0])),
                                   [2 / 3, 1 / 3], atol=1e-12)

    def test_softmax_shift_invariant(self):
        np.testing.assert_array_equal(softmax(np.array([5.0, 5.0])),
                                      softmax(np.array([0.0, 0.0])))
        z = np.array([0.3, -1.2, 2.0])
        np.testing.assert_allclose(softmax(z), softmax(z + 17.0), atol=1e-12)
