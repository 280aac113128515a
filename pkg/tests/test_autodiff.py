import numpy as np
import pytest

from mfvol import autodiff as ad
from mfvol.autodiff import Tensor

from oracles import fd_gradient, rel_err

RNG = np.random.default_rng(0)


def check_unary(op, x, tol=5e-7, **kwargs):
    """Compare reverse-mode and central-difference gradients."""
    t = Tensor(x.copy(), requires_grad=True)
    out = op(t, **kwargs)
    seed = RNG.standard_normal(out.data.shape)
    out.backward(seed.copy())

    def scalar(arr):
        return float(np.sum(op(Tensor(arr), **kwargs).data * seed))

    fd = fd_gradient(scalar, x.copy())
    assert rel_err(t.grad, fd) < tol, op.__name__


def check_binary(op, a, b, tol=5e-7):
    ta = Tensor(a.copy(), requires_grad=True)
    tb = Tensor(b.copy(), requires_grad=True)
    out = op(ta, tb)
    seed = RNG.standard_normal(out.data.shape)
    out.backward(seed.copy())

    fd_a = fd_gradient(
        lambda arr: float(np.sum(op(Tensor(arr), Tensor(b)).data * seed)),
        a.copy())
    fd_b = fd_gradient(
        lambda arr: float(np.sum(op(Tensor(a), Tensor(arr)).data * seed)),
        b.copy())
    assert rel_err(ta.grad, fd_a) < tol, op.__name__
    assert rel_err(tb.grad, fd_b) < tol, op.__name__


class TestElementwise:
    def test_add_sub_mul_div(self):
        a = RNG.standard_normal((3, 4))
        b = RNG.standard_normal((3, 4)) + 3.0
        for op in (ad.add, ad.sub, ad.mul, ad.div):
            check_binary(op, a, b)

    def test_broadcast_row_and_scalar(self):
        a = RNG.standard_normal((5, 4))
        row = RNG.standard_normal((1, 4))
        check_binary(ad.add, a, row)
        check_binary(ad.mul, a, row)
        scal = np.array(1.7)
        check_binary(ad.mul, a, scal)

    def test_exp_log_power_softplus(self):
        x = np.abs(RNG.standard_normal((4, 3))) + 0.5
        check_unary(ad.exp, x)
        check_unary(ad.log, x)
        check_unary(lambda t: ad.power(t, 3.0), x)
        check_unary(ad.softplus, RNG.standard_normal((4, 3)) * 3.0)

    def test_softplus_saturates_correctly(self):
        x = np.array([-800.0, 0.0, 800.0])
        t = Tensor(x, requires_grad=True)
        out = ad.softplus(t)
        assert np.all(np.isfinite(out.data))
        assert out.data[2] == pytest.approx(800.0)
        assert out.data[0] == pytest.approx(0.0, abs=1e-12)
        out.backward(np.ones(3))
        assert t.grad[0] == pytest.approx(0.0, abs=1e-12)
        assert t.grad[1] == pytest.approx(0.5)
        assert t.grad[2] == pytest.approx(1.0)


class TestMatmulAndShape:
    def test_matmul_2d(self):
        check_binary(ad.matmul, RNG.standard_normal((3, 4)),
                     RNG.standard_normal((4, 2)))

    def test_matmul_batched_with_broadcast(self):
        a = RNG.standard_normal((6, 3, 4))
        b = RNG.standard_normal((4, 2))
        check_binary(ad.matmul, a, b)

    def test_transpose_last(self):
        check_unary(ad.transpose_last, RNG.standard_normal((2, 3, 4)))

    def test_reshape(self):
        check_unary(lambda t: ad.reshape(t, (2, 6)),
                    RNG.standard_normal((3, 4)))

    def test_concat(self):
        a = RNG.standard_normal((3, 2))
        b = RNG.standard_normal((3, 5))
        ta = Tensor(a.copy(), requires_grad=True)
        tb = Tensor(b.copy(), requires_grad=True)
        out = ad.concat([ta, tb], axis=-1)
        assert out.shape == (3, 7)
        seed = RNG.standard_normal((3, 7))
        out.backward(seed.copy())
        assert np.array_equal(ta.grad, seed[:, :2])
        assert np.array_equal(tb.grad, seed[:, 2:])


class TestReductions:
    def test_tsum_axes(self):
        x = RNG.standard_normal((3, 4, 5))
        check_unary(ad.tsum, x)
        check_unary(lambda t: ad.tsum(t, axis=1), x)
        check_unary(lambda t: ad.tsum(t, axis=-1, keepdims=True), x)

    def test_tmean_axes(self):
        x = RNG.standard_normal((3, 4))
        check_unary(ad.tmean, x)
        check_unary(lambda t: ad.tmean(t, axis=-1, keepdims=True), x)

    def test_softmax_gradient(self):
        check_unary(ad.softmax, RNG.standard_normal((4, 6)) * 2.0, tol=2e-6)

    def test_softmax_rows_sum_to_one(self):
        out = ad.softmax(Tensor(RNG.standard_normal((5, 7))))
        assert np.allclose(out.data.sum(axis=-1), 1.0, atol=1e-12)

    def test_softmax_shift_invariance(self):
        x = RNG.standard_normal((3, 4))
        a = ad.softmax(Tensor(x)).data
        b = ad.softmax(Tensor(x + 1000.0)).data
        assert np.allclose(a, b, atol=1e-12)


class TestGraph:
    def test_diamond_reuse_accumulates(self):
        # y = x*x + x, both branches share the same leaf
        x = Tensor(np.array([3.0]), requires_grad=True)
        y = ad.add(ad.mul(x, x), x)
        y.backward()
        assert x.grad[0] == pytest.approx(7.0)

    def test_deep_chain_is_iterative(self):
        # would blow the recursion limit if backward recursed
        x = Tensor(np.array([1.0]), requires_grad=True)
        out = x
        for _ in range(5000):
            out = ad.add(out, 1.0)
        out.backward()
        assert x.grad[0] == 1.0

    def test_no_grad_leaves_untouched(self):
        a = Tensor(np.ones(3), requires_grad=True)
        b = Tensor(np.full(3, 2.0), requires_grad=False)
        out = ad.mul(a, b)
        out.backward(np.ones(3))
        assert np.array_equal(a.grad, b.data)
        assert b.grad is None

    def test_operator_sugar_matches_functions(self):
        a = Tensor(np.array([2.0]), requires_grad=True)
        b = Tensor(np.array([5.0]), requires_grad=True)
        out = (a + b) * a - b / a + a ** 2.0 - (-b)
        out.backward()
        # d/da [a^2 + ab - b/a + a^2 + b] = 2a + b + b/a^2 + 2a
        assert a.grad[0] == pytest.approx(2 * 2 + 5 + 5 / 4 + 2 * 2)
        # d/db [ab - b/a + b] = a - 1/a + 1
        assert b.grad[0] == pytest.approx(2 - 0.5 + 1)

    def test_backward_seed_scales(self):
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        out = ad.tsum(ad.mul(x, x))
        out.backward(np.array(3.0))
        assert np.allclose(x.grad, 3.0 * 2.0 * x.data)

    def test_python_scalars_promote(self):
        x = Tensor(np.array([4.0]), requires_grad=True)
        out = 2.0 * x + 1.0
        out.backward()
        assert x.grad[0] == 2.0
