import math

import numpy as np
import pytest

from epitsr.autodiff import (
    Tape,
    Tensor,
    add,
    backward,
    check_gradients,
    conv2d,
    detect_anomaly,
    l1_loss,
    layer_norm,
    leaky_relu,
    matmul,
    mul,
    pixel_shuffle,
    pixel_unshuffle,
    precision,
    scale,
    softmax_last,
    sum_all,
)
from epitsr.errors import NonFiniteError, NonScalarLossError, ShapeMismatchError


def _naive_conv(x, w, b):
    batch, c_in, height, width = x.shape
    c_out, _, kh, kw = w.shape
    padded = np.pad(x, ((0, 0), (0, 0), (kh // 2, kh // 2), (kw // 2, kw // 2)))
    out = np.zeros((batch, c_out, height, width))
    for n in range(batch):
        for o in range(c_out):
            for i in range(height):
                for j in range(width):
                    total = b[o]
                    for c in range(c_in):
                        for p in range(kh):
                            for q in range(kw):
                                total += padded[n, c, i + p, j + q] * w[o, c, p, q]
                    out[n, o, i, j] = total
    return out


class TestMatmul:
    def test_identity(self, rng):
        a = Tensor(rng.random((3, 4)))
        np.testing.assert_array_equal(matmul(a, np.eye(4, dtype=np.float32)).data, a.data)

    def test_small_product(self):
        out = matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
        np.testing.assert_array_equal(out.data, [[17.0], [39.0]])

    def test_gradient(self, rng):
        with precision(np.float64):
            a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
            b = Tensor(rng.normal(size=(4, 2)), requires_grad=True)
            weights = rng.normal(size=(3, 2))
            results = check_gradients("matmul", lambda: sum_all(mul(matmul(a, b), weights)), [("a", a), ("b", b)])
        assert all(r.max_rel_err <= 1e-6 for r in results)

    def test_extent_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


class TestSoftmax:
    def test_equal_logits(self):
        np.testing.assert_allclose(softmax_last(Tensor(np.zeros(4))).data, 0.25)

    def test_shift_invariance(self, rng):
        with precision(np.float64):
            x = Tensor(rng.normal(size=(3, 5)))
            np.testing.assert_allclose(softmax_last(x).data, softmax_last(add(x, 12.5)).data, atol=1e-7)

    def test_two_logits(self):
        with precision(np.float64):
            out = softmax_last(Tensor([0.0, math.log(2.0)])).data
        np.testing.assert_allclose(out, [1.0 / 3.0, 2.0 / 3.0], atol=1e-12)

    def test_large_logits_are_stable(self, rng):
        out = softmax_last(Tensor(rng.uniform(-1e4, 1e4, size=(6, 7)))).data
        assert np.all(out >= 0.0)
        np.testing.assert_allclose(out.sum(axis=-1), 1.0, atol=1e-6)


class TestLayerNorm:
    def _affine(self, width):
        return Tensor(np.ones(width)), Tensor(np.zeros(width))

    def test_constant_token(self):
        out = layer_norm(Tensor(np.full((2, 4), 3.0)), *self._affine(4))
        np.testing.assert_array_equal(out.data, 0.0)

    def test_two_entry_token(self):
        with precision(np.float64):
            out = layer_norm(Tensor([[-1.0, 1.0]]), *self._affine(2)).data
        expected = np.array([-1.0, 1.0]) / math.sqrt(1.0 + 1e-5)
        np.testing.assert_allclose(out[0], expected, atol=1e-12)

    def test_standardizes(self, rng):
        with precision(np.float64):
            out = layer_norm(Tensor(rng.normal(2.0, 3.0, size=(5, 16))), *self._affine(16)).data
        np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-10)
        np.testing.assert_allclose(out.var(axis=-1), 1.0, atol=1e-4)

    def test_gradient(self, rng):
        with precision(np.float64):
            x = Tensor(rng.normal(size=(3, 6)), requires_grad=True)
            gamma = Tensor(rng.uniform(0.5, 1.5, size=6), requires_grad=True)
            beta = Tensor(rng.normal(size=6), requires_grad=True)
            weights = rng.normal(size=(3, 6))
            results = check_gradients(
                "layer_norm",
                lambda: sum_all(mul(layer_norm(x, gamma, beta), weights)),
                [("x", x), ("gamma", gamma), ("beta", beta)],
            )
        assert all(r.max_rel_err <= 1e-6 for r in results)


class TestConv2d:
    def test_unit_1x1_kernel(self, rng):
        x = Tensor(rng.random((1, 1, 5, 5)))
        out = conv2d(x, Tensor(np.ones((1, 1, 1, 1))))
        np.testing.assert_array_equal(out.data, x.data)

    def test_delta_3x3_kernel(self, rng):
        x = Tensor(rng.random((2, 1, 5, 6)))
        kernel = np.zeros((1, 1, 3, 3))
        kernel[0, 0, 1, 1] = 1.0
        np.testing.assert_array_equal(conv2d(x, Tensor(kernel)).data, x.data)

    def test_matches_loop(self, rng):
        with precision(np.float64):
            x, w, b = rng.normal(size=(1, 2, 5, 5)), rng.normal(size=(3, 2, 3, 3)), rng.normal(size=3)
            out = conv2d(Tensor(x), Tensor(w), Tensor(b)).data
        np.testing.assert_allclose(out, _naive_conv(x, w, b), atol=1e-6)

    def test_valid_padding_extents(self, rng):
        out = conv2d(Tensor(rng.random((4, 3, 2, 2))), Tensor(rng.random((5, 3, 2, 2))), padding="none")
        assert out.shape == (4, 5, 1, 1)

    def test_gradient(self, rng):
        with precision(np.float64):
            x = Tensor(rng.normal(size=(1, 2, 5, 5)), requires_grad=True)
            w = Tensor(rng.normal(size=(3, 2, 3, 3)), requires_grad=True)
            b = Tensor(rng.normal(size=3), requires_grad=True)
            weights = rng.normal(size=(1, 3, 5, 5))
            results = check_gradients(
                "conv2d", lambda: sum_all(mul(conv2d(x, w, b), weights)), [("x", x), ("w", w), ("b", b)]
            )
        assert all(r.max_rel_err <= 1e-5 for r in results)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeMismatchError):
            conv2d(Tensor(rng.random((1, 2, 4, 4))), Tensor(rng.random((1, 3, 3, 3))))


class TestLeakyRelu:
    def test_branches(self):
        out = leaky_relu(Tensor([3.0, -1.0, 0.0]), 0.1).data
        np.testing.assert_allclose(out, [3.0, -0.1, 0.0])

    def test_gate_at_zero(self):
        x = Tensor([0.0, -2.0], requires_grad=True)
        with Tape() as tape:
            loss = sum_all(leaky_relu(x, 0.1))
        np.testing.assert_allclose(backward(tape, loss)[x], [1.0, 0.1])


class TestPixelShuffle:
    def test_index_map(self, rng):
        x = rng.random((1, 4, 2, 2)).astype(np.float32)
        out = pixel_shuffle(Tensor(x), 2).data
        assert out.shape == (1, 1, 4, 4)
        for h in range(2):
            for w in range(2):
                for i in range(2):
                    for j in range(2):
                        assert out[0, 0, 2 * h + i, 2 * w + j] == x[0, i * 2 + j, h, w]

    def test_unit_factor(self, rng):
        x = Tensor(rng.random((2, 3, 4, 5)))
        np.testing.assert_array_equal(pixel_shuffle(x, 1).data, x.data)

    def test_inverse(self, rng):
        x = Tensor(rng.random((2, 3, 4, 6)))
        np.testing.assert_array_equal(pixel_shuffle(pixel_unshuffle(x, 2), 2).data, x.data)

    def test_divisibility(self, rng):
        with pytest.raises(ShapeMismatchError):
            pixel_shuffle(Tensor(rng.random((1, 6, 2, 2))), 2)


class TestL1Loss:
    def test_identical(self, rng):
        x = rng.random((3, 3)).astype(np.float32)
        assert l1_loss(Tensor(x), x).item() == 0.0

    def test_constant_difference(self):
        assert l1_loss(Tensor(np.ones((2, 5))), np.zeros((2, 5), dtype=np.float32)).item() == 1.0

    def test_gradient_entries(self, rng):
        pred = Tensor(rng.random(12), requires_grad=True)
        target = pred.data.copy()
        target[:4] += 1.0
        target[4:8] -= 1.0
        with Tape() as tape:
            loss = l1_loss(pred, target)
        grad = backward(tape, loss)[pred]
        np.testing.assert_allclose(grad[:4], -1.0 / 12, rtol=1e-6)
        np.testing.assert_allclose(grad[4:8], 1.0 / 12, rtol=1e-6)
        np.testing.assert_array_equal(grad[8:], 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            l1_loss(Tensor(np.zeros(3)), np.zeros(4))


class TestBackward:
    def test_sum_gives_ones(self, rng):
        x = Tensor(rng.random((2, 3)), requires_grad=True)
        with Tape() as tape:
            loss = sum_all(x)
        np.testing.assert_array_equal(backward(tape, loss)[x], np.ones((2, 3)))

    def test_disconnected_parameter_gets_zero(self, rng):
        x = Tensor(rng.random(3), requires_grad=True)
        unused = Tensor(rng.random(4), requires_grad=True)
        with Tape() as tape:
            loss = sum_all(x)
        np.testing.assert_array_equal(backward(tape, loss)[unused], np.zeros(4))

    def test_two_paths_accumulate(self, rng):
        x = Tensor(rng.random(5), requires_grad=True)
        with Tape() as tape:
            twice = sum_all(add(x, x))
        with Tape() as other:
            doubled = sum_all(scale(x, 2.0))
        np.testing.assert_array_equal(backward(tape, twice)[x], backward(other, doubled)[x])

    def test_non_scalar_loss(self, rng):
        x = Tensor(rng.random(3), requires_grad=True)
        with Tape() as tape:
            out = scale(x, 2.0)
        with pytest.raises(NonScalarLossError):
            backward(tape, out)

    def test_two_layer_net(self, rng):
        with precision(np.float64):
            x = rng.normal(size=(6, 4))
            y = rng.normal(size=(6, 2)) + 5.0
            w1 = Tensor(rng.normal(size=(4, 8)), requires_grad=True)
            w2 = Tensor(rng.normal(size=(8, 2)), requires_grad=True)
            results = check_gradients(
                "toy_net",
                lambda: l1_loss(matmul(leaky_relu(matmul(x, w1)), w2), y),
                [("w1", w1), ("w2", w2)],
                h=1e-4,
            )
        assert all(r.passed for r in results)

    def test_anomaly_mode(self):
        with precision(np.float64), detect_anomaly():
            x = Tensor([1e200])
            with pytest.raises(NonFiniteError):
                mul(x, x)
