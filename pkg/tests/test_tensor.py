"""Gradient exactness of the autodiff primitives against finite differences."""

import numpy as np
import pytest

from crossaec.errors import DegenerateInputError, ShapeError
from crossaec.nn import (
    Tensor,
    add,
    cross_entropy,
    embedding_lookup,
    layer_norm,
    masked_softmax,
    matmul,
    mul,
    no_grad,
    relu,
    reshape,
    swapaxes,
    tanh,
    tensor_sum,
)


def numeric_grad(f, x, h=1e-6):
    """Central-difference gradient of scalar f at array x."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f()
        flat[i] = orig - h
        down = f()
        flat[i] = orig
        gflat[i] = (up - down) / (2 * h)
    return g


def check_op(build_loss, *arrays, tol=1e-6):
    """Compare analytic grads of build_loss(*tensors) to finite differences."""
    tensors = [Tensor(a, requires_grad=True) for a in arrays]
    loss = build_loss(*tensors)
    loss.backward()
    for t, a in zip(tensors, arrays):
        num = numeric_grad(lambda: float(build_loss(*[Tensor(x.data) for x in tensors]).data), a)
        assert t.grad is not None
        np.testing.assert_allclose(t.grad, num, rtol=tol, atol=tol)


rng = np.random.default_rng(7)


def test_add_broadcast_grad():
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4,))
    check_op(lambda x, y: tensor_sum(mul(add(x, y), add(x, y))), a, b)


def test_matmul_grad():
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))
    check_op(lambda x, y: tensor_sum(tanh(matmul(x, y))), a, b)


def test_matmul_batched_grad():
    a = rng.normal(size=(2, 3, 4))
    b = rng.normal(size=(2, 4, 3))
    check_op(lambda x, y: tensor_sum(matmul(x, y)), a, b)


def test_matmul_broadcast_batch_grad():
    a = rng.normal(size=(2, 5, 3, 4))
    b = rng.normal(size=(4, 3))
    check_op(lambda x, y: tensor_sum(tanh(matmul(x, y))), a, b)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_reshape_swapaxes_grad():
    a = rng.normal(size=(2, 3, 4))
    check_op(
        lambda x: tensor_sum(tanh(reshape(swapaxes(x, 0, 2), (4, 6)))), a
    )


def test_relu_grad():
    a = rng.normal(size=(5, 5))
    check_op(lambda x: tensor_sum(mul(relu(x), relu(x))), a)


def test_masked_softmax_rows_sum_to_one():
    logits = Tensor(rng.normal(size=(6, 9)))
    mask = rng.random((6, 9)) > 0.3
    mask[:, 0] = True
    probs = masked_softmax(logits, mask).data
    np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-9)
    assert (probs[~mask] == 0.0).all()


def test_masked_softmax_grad():
    a = rng.normal(size=(4, 6))
    mask = rng.random((4, 6)) > 0.4
    mask[:, 2] = True

    def loss(x):
        return tensor_sum(mul(masked_softmax(x, mask), Tensor(np.arange(24.0).reshape(4, 6))))

    check_op(loss, a)


def test_masked_softmax_all_masked_rejected():
    with pytest.raises(DegenerateInputError):
        masked_softmax(Tensor(np.zeros((2, 3))), np.zeros((2, 3), dtype=bool))


def test_layer_norm_grad():
    x = rng.normal(size=(3, 5, 8))
    gain = rng.normal(size=(8,))
    offset = rng.normal(size=(8,))
    check_op(
        lambda a, g, o: tensor_sum(tanh(layer_norm(a, g, o))), x, gain, offset
    )


def test_embedding_grad():
    w = rng.normal(size=(7, 4))
    ids = np.array([[1, 3, 3], [0, 6, 2]])
    check_op(lambda t: tensor_sum(tanh(embedding_lookup(t, ids))), w)


def test_cross_entropy_matches_direct_formula():
    # Two-position case evaluated against the raw definition.
    logits = np.array([[1.0, -0.5, 0.25], [0.0, 2.0, -1.0]])
    targets = np.array([2, 1])
    weights = np.array([0.5, 0.5])
    loss = cross_entropy(Tensor(logits), targets, weights)
    expected = 0.0
    for row, t in zip(logits, targets):
        p = np.exp(row - row.max())
        p /= p.sum()
        expected += 0.5 * -np.log(p[t])
    assert abs(float(loss.data) - expected) < 1e-9


def test_cross_entropy_grad():
    logits = rng.normal(size=(2, 3, 5))
    ids = rng.integers(0, 5, size=(2, 3))
    w = rng.random((2, 3))
    check_op(lambda x: cross_entropy(x, ids, w), logits)


def test_gradient_zero_for_unused_parameter():
    used = Tensor(np.ones((2, 2)), requires_grad=True)
    unused = Tensor(np.ones((2, 2)), requires_grad=True)
    loss = tensor_sum(mul(used, used))
    loss.backward()
    assert unused.grad is None
    assert used.grad is not None


def test_backward_linearity():
    a = rng.normal(size=(3, 3))
    t1 = Tensor(a, requires_grad=True)
    loss1 = tensor_sum(mul(t1, t1))
    loss1.backward()
    g1 = t1.grad.copy()

    t2 = Tensor(a, requires_grad=True)
    loss2 = tensor_sum(mul(t2, t2)) * 2.0
    loss2.backward()
    np.testing.assert_allclose(t2.grad, 2.0 * g1, rtol=0, atol=0)


def test_grad_accumulates_across_reuse():
    t = Tensor(np.array([[2.0]]), requires_grad=True)
    loss = tensor_sum(add(mul(t, t), t))
    loss.backward()
    np.testing.assert_allclose(t.grad, [[5.0]])


def test_no_grad_blocks_graph():
    t = Tensor(np.ones((2, 2)), requires_grad=True)
    with no_grad():
        out = mul(t, t)
    assert not out.requires_grad
