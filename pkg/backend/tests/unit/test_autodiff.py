"""
Unit tests for the gradient tape and the differentiable primitives.

Every primitive is checked against central finite differences; shape rules
and error reporting are checked directly.
"""

from __future__ import annotations

import numpy as np
import pytest

from autodiff import BatchNormState, Parameter, Tape, Tensor, ops, window_geometry
from exceptions import InvalidArgumentError, ShapeMismatchError
from tests.utils import numeric_gradient, relative_error

GRAD_TOLERANCE = 1e-5

def _leaf_gradient(fn, value: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tape gradient and finite-difference gradient of scalar ``fn`` at ``value``."""
    with Tape() as tape:
        x = tape.variable(value)
        loss = fn(x)
    analytic = tape.backward(loss).of(x)
    numeric = numeric_gradient(lambda v: float(fn(Tensor(v)).data), value.copy())
    return analytic, numeric

def _weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
    return ops.sum(ops.mul(out, Tensor(weights)))

# ---------------------------------------------------------------------------
# Tape recording
# ---------------------------------------------------------------------------

class TestTapeRecording:
    def test_add_appends_node(self) -> None:
        with Tape() as tape:
            a = tape.variable([1.0, 2.0])
            b = tape.variable([3.0, 4.0])
            before = len(tape)
            c = ops.add(a, b)
        np.testing.assert_array_equal(c.data, [4.0, 6.0])
        assert len(tape) == before + 1
        assert tape.nodes[c.node_id].op == "add"

    def test_matmul_shape(self) -> None:
        out = ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 4))))
        assert out.shape == (2, 4)

    def test_matmul_mismatch_names_op_and_shapes(self) -> None:
        with pytest.raises(ShapeMismatchError) as exc_info:
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 4))))
        assert exc_info.value.op == "matmul"
        assert (2, 3) in exc_info.value.shapes
        assert (4, 4) in exc_info.value.shapes

    def test_unrecorded_inputs_stay_off_the_tape(self) -> None:
        with Tape() as tape:
            out = ops.add(Tensor([1.0]), Tensor([2.0]))
        assert not out.recorded
        assert len(tape) == 0

    def test_parameter_lifts_once_per_tape(self) -> None:
        param = Parameter("w", np.ones(3))
        with Tape() as tape:
            first = param.tensor()
            second = param.tensor()
        assert first.node_id == second.node_id
        assert len(tape) == 1

    def test_parameter_outside_tape_is_plain(self) -> None:
        assert not Parameter("w", np.ones(2)).tensor().recorded

    def test_item_of_a_scalar(self) -> None:
        assert Tensor(np.array([[2.5]])).item() == 2.5

    def test_item_rejects_non_scalars(self) -> None:
        with pytest.raises(InvalidArgumentError, match=r"one-element tensor, got shape \(2,\)"):
            Tensor([1.0, 2.0]).item()

# ---------------------------------------------------------------------------
# Backward pass
# ---------------------------------------------------------------------------

class TestBackward:
    def test_square_sum_gradient(self) -> None:
        with Tape() as tape:
            x = tape.variable([1.0, -2.0, 3.0])
            loss = ops.sum(ops.mul(x, x))
        np.testing.assert_allclose(tape.backward(loss).of(x), [2.0, -4.0, 6.0])

    def test_softmax_cross_entropy_gradient(self) -> None:
        logits = np.array([[0.3, -1.2, 2.0]])
        target = np.array([[0.0, 0.0, 1.0]])
        with Tape() as tape:
            x = tape.variable(logits)
            loss = ops.softmax_cross_entropy(x, Tensor(target))
        shifted = np.exp(logits - logits.max())
        expected = shifted / shifted.sum() - target
        np.testing.assert_allclose(tape.backward(loss).of(x), expected, atol=1e-12)

    def test_non_scalar_loss_rejected(self) -> None:
        with Tape() as tape:
            x = tape.variable([1.0, 2.0])
            out = ops.mul(x, x)
        with pytest.raises(InvalidArgumentError):
            tape.backward(out)

    def test_gradients_accumulate_over_reuse(self) -> None:
        with Tape() as tape:
            x = tape.variable([2.0])
            loss = ops.sum(ops.add(ops.mul(x, x), x))
        np.testing.assert_allclose(tape.backward(loss).of(x), [5.0])

    def test_unreached_parameter_reads_zero(self) -> None:
        used = Parameter("used", np.ones(2))
        unused = Parameter("unused", np.ones((2, 2)))
        with Tape() as tape:
            loss = ops.sum(used.tensor())
        grads = tape.backward(loss).for_parameters([used, unused])
        np.testing.assert_array_equal(grads["unused"], np.zeros((2, 2)))
        np.testing.assert_array_equal(grads["used"], np.ones(2))

    def test_matmul_chain_matches_finite_differences(self, rng: np.random.Generator) -> None:
        a = rng.standard_normal((3, 4))
        b = Tensor(rng.standard_normal((4, 2)))
        analytic, numeric = _leaf_gradient(
            lambda x: ops.sum(ops.tanh(ops.matmul(x, b))), a
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

# ---------------------------------------------------------------------------
# Primitive gradient checks
# ---------------------------------------------------------------------------

class TestPrimitiveGradients:
    @pytest.mark.parametrize(
        "op",
        [ops.relu, ops.sigmoid, ops.tanh, ops.exp, ops.softmax, ops.neg],
        ids=["relu", "sigmoid", "tanh", "exp", "softmax", "neg"],
    )
    def test_elementwise(self, op, rng: np.random.Generator) -> None:
        value = rng.standard_normal((3, 5))
        weights = rng.standard_normal((3, 5))
        analytic, numeric = _leaf_gradient(lambda x: _weighted_sum(op(x), weights), value)
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_log(self, rng: np.random.Generator) -> None:
        value = rng.uniform(0.5, 2.0, size=(4,))
        analytic, numeric = _leaf_gradient(lambda x: ops.sum(ops.log(x)), value)
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_broadcast_add_and_mul(self, rng: np.random.Generator) -> None:
        row = Tensor(rng.standard_normal((1, 4)))
        value = rng.standard_normal((3, 4))
        analytic, numeric = _leaf_gradient(
            lambda x: ops.sum(ops.mul(ops.add(x, row), ops.sub(x, 0.5))), value
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_reductions_and_reshape(self, rng: np.random.Generator) -> None:
        value = rng.standard_normal((2, 3, 4))
        weights = rng.standard_normal((3, 4))
        analytic, numeric = _leaf_gradient(
            lambda x: _weighted_sum(
                ops.transpose(ops.reshape(ops.mean(x, axis=0), (4, 3))), weights
            ),
            value,
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_concat_stack_getitem(self, rng: np.random.Generator) -> None:
        value = rng.standard_normal((2, 3))
        other = Tensor(rng.standard_normal((2, 2)))
        weights = rng.standard_normal((2, 2, 5))

        def fn(x: Tensor) -> Tensor:
            joined = ops.concat([x, other], axis=-1)
            stacked = ops.stack([joined, ops.scale(joined, 2.0)], axis=1)
            column = ops.sum(ops.getitem(x, (slice(None), 1)))
            return ops.add(_weighted_sum(stacked, weights), ops.mul(column, column))

        analytic, numeric = _leaf_gradient(fn, value)
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    @pytest.mark.parametrize("padding", ["SAME", "VALID"])
    def test_conv2d(self, padding: str, rng: np.random.Generator) -> None:
        value = rng.standard_normal((2, 5, 4, 2))
        kernel = rng.standard_normal((3, 2, 2, 3))
        out_shape = ops.conv2d(Tensor(value), Tensor(kernel), (2, 1), padding).shape
        weights = rng.standard_normal(out_shape)
        analytic, numeric = _leaf_gradient(
            lambda x: _weighted_sum(ops.conv2d(x, Tensor(kernel), (2, 1), padding), weights),
            value,
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE
        analytic, numeric = _leaf_gradient(
            lambda k: _weighted_sum(ops.conv2d(Tensor(value), k, (2, 1), padding), weights),
            kernel,
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_maxpool2d(self, rng: np.random.Generator) -> None:
        value = rng.standard_normal((1, 4, 6, 2))
        weights = rng.standard_normal((1, 2, 3, 2))
        analytic, numeric = _leaf_gradient(
            lambda x: _weighted_sum(ops.maxpool2d(x, (2, 2)), weights), value
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_batchnorm_train(self, rng: np.random.Generator) -> None:
        value = rng.standard_normal((3, 2, 2, 4))
        weights = rng.standard_normal(value.shape)
        gamma = Tensor(rng.uniform(0.5, 1.5, 4))
        beta = Tensor(rng.standard_normal(4))

        def fn(x: Tensor) -> Tensor:
            state = BatchNormState.create(4)
            return _weighted_sum(ops.batchnorm(x, gamma, beta, state, train=True), weights)

        analytic, numeric = _leaf_gradient(fn, value)
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

    def test_softmax_cross_entropy(self, rng: np.random.Generator) -> None:
        value = rng.standard_normal((4, 3))
        targets = Tensor(np.eye(3)[[0, 2, 1, 2]])
        analytic, numeric = _leaf_gradient(
            lambda x: ops.softmax_cross_entropy(x, targets), value
        )
        assert relative_error(analytic, numeric) < GRAD_TOLERANCE

# ---------------------------------------------------------------------------
# Shape rules and regularization
# ---------------------------------------------------------------------------

class TestShapesAndRegularization:
    def test_valid_pool_extent(self) -> None:
        assert window_geometry(8310, 32, 32, "VALID")[0] == 259

    def test_same_extent_is_ceiling(self) -> None:
        assert window_geometry(75, 3, 1, "SAME")[0] == 75
        assert window_geometry(9, 3, 2, "SAME")[0] == 5

    def test_pool_underflow(self) -> None:
        with pytest.raises(ShapeMismatchError, match="underflow"):
            ops.maxpool2d(Tensor(np.ones((1, 4, 1, 2))), (1, 2))

    def test_invalid_padding_kind(self) -> None:
        with pytest.raises(InvalidArgumentError):
            ops.conv2d(Tensor(np.ones((1, 3, 3, 1))), Tensor(np.ones((1, 1, 1, 1))), (1, 1), "FULL")

    def test_dropout_identity_at_inference(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.standard_normal((4, 4)))
        assert ops.dropout(x, 0.5, train=False) is x

    def test_dropout_preserves_expectation(self) -> None:
        x = Tensor(np.ones((200, 200)))
        dropped = ops.dropout(x, 0.25, train=True, rng=np.random.default_rng(0))
        assert abs(float(dropped.data.mean()) - 1.0) < 0.02
        assert set(np.unique(dropped.data)) <= {0.0, 1.0 / 0.75}

    def test_batchnorm_updates_running_statistics(self, rng: np.random.Generator) -> None:
        state = BatchNormState.create(2, momentum=0.5)
        x = Tensor(rng.normal(3.0, 1.0, size=(50, 2)))
        ops.batchnorm(x, Tensor(np.ones(2)), Tensor(np.zeros(2)), state, train=True)
        np.testing.assert_allclose(state.mean, 0.5 * x.data.mean(axis=0))
        assert state.updates == 1
