import numpy as np
import pytest

from xrec.nn.optim import AdamState, adam_step, clip_grad_norm, collect_params, noam_lr
from xrec.nn.tensor import Tensor


def test_noam_lr_hand_values():
    # d_model 64, warmup 100: scale is 64^-0.5 = 0.125
    assert noam_lr(1, 64, 100) == pytest.approx(0.125 * 100**-1.5)
    assert noam_lr(100, 64, 100) == pytest.approx(0.125 * 0.1)
    assert noam_lr(400, 64, 100) == pytest.approx(0.125 * 0.05)
    assert noam_lr(50, 64, 100, scale=2.0) == pytest.approx(2.0 * noam_lr(50, 64, 100))


def test_noam_lr_peaks_at_warmup():
    values = [noam_lr(s, 32, 20) for s in range(1, 100)]
    peak = int(np.argmax(values)) + 1
    assert peak == 20
    assert values[:19] == sorted(values[:19])
    assert values[20:] == sorted(values[20:], reverse=True)


def test_noam_lr_rejects_step_zero():
    with pytest.raises(ValueError):
        noam_lr(0, 64, 100)


def test_adam_state_shapes():
    params = [Tensor(np.zeros((2, 3)), requires_grad=True),
              Tensor(np.zeros(4), requires_grad=True)]
    state = AdamState.for_params(params)
    assert [m.shape for m in state.m] == [(2, 3), (4,)]
    assert [v.shape for v in state.v] == [(2, 3), (4,)]
    assert state.step == 0


def test_adam_step_first_update_matches_formula():
    p = Tensor(np.array([1.0, -2.0], dtype=np.float32), requires_grad=True)
    p.grad = np.array([0.5, -0.25], dtype=np.float32)
    state = AdamState.for_params([p])
    adam_step([p], state, lr=0.1, beta1=0.9, beta2=0.98, eps=1e-9)
    # with zero moments the bias-corrected update is lr * sign-ish g/|g|
    expected = np.array([1.0, -2.0]) - 0.1 * np.array([0.5, -0.25]) / (
        np.abs(np.array([0.5, -0.25])) + 1e-9
    )
    np.testing.assert_allclose(p.data, expected, rtol=1e-5)
    assert state.step == 1


def test_adam_step_skips_unset_grads():
    p = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
    state = AdamState.for_params([p])
    adam_step([p], state, lr=0.5)
    np.testing.assert_array_equal(p.data, np.ones(3))
    assert state.step == 1  # the step counter still advances


def test_adam_converges_on_quadratic():
    p = Tensor(np.array([5.0, -3.0], dtype=np.float32), requires_grad=True)
    state = AdamState.for_params([p])
    for _ in range(800):
        p.grad = 2.0 * p.data
        adam_step([p], state, lr=0.05)
    assert np.abs(p.data).max() < 1e-2


def test_clip_grad_norm():
    a = Tensor(np.zeros(2), requires_grad=True)
    b = Tensor(np.zeros(2), requires_grad=True)
    a.grad = np.array([3.0, 0.0])
    b.grad = np.array([0.0, 4.0])
    norm = clip_grad_norm([a, b], max_norm=1.0)
    assert norm == pytest.approx(5.0)
    total = np.concatenate([a.grad, b.grad])
    assert np.linalg.norm(total) == pytest.approx(1.0, rel=1e-6)

    a.grad = np.array([0.3, 0.0])
    b.grad = None
    norm = clip_grad_norm([a, b], max_norm=1.0)
    assert norm == pytest.approx(0.3)
    np.testing.assert_allclose(a.grad, [0.3, 0.0])


def test_collect_params_order_and_nesting():
    t1 = Tensor(np.zeros(1))
    t2 = Tensor(np.zeros(2))
    t3 = Tensor(np.zeros(3))
    tree = {"a": t1, "b": [t2, {"c": t3}]}
    assert collect_params(tree) == [t1, t2, t3]
