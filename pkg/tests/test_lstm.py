import numpy as np
import pytest

from oracles import lstm_loop
from refusion.backends.lstm import LstmParams, LstmState, lstm_cell_forward, sigmoid
from refusion.errors import DimensionMismatch


def as_lists(p):
    return ({g: p.W[g].tolist() for g in p.W}, {g: p.U[g].tolist() for g in p.U},
            {g: p.b[g].tolist() for g in p.b})


def test_zero_parameters():
    p = LstmParams.zeros(3, 4)
    out = lstm_cell_forward(np.ones(3), LstmState(np.zeros(4), np.full(4, 2.0)), p)
    # f = i = o = 0.5, candidate tanh(0) = 0
    np.testing.assert_allclose(out.c, np.full(4, 1.0))
    np.testing.assert_allclose(out.h, 0.5 * np.tanh(1.0))


def test_saturated_forget_gate_keeps_cell():
    p = LstmParams.zeros(2, 2)
    p.b["f"][:] = 50.0
    p.b["i"][:] = -50.0
    prev = LstmState(np.zeros(2), np.array([0.7, -0.3]))
    out = lstm_cell_forward(np.array([5.0, -5.0]), prev, p)
    np.testing.assert_allclose(out.c, prev.c, atol=1e-12)


def test_matches_scalar_loop():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n_in, n_h = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        p = LstmParams.random(n_in, n_h, rng, scale=1.5)
        x, h, c = rng.normal(size=n_in), rng.normal(size=n_h), rng.normal(size=n_h)
        got = lstm_cell_forward(x, LstmState(h, c), p)
        wh, wc = lstm_loop(x.tolist(), h.tolist(), c.tolist(), *as_lists(p))
        np.testing.assert_allclose(got.h, wh, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(got.c, wc, rtol=1e-9, atol=1e-12)


def test_gates_open_interval_and_h_bounded():
    rng = np.random.default_rng(2)
    p = LstmParams.random(4, 5, rng, scale=3.0)
    out, gates = lstm_cell_forward(rng.normal(size=4) * 4, LstmState.zeros(5), p,
                                   return_gates=True)
    for g in gates.values():
        assert np.all((g > 0) & (g < 1))
    assert np.all(np.abs(out.h) < 1)


def test_sigmoid_stable_at_extremes():
    v = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
    assert v.tolist() == [0.0, 0.5, 1.0]


def test_dimension_mismatch():
    p = LstmParams.zeros(3, 2)
    with pytest.raises(DimensionMismatch):
        lstm_cell_forward(np.ones(4), LstmState.zeros(2), p)
    with pytest.raises(DimensionMismatch):
        lstm_cell_forward(np.ones(3), LstmState.zeros(3), p)
    bad = dict(p.W)
    bad["o"] = np.zeros((2, 5))
    with pytest.raises(DimensionMismatch):
        LstmParams(bad, p.U, p.b)
