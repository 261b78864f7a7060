"""Single LSTM cell forward pass (logistic gates, tanh cell/output activations)."""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch

GATES = ("f", "i", "o", "c")


@dataclass(frozen=True)
class LstmParams:
    W: dict  # gate -> (hidden, input)
    U: dict  # gate -> (hidden, hidden)
    b: dict  # gate -> (hidden,)

    def __post_init__(self):
        for g in GATES:
            if g not in self.W or g not in self.U or g not in self.b:
                raise DimensionMismatch(f"missing parameters for gate {g!r}")
        hidden, inp = np.shape(self.W["f"])
        for g in GATES:
            if np.shape(self.W[g]) != (hidden, inp):
                raise DimensionMismatch(f"W_{g} has shape {np.shape(self.W[g])}")
            if np.shape(self.U[g]) != (hidden, hidden):
                raise DimensionMismatch(f"U_{g} has shape {np.shape(self.U[g])}")
            if np.shape(self.b[g]) != (hidden,):
                raise DimensionMismatch(f"b_{g} has shape {np.shape(self.b[g])}")

    @property
    def input_size(self) -> int:
        return np.shape(self.W["f"])[1]

    @property
    def hidden_size(self) -> int:
        return np.shape(self.W["f"])[0]

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> "LstmParams":
        return cls({g: np.zeros((hidden_size, input_size)) for g in GATES},
                   {g: np.zeros((hidden_size, hidden_size)) for g in GATES},
                   {g: np.zeros(hidden_size) for g in GATES})

    @classmethod
    def random(cls, input_size: int, hidden_size: int, rng, scale: float = 0.5) -> "LstmParams":
        def draw(*shape):
            return rng.uniform(-scale, scale, shape)
        return cls({g: draw(hidden_size, input_size) for g in GATES},
                   {g: draw(hidden_size, hidden_size) for g in GATES},
                   {g: draw(hidden_size) for g in GATES})


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int) -> "LstmState":
        return cls(np.zeros(hidden_size), np.zeros(hidden_size))


def sigmoid(z):
    # split by sign so exp never overflows
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_cell_forward(x, prev: LstmState, p: LstmParams, return_gates: bool = False):
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.asarray(prev.h, dtype=np.float64)
    c_prev = np.asarray(prev.c, dtype=np.float64)
    if x.shape != (p.input_size,):
        raise DimensionMismatch(f"input has shape {x.shape}, expected ({p.input_size},)")
    if h_prev.shape != (p.hidden_size,) or c_prev.shape != (p.hidden_size,):
        raise DimensionMismatch("state size does not match hidden size")

    def pre(g):
        return p.W[g] @ x + p.U[g] @ h_prev + p.b[g]

    f = sigmoid(pre("f"))
    i = sigmoid(pre("i"))
    o = sigmoid(pre("o"))
    c = f * c_prev + i * np.tanh(pre("c"))
    h = o * np.tanh(c)
    state = LstmState(h, c)
    if return_gates:
        return state, {"f": f, "i": i, "o": o}
    return state
