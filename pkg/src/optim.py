"""First-order optimizers over a flat parameter vector."""

from enum import Enum

import numpy as np


class OptimizerKind(str, Enum):
    ADAM = "adam"
    SGD = "sgd"


class SGD:
    def __init__(self, lr: float = 0.05):
        self.lr = lr
        self.t = 0

    def step(self, params: np.ndarray, grads: np.ndarray) -> None:
        self.t += 1
        params -= self.lr * grads


class Adam:
    """Adaptive moment estimation; updates `params` in place."""

    def __init__(
        self,
        lr: float = 0.05,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params: np.ndarray, grads: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t

        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grads
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grads * grads)

        denom = np.sqrt(self.v / bc2) + self.epsilon
        params -= (self.lr / bc1) * self.m / denom


def make_optimizer(kind: OptimizerKind, lr: float):
    if OptimizerKind(kind) is OptimizerKind.ADAM:
        return Adam(lr=lr)
    return SGD(lr=lr)
