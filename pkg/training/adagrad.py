# training/adagrad.py
# =============================================================================
import numpy as np

from config.settings import Config
from utils.exceptions import NumericalError


class SparseAdagrad:
    """Per-coordinate Adagrad over a dense parameter array, touching only the given coordinates.

    AdaGradUpdate(x, g): G_i += g_i^2, then x_i -= lr * g_i / (sqrt(G_i) + eps).
    """

    def __init__(self, param: np.ndarray, learning_rate: float = None, epsilon: float = None):
        self.param = param
        self.sum = np.zeros_like(param)
        self.learning_rate = Config.LEARNING_RATE if learning_rate is None else learning_rate
        self.epsilon = Config.ADAGRAD_EPSILON if epsilon is None else epsilon
        self.steps = 0

    def update(self, index, grad: np.ndarray) -> None:
        """``index`` selects unique coordinates of ``param``; grad has the selected shape.

        Zero entries of ``grad`` leave their coordinate untouched, so epsilon may be 0.
        """
        self.steps += 1
        if not np.all(np.isfinite(grad)):
            raise NumericalError("non-finite gradient in Adagrad update", self.steps)
        local_sum = self.sum[index] + grad * grad
        self.sum[index] = local_sum
        step = np.divide(grad, np.sqrt(local_sum) + self.epsilon,
                         out=np.zeros_like(local_sum), where=grad != 0.0)
        self.param[index] -= self.learning_rate * step
        if not np.all(np.isfinite(self.param[index])):
            raise NumericalError("Adagrad update produced non-finite parameters", self.steps)
