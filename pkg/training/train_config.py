# training/train_config.py
# =============================================================================
from dataclasses import asdict, dataclass
from typing import Optional

from config.settings import Config
from training.sampler import NegativeConfig
from utils.exceptions import UsageError

_LOSS_POWER = {"linear.adagrad": 1, "linear.dcd": 2, "embedding": 1}


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = Config.ALGORITHM
    loss_power: Optional[int] = None  # derived from the algorithm when unset
    C: float = Config.REGULARIZATION_C
    learning_rate: float = Config.LEARNING_RATE
    adagrad_epsilon: float = Config.ADAGRAD_EPSILON
    epochs: int = Config.EPOCHS
    m: int = Config.NUM_NEGATIVE_ENTITIES
    n: int = Config.NUM_NEGATIVE_TYPES
    seed: int = Config.SEED
    resample_negatives: bool = True
    tolerance: float = Config.DCD_TOLERANCE
    max_sweeps: int = Config.DCD_MAX_SWEEPS
    dim: int = Config.EMBEDDING_DIM

    def __post_init__(self):
        if self.algorithm not in _LOSS_POWER:
            raise UsageError(f"unknown algorithm '{self.algorithm}', expected one of {sorted(_LOSS_POWER)}")
        expected = _LOSS_POWER[self.algorithm]
        if self.loss_power is None:
            object.__setattr__(self, "loss_power", expected)
        elif self.loss_power != expected:
            raise UsageError(f"{self.algorithm} trains with loss power {expected}, got {self.loss_power}")
        if self.C <= 0:
            raise UsageError(f"C must be > 0, got {self.C}")
        if self.learning_rate <= 0 or self.adagrad_epsilon < 0:
            raise UsageError("learning rate must be > 0 and epsilon >= 0")
        if self.epochs < 0 or self.max_sweeps < 0:
            raise UsageError("epochs and max sweeps must be >= 0")
        if self.dim < 1:
            raise UsageError(f"embedding dimension must be >= 1, got {self.dim}")
        # validates m and n
        self.negative_config

    @property
    def regularized(self) -> bool:
        """Only the batch solver carries Reg(theta) and C; online training uses Reg=0, C=1"""
        return self.algorithm == "linear.dcd"

    @property
    def negative_config(self) -> NegativeConfig:
        return NegativeConfig(self.m, self.n, self.seed, self.resample_negatives)

    def to_dict(self) -> dict:
        return asdict(self)
