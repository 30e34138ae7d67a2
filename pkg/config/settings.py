import logging
import os
from pathlib import Path
from dotenv import load_dotenv


class Config:
    """Configuration settings for the KB completion toolkit"""

    # Try loading .env file from config/ or project root
    env_path = Path(__file__).parent / ".env"
    if not env_path.exists():
        env_path = Path(__file__).parent.parent / ".env"
    load_dotenv(env_path)

    TOOL_VERSION = "0.3.0"

    # Run settings
    SEED = int(os.getenv("KBC_SEED", "0"))
    LOG_LEVEL = os.getenv("KBC_LOG_LEVEL", "INFO")
    THREADS = int(os.getenv("KBC_THREADS", "1"))

    # Dataset settings
    NUM_TYPES = 70
    EXTRA_NEGATIVE_FRACTION = float(os.getenv("KBC_EXTRA_NEGATIVE_FRACTION", "0.1"))

    # Feature settings
    MIN_DF = int(os.getenv("KBC_MIN_DF", "2"))
    FEATURE_BLOCKS = ("D", "W")
    FLOAT_FORMAT = ".9g"  # 9 significant digits everywhere we print numbers

    # Training settings
    ALGORITHMS = ("linear.adagrad", "linear.dcd", "embedding")
    ALGORITHM = "linear.adagrad"
    NUM_NEGATIVE_ENTITIES = 1  # m
    NUM_NEGATIVE_TYPES = 1  # n
    LEARNING_RATE = 0.1
    ADAGRAD_EPSILON = 1e-8
    EPOCHS = 5
    REGULARIZATION_C = 1.0
    DCD_TOLERANCE = 1e-6
    DCD_MAX_SWEEPS = 200
    EMBEDDING_DIM = 50

    # Will be overridden below based on algorithm
    LOSS_POWER = 1

    # Evaluation settings
    METRICS = ("map", "gap", "g@1000", "g@10000")
    GAK_NORM = "window"  # "window" or "global"

    @classmethod
    def apply_dynamic_settings(cls, algorithm=None):
        """Adjust settings dynamically based on the training algorithm"""
        algorithm = algorithm or cls.ALGORITHM
        if algorithm in ("linear.adagrad", "embedding"):
            # l1-hinge, no regularizer
            cls.LOSS_POWER = 1
        elif algorithm == "linear.dcd":
            # l2-hinge with L2 regularizer
            cls.LOSS_POWER = 2
        else:
            raise ValueError(f"Unknown training algorithm: {algorithm}")
        cls.ALGORITHM = algorithm

    @classmethod
    def setup_logging(cls, level=None):
        """Configure root logging once; logs go to stderr"""
        logging.basicConfig(
            level=getattr(logging, (level or cls.LOG_LEVEL).upper(), logging.INFO),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )


# Apply settings on import so any module that imports Config gets the right values automatically.
Config.apply_dynamic_settings()
