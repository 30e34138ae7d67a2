# training/sampler.py
# =============================================================================
"""Negative entity sets N_E(e,t) and negative type sets N_T(e,t).

The NE, NT and global objectives are just (m, n) settings of NegativeConfig.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple

import numpy as np

from config.settings import Config
from knowledge_base.snapshot import KBSnapshot
from knowledge_base.vocabulary import EntityId, TypeId
from utils.exceptions import UsageError

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class NegativeConfig:
    m: int = Config.NUM_NEGATIVE_ENTITIES
    n: int = Config.NUM_NEGATIVE_TYPES
    seed: int = Config.SEED
    resample: bool = True  # fresh negatives every epoch

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise UsageError(f"m and n must be >= 0, got m={self.m} n={self.n}")
        if self.m + self.n < 1:
            raise UsageError("at least one of m, n must be positive")

    @property
    def objective(self) -> str:
        if self.n == 0:
            return "NE"
        if self.m == 0:
            return "NT"
        return "global"


@dataclass(frozen=True)
class NegativeDraw:
    entities: Tuple[int, ...]
    types: Tuple[int, ...]


def _draw_entities(e, t, train: KBSnapshot, m, rng, num_entities) -> List[int]:
    observed = train.entities_of(t)
    e_observed = bool(len(observed)) and observed[min(np.searchsorted(observed, e), len(observed) - 1)] == e
    eligible = num_entities - len(observed) - (0 if e_observed else 1)
    k = min(m, eligible)
    if k <= 0:
        return []

    def excluded(c):
        if c == e:
            return True
        pos = np.searchsorted(observed, c)
        return pos < len(observed) and observed[pos] == c

    if eligible <= 4 * k:
        mask = np.ones(num_entities, dtype=bool)
        mask[observed[observed < num_entities]] = False
        mask[e] = False
        return rng.choice(np.flatnonzero(mask), size=k, replace=False).tolist()
    chosen, seen = [], set()
    while len(chosen) < k:
        c = int(rng.integers(num_entities))
        if c not in seen and not excluded(c):
            seen.add(c)
            chosen.append(c)
    return chosen


def _draw_types(e, t, train: KBSnapshot, n, rng, num_types) -> List[int]:
    observed = train.types_of(e)
    eligible = [c for c in range(num_types) if c != t and c not in observed]
    k = min(n, len(eligible))
    if k <= 0:
        return []
    return [eligible[i] for i in rng.choice(len(eligible), size=k, replace=False).tolist()]


def sample_negative_entities(e, t, train: KBSnapshot, m: int, rng, num_entities: int = None) -> FrozenSet[EntityId]:
    """Uniform sample without replacement of entities e' != e with (e', t) unobserved"""
    num_entities = len(train.entity_vocab) if num_entities is None else num_entities
    return frozenset(EntityId(c) for c in _draw_entities(e, t, train, m, rng, num_entities))


def sample_negative_types(e, t, train: KBSnapshot, n: int, rng, num_types: int = None) -> FrozenSet[TypeId]:
    """Uniform sample without replacement of types t' != t with (e, t') unobserved"""
    num_types = len(train.type_vocab) if num_types is None else num_types
    return frozenset(TypeId(c) for c in _draw_types(e, t, train, n, rng, num_types))


class NegativeSampler:
    """Draws N_E and N_T per training fact from per-fact random substreams.

    Each (epoch, e, t) gets its own generator seeded from the config seed,
    so draws do not depend on visitation order or worker assignment.
    """

    def __init__(self, train: KBSnapshot, num_entities: int, num_types: int, cfg: NegativeConfig):
        self.train = train
        self.num_entities = num_entities
        self.num_types = num_types
        self.cfg = cfg

    def rng(self, e: int, t: int, epoch: int = 0) -> np.random.Generator:
        epoch = epoch if self.cfg.resample else 0
        return np.random.default_rng([self.cfg.seed & _SEED_MASK, epoch, int(e), int(t)])

    def draw(self, e: int, t: int, epoch: int = 0) -> NegativeDraw:
        rng = self.rng(e, t, epoch)
        entities = _draw_entities(e, t, self.train, self.cfg.m, rng, self.num_entities) if self.cfg.m else []
        types = _draw_types(e, t, self.train, self.cfg.n, rng, self.num_types) if self.cfg.n else []
        return NegativeDraw(tuple(entities), tuple(types))

    def freeze(self, positives: Sequence[Tuple[int, int]]) -> List[NegativeDraw]:
        """One fixed draw per positive, for batch solvers and objective evaluation"""
        return [self.draw(e, t, 0) for e, t in positives]
