# evaluation/evaluator.py
# =============================================================================
"""Type-based (MAP) and global (GAP, G@k) ranking metrics.

Rankings are by descending score with ties broken by ascending entity id,
then ascending type id. Undefined values (no positives) are None.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import Config
from utils.exceptions import InputError, UsageError
from utils.helpers import round_sig

logger = logging.getLogger(__name__)

GAK_NORMS = ("window", "global")


@dataclass(frozen=True)
class Prediction:
    entity: int
    type: int
    score: float
    label: bool


@dataclass
class EvalReport:
    map: Optional[float]
    gap: Optional[float]
    g_at_k: Dict[int, float] = field(default_factory=dict)
    per_type_ap: Dict[int, float] = field(default_factory=dict)
    num_predictions: int = 0
    num_positives: int = 0
    num_types: int = 0
    num_types_evaluated: int = 0
    gak_norm: str = "window"

    def to_dict(self, type_symbols: Optional[Sequence[str]] = None,
                include_map: bool = True, include_gap: bool = True) -> dict:
        """MAP and its per-type APs are left out unless include_map; likewise gap"""
        name = (lambda t: type_symbols[t]) if type_symbols is not None else str
        payload = {
            "map": round_sig(self.map),
            "gap": round_sig(self.gap),
            "g_at_k": {str(k): round_sig(v) for k, v in sorted(self.g_at_k.items())},
            "per_type_ap": {name(t): round_sig(ap) for t, ap in sorted(self.per_type_ap.items())},
            "counts": {
                "predictions": self.num_predictions,
                "positives": self.num_positives,
                "types": self.num_types,
                "types_evaluated": self.num_types_evaluated,
            },
            "gak_norm": self.gak_norm,
        }
        if not include_map:
            del payload["map"], payload["per_type_ap"]
        if not include_gap:
            del payload["gap"]
        return payload


def _ap_from_labels(labels: np.ndarray, num_positives: Optional[int] = None) -> Optional[float]:
    """Mean of precision@i over positive ranks; divides by num_positives when given"""
    labels = np.asarray(labels, dtype=bool)
    positives = int(labels.sum()) if num_positives is None else num_positives
    if positives == 0:
        return None
    hits = np.flatnonzero(labels)
    precision = np.arange(1, len(hits) + 1) / (hits + 1.0)
    return float(precision.sum() / positives)


def average_precision(ranked_labels: Sequence[bool]) -> Optional[float]:
    return _ap_from_labels(np.asarray(ranked_labels, dtype=bool))


class PredictionTable:
    """Column view of a prediction list"""

    def __init__(self, preds: Sequence[Prediction]):
        self.entities = np.fromiter((p.entity for p in preds), dtype=np.int64, count=len(preds))
        self.types = np.fromiter((p.type for p in preds), dtype=np.int64, count=len(preds))
        self.scores = np.fromiter((p.score for p in preds), dtype=np.float64, count=len(preds))
        self.labels = np.fromiter((bool(p.label) for p in preds), dtype=bool, count=len(preds))
        if np.isnan(self.scores).any():
            bad = [(int(e), int(t)) for e, t in zip(self.entities[np.isnan(self.scores)],
                                                      self.types[np.isnan(self.scores)])][:5]
            raise InputError(f"NaN score for pairs {bad}")

    def __len__(self) -> int:
        return len(self.scores)

    def order(self, mask: Optional[np.ndarray] = None) -> np.ndarray:
        """Indices in ranking order: descending score, then entity id, then type id"""
        idx = np.arange(len(self.scores)) if mask is None else np.flatnonzero(mask)
        keys = np.lexsort((self.types[idx], self.entities[idx], -self.scores[idx]))
        return idx[keys]


def rank_predictions(preds: Sequence[Prediction]) -> List[Prediction]:
    table = PredictionTable(preds)
    return [preds[i] for i in table.order()]


def _per_type(table: PredictionTable, max_workers: int = 1) -> Dict[int, Optional[float]]:
    types = np.unique(table.types)

    def type_ap(t):
        return int(t), _ap_from_labels(table.labels[table.order(table.types == t)])

    if max_workers > 1 and len(types) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return dict(pool.map(type_ap, types))
    return dict(type_ap(t) for t in types)


def per_type_average_precision(preds: Sequence[Prediction], max_workers: int = 1) -> Dict[int, float]:
    """AP per type with at least one positive"""
    return {t: ap for t, ap in _per_type(PredictionTable(preds), max_workers).items() if ap is not None}


def mean_average_precision(preds: Sequence[Prediction], max_workers: int = 1) -> Optional[float]:
    """Unweighted mean of per-type AP over types with a positive"""
    aps = per_type_average_precision(preds, max_workers)
    if not aps:
        return None
    return float(np.mean(list(aps.values())))


def global_average_precision(preds: Sequence[Prediction]) -> Optional[float]:
    table = PredictionTable(preds)
    return _ap_from_labels(table.labels[table.order()])


def _gap_at_k(ranked: np.ndarray, k: int, norm: str) -> float:
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if norm not in GAK_NORMS:
        raise UsageError(f"unknown G@k normalisation '{norm}', expected one of {GAK_NORMS}")
    top = ranked[:k]
    if norm == "window":
        denominator = int(top.sum())
    else:
        denominator = min(k, int(ranked.sum()))
    ap = _ap_from_labels(top, denominator)
    return 0.0 if ap is None else ap


def gap_at_k(preds: Sequence[Prediction], k: int, norm: str = Config.GAK_NORM) -> float:
    """GAP over the top k pooled predictions; 0.0 when the window has no positive"""
    table = PredictionTable(preds)
    return _gap_at_k(table.labels[table.order()], k, norm)


def parse_metrics(spec: str):
    """'map,gap,g@1000' -> (wants_map, wants_gap, [1000])"""
    wants_map = wants_gap = False
    ks = []
    for item in (s.strip().lower() for s in spec.split(",") if s.strip()):
        if item == "map":
            wants_map = True
        elif item == "gap":
            wants_gap = True
        elif item.startswith("g@"):
            try:
                ks.append(int(item[2:]))
            except ValueError:
                raise UsageError(f"bad metric '{item}'") from None
            if ks[-1] < 1:
                raise UsageError(f"bad metric '{item}': k must be >= 1")
        else:
            raise UsageError(f"unknown metric '{item}'")
    return wants_map, wants_gap, ks


def evaluate(preds: Sequence[Prediction], ks: Sequence[int] = (1000, 10000),
             norm: str = Config.GAK_NORM, max_workers: int = 1) -> EvalReport:
    table = PredictionTable(preds)
    per_type = _per_type(table, max_workers)
    defined = {t: ap for t, ap in per_type.items() if ap is not None}
    if len(defined) < len(per_type):
        logger.warning("%d of %d types have no positive and are excluded from MAP",
                       len(per_type) - len(defined), len(per_type))
    ranked = table.labels[table.order()]
    report = EvalReport(
        map=float(np.mean(list(defined.values()))) if defined else None,
        gap=_ap_from_labels(ranked),
        g_at_k={k: _gap_at_k(ranked, k, norm) for k in ks},
        per_type_ap=defined,
        num_predictions=len(table),
        num_positives=int(table.labels.sum()),
        num_types=len(per_type),
        num_types_evaluated=len(defined),
        gak_norm=norm,
    )
    logger.info("MAP %s, GAP %s over %d predictions", report.map, report.gap, len(table))
    return report
