# knowledge_base/vocabulary.py
# =============================================================================
from typing import Dict, Iterable, List, NewType, Optional

from utils.exceptions import DomainError, VocabularyError

EntityId = NewType("EntityId", int)
TypeId = NewType("TypeId", int)


class Vocabulary:
    """Interns external symbols (MIDs, type paths) to dense ids from 0"""

    def __init__(self, kind: str = "symbol", symbols: Optional[Iterable[str]] = None):
        self.kind = kind
        self._ids: Dict[str, int] = {}
        self._symbols: List[str] = []
        for symbol in symbols or ():
            self.add(symbol)

    def __len__(self) -> int:
        return len(self._symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def __iter__(self):
        return iter(self._symbols)

    def add(self, symbol: str) -> int:
        """Return the id of symbol, creating it if unseen"""
        idx = self._ids.get(symbol)
        if idx is None:
            idx = len(self._symbols)
            self._ids[symbol] = idx
            self._symbols.append(symbol)
        return idx

    def lookup(self, symbol: str, extend: bool = False) -> int:
        if extend:
            return self.add(symbol)
        try:
            return self._ids[symbol]
        except KeyError:
            raise VocabularyError(f"unknown {self.kind} '{symbol}'") from None

    def get(self, symbol: str) -> Optional[int]:
        return self._ids.get(symbol)

    def symbol(self, idx: int) -> str:
        self.check(idx)
        return self._symbols[idx]

    def check(self, idx: int) -> None:
        if not 0 <= idx < len(self._symbols):
            raise DomainError(f"{self.kind} id {idx} out of range [0, {len(self._symbols)})")

    @property
    def symbols(self) -> List[str]:
        return list(self._symbols)


class EntityVocab(Vocabulary):
    def __init__(self, symbols=None):
        super().__init__("entity", symbols)


class TypeVocab(Vocabulary):
    def __init__(self, symbols=None):
        super().__init__("type", symbols)
