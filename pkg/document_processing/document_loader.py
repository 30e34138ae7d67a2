# document_processing/document_loader.py
# =============================================================================
import logging
import re
from pathlib import Path
from typing import Iterable, List, Tuple

from utils.exceptions import InputError, ParseError
from utils.helpers import FileUtils

logger = logging.getLogger(__name__)

_ESCAPES = {"t": "\t", "n": "\n", "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(.)")


def unescape_text(text: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPES.get(m.group(1), m.group(0)), text)


def escape_text(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


class DocumentLoader:
    """Loads entity text corpora (KB descriptions, encyclopedia articles)"""

    def __init__(self, max_file_size_mb: float = 4096):
        self.max_file_size_mb = max_file_size_mb

    def validate_file(self, file_path) -> Path:
        """Validate file existence and size"""
        path = Path(file_path)
        if not path.is_file():
            raise FileNotFoundError(f"corpus file not found: {path}")
        size = path.stat().st_size
        if size > self.max_file_size_mb * 1024 * 1024:
            raise InputError(f"corpus {path.name} is too large: {FileUtils.format_file_size(size)}")
        return path

    def load_corpus(self, file_path) -> List[Tuple[str, str]]:
        """Read `entity<TAB>text` rows; one document per entity"""
        path = self.validate_file(file_path)
        documents = []
        seen = set()
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                symbol, sep, text = line.partition("\t")
                if not sep or not symbol:
                    raise ParseError("expected 'entity<TAB>text'", line_number, path.name)
                if symbol in seen:
                    raise InputError(f"{path.name}:{line_number}: duplicate document for entity '{symbol}'")
                seen.add(symbol)
                documents.append((symbol, unescape_text(text)))
        logger.info("Loaded %d documents from %s", len(documents), path.name)
        return documents

    @staticmethod
    def write_corpus(file_path, documents: Iterable[Tuple[str, str]]) -> None:
        with open(file_path, "w", encoding="utf-8", newline="\n") as f:
            for symbol, text in documents:
                f.write(f"{symbol}\t{escape_text(text)}\n")
