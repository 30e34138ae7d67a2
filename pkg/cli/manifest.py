# cli/manifest.py
# =============================================================================
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable

from config.settings import Config
from utils.exceptions import ParseError
from utils.helpers import FileUtils, SystemUtils


@dataclass
class RunManifest:
    """Provenance record written next to every artifact a command produces"""

    command: str
    flags: Dict[str, object]
    seed: int
    input_digests: Dict[str, str] = field(default_factory=dict)
    output_digests: Dict[str, str] = field(default_factory=dict)
    tool_version: str = Config.TOOL_VERSION
    duration_seconds: float = 0.0
    system: Dict[str, float] = field(default_factory=dict)

    @staticmethod
    def digest_files(paths: Iterable) -> Dict[str, str]:
        return {str(p): FileUtils.sha256_file(p) for p in paths if p is not None and Path(p).is_file()}

    def record_system(self) -> None:
        self.system = SystemUtils.check_system_resources()

    def write(self, path) -> Path:
        path = FileUtils.ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            with open(path, "r", encoding="utf-8") as f:
                payload = json.load(f)
            return cls(**payload)
        except (json.JSONDecodeError, TypeError) as e:
            raise ParseError(f"invalid manifest: {e}", None, Path(path).name) from None


def manifest_path(output) -> Path:
    output = Path(output)
    if output.is_dir():
        return output / "manifest.json"
    return output.with_name(output.name + ".manifest.json")
