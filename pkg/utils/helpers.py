# utils/helpers.py
# =============================================================================
import hashlib
import math
from pathlib import Path

import psutil

from config.settings import Config


class SystemUtils:
    """Utility functions for system monitoring"""

    @staticmethod
    def check_system_resources():
        """Check available system resources (recorded in run manifests)"""
        memory = psutil.virtual_memory()
        process = psutil.Process()

        return {
            'cpu_count': psutil.cpu_count(logical=True),
            'memory_total_gb': memory.total / (1024**3),
            'memory_available_gb': memory.available / (1024**3),
            'process_rss_mb': process.memory_info().rss / (1024**2),
        }

    @staticmethod
    def resolve_threads(requested=None) -> int:
        """Cap worker count by --threads and the machine's CPUs"""
        requested = requested or Config.THREADS
        return max(1, min(int(requested), psutil.cpu_count(logical=True) or 1))


class FileUtils:
    """Utilities for artifact files"""

    @staticmethod
    def sha256_file(path) -> str:
        digest = hashlib.sha256()
        with open(path, "rb") as f:
            for block in iter(lambda: f.read(1 << 20), b""):
                digest.update(block)
        return digest.hexdigest()

    @staticmethod
    def ensure_parent(path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def format_file_size(size_bytes: int) -> str:
        """Format file size in human readable format"""
        for unit in ['B', 'KB', 'MB', 'GB']:
            if size_bytes < 1024:
                return f"{size_bytes:.1f} {unit}"
            size_bytes /= 1024
        return f"{size_bytes:.1f} TB"


def format_number(value) -> str:
    """Fixed 9-significant-digit rendering used by every output file"""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return format(float(value), Config.FLOAT_FORMAT)


def round_sig(value):
    """Round a float to 9 significant digits so JSON output is diffable"""
    if value is None:
        return None
    return float(format_number(value))
