"""
Shared helpers: seed derivation, rounding, hashing, JSON output and logging setup.
"""
import hashlib
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Optional, Union

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def derive_seed(*parts: Any) -> int:
    """Derive a 64-bit seed from arbitrary parts (master seed, dataset, qi id, ...)."""
    digest = hashlib.blake2b(repr(parts).encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'big')


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero for positive values."""
    return int(math.floor(value + 0.5))


def file_sha256(path: Union[str, Path]) -> str:
    """Content hash of a file, used by the run manifest."""
    sha = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b''):
            sha.update(chunk)
    return sha.hexdigest()


def format_float(value: float) -> str:
    """Shortest round-trip text for a float."""
    return repr(float(value))


def write_json(path: Union[str, Path], payload: Any) -> Path:
    """Write JSON with sorted keys so reruns are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write('\n')
    return path


def read_json(path: Union[str, Path]) -> Any:
    with open(path, 'r', encoding='utf-8') as handle:
        return json.load(handle)


def setup_logging(log_dir: Optional[Union[str, Path]] = None, verbose: bool = False) -> logging.Logger:
    """Configure root logging with a console handler and, when log_dir is given, a log file."""
    handlers: list = [logging.StreamHandler(sys.stdout)]
    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_dir / 'autopriv.log', encoding='utf-8'))

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return logging.getLogger('autopriv')

