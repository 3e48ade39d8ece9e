"""
Experiment Recorder - writes experiment artifacts (JSON reports, CSV tables)
Every file goes to a temporary sibling first and is renamed into place.
"""

import csv
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

from . import config

logger = logging.getLogger(__name__)


def output_dir(out: Optional[str] = None) -> Path:
    """Explicit path, else $SHADOWLAB_OUT_DIR, else the configured default"""
    path = Path(out or os.getenv('SHADOWLAB_OUT_DIR') or config.OUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def to_jsonable(value: Any) -> Any:
    """Complex numbers become [re, im]; numpy scalars and arrays become Python values"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _atomic_write(path: Path, write) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            write(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f"[Recorder] wrote {path}")
    return path


def write_json(path: Path, payload: Dict) -> Path:
    """Sorted keys and fixed indentation, so equal payloads give equal bytes"""
    def write(f):
        json.dump(to_jsonable(payload), f, sort_keys=True, indent=2)
        f.write('\n')
    return _atomic_write(path, write)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    def write(f):
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return _atomic_write(path, write)
