import json
import math
import os
import tempfile
from dataclasses import asdict, is_dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from lib.errors import UsageError


def to_jsonable(value):
    """Convert reports to JSON-ready data; infinities become "inf" / "-inf"."""
    if hasattr(value, 'to_dict'):
        return to_jsonable(value.to_dict())
    if is_dataclass(value):
        return to_jsonable(asdict(value))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return value


def _atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_json(data, file_path) -> Path:
    """Write a report atomically (indent 2, UTF-8); timestamps go to a sibling .meta.json."""
    path = Path(file_path)
    _atomic_write(path, json.dumps(to_jsonable(data), ensure_ascii=False, indent=2) + '\n')
    meta = {'report': path.name, 'written_at': datetime.now(timezone.utc).isoformat()}
    _atomic_write(path.with_suffix('.meta.json'), json.dumps(meta, indent=2) + '\n')
    return path


def write_scale_csv(rows: Sequence[Tuple[int, float, float]], file_path) -> Path:
    """Per-scale trace as direction_index,t,value with LF endings and round-trip doubles."""
    path = Path(file_path)
    frame = pd.DataFrame(list(rows), columns=['direction_index', 't', 'value'])
    frame['direction_index'] = frame['direction_index'].astype(int)
    _atomic_write(path, frame.to_csv(index=False, lineterminator='\n', float_format='%.17g'))
    return path


def load_jsonl(file_path) -> List[Dict]:
    """Property records from a JSONL file; a missing file holds no records."""
    path = Path(file_path)
    if not path.exists():
        return []
    records = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise UsageError(f"{path.name}: line {lineno} is not valid JSON ({e.msg})")
    return records


def save_jsonl(data: List[Dict], file_path) -> Path:
    """Save records to a JSONL file, one property result per line."""
    lines = ''.join(json.dumps(to_jsonable(item), ensure_ascii=False) + '\n' for item in data)
    _atomic_write(Path(file_path), lines)
    return Path(file_path)
