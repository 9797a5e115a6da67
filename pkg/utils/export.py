"""CSV, JSON and text emission of run results."""
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Union
import csv
import json
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """numpy scalars to Python, non-finite floats to None."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def format_value(value: Any, deterministic: bool = False) -> str:
    """CSV cell text; floats use 17 significant digits in deterministic mode."""
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.16e}" if deterministic else repr(value)
    return str(value)


def canonical_json(payload: Dict[str, Any]) -> str:
    """Sorted-key compact JSON; parsing and re-emitting it yields the same text."""
    return json.dumps(_plain(payload), sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_csv(rows: Sequence[Dict[str, Any]], stream: TextIO, deterministic: bool = False,
              columns: Optional[Sequence[str]] = None) -> None:
    """Header row plus one line per row; columns default to first-seen key order."""
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(key), deterministic) for key in columns])


def write_json(payload: Dict[str, Any], stream: TextIO) -> None:
    stream.write(canonical_json(payload))
    stream.write("\n")


def write_text(summary: str, payload: Dict[str, Any], stream: TextIO) -> None:
    stream.write(summary + "\n")
    for key in sorted(payload):
        stream.write(f"  {key}: {format_value(payload[key])}\n")


def append_csv(path: Union[str, Path], row: Dict[str, Any], columns: Iterable[str],
               deterministic: bool = False) -> None:
    """Append one row, writing the header first when the file is new or empty."""
    path = Path(path)
    columns = list(columns)
    new_file = not path.exists() or path.stat().st_size == 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if new_file:
            writer.writerow(columns)
        writer.writerow([format_value(row.get(key), deterministic) for key in columns])
    logger.debug(f"Appended a row to {path}")


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
