import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from config import Config


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays to plain Python; non-finite floats to strings"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, complex):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    if isinstance(value, Path):
        return str(value)
    return value


def document(command: str, run_config: Dict, results: Dict) -> Dict:
    """Versioned output document with the resolved configuration echoed"""
    return {
        "schema": Config.SCHEMA_VERSION,
        "command": command,
        "config": to_jsonable(run_config),
        "results": to_jsonable(results),
    }


def render_json(payload: Dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _flatten(prefix: str, value: Any, rows: List[Dict]):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for index, item in enumerate(value):
            _flatten(f"{prefix}[{index}]", item, rows)
    else:
        if isinstance(value, list):
            value = ";".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        rows.append({"key": prefix, "value": value})


def render_csv(rows: List[Dict], fieldnames: Optional[List[str]] = None) -> str:
    fieldnames = fieldnames or (list(rows[0].keys()) if rows else [])
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in
                         ((k, row.get(k, "")) for k in fieldnames)})
    return buffer.getvalue()


def render_document(payload: Dict, output_format: str) -> str:
    if output_format == "csv":
        rows: List[Dict] = []
        _flatten("", to_jsonable(payload), rows)
        return render_csv(rows, ["key", "value"])
    return render_json(payload)


def atomic_write(path, text: str) -> Path:
    """Write through a temporary sibling and rename over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)
    return path


def emit(text: str, out=None) -> Optional[Path]:
    """Write to `out` atomically, or to stdout when no path is given"""
    if out:
        return atomic_write(out, text)
    sys.stdout.write(text)
    return None
