"""JSONL report files with a header, record lines, and a summary line.

Serialization is canonical (sorted keys, fixed separators) so the same
inputs always produce byte-identical reports.
"""

from __future__ import annotations

import json
from pathlib import Path

REPORT_VERSION = 1


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _jsonable(value):
    """Coerce numpy scalars and arrays so json.dumps accepts the tree."""
    import numpy as np

    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_report(path, name: str, summary: dict, records=()) -> None:
    lines = [_canon({"version": REPORT_VERSION, "kind": "report", "name": name})]
    for record in records:
        lines.append(_canon({"kind": "record", **_jsonable(record)}))
    lines.append(_canon({"kind": "summary", **_jsonable(summary)}))
    Path(path).write_text("\n".join(lines) + "\n")


def read_report(path) -> dict:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"empty report: {path}")
    header = json.loads(lines[0])
    if header.get("kind") != "report":
        raise ValueError(f"not a report file: {path}")
    records = []
    summary = None
    for line in lines[1:]:
        row = json.loads(line)
        kind = row.pop("kind", None)
        if kind == "record":
            records.append(row)
        elif kind == "summary":
            summary = row
    if summary is None:
        raise ValueError(f"report has no summary line: {path}")
    return {"name": header.get("name"), "version": header.get("version"),
            "records": records, "summary": summary}


def format_summary(name: str, summary: dict) -> str:
    """Small human-readable block for terminal output."""
    out = [f"== {name} =="]
    for key in sorted(summary):
        value = summary[key]
        if isinstance(value, float):
            out.append(f"  {key}: {value:.6f}")
        else:
            out.append(f"  {key}: {value}")
    return "\n".join(out)
