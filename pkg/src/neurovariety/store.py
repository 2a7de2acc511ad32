"""Append-only JSONL result cache keyed by canonical job descriptors.

One line per completed job: {"key": ..., "kind": ..., "report": {...}}.
Re-running an identical job is a cache hit returning the stored report
byte-for-byte; nothing is ever rewritten in place, so diffs stay reviewable.
"""

from __future__ import annotations

import json
import os
from typing import Iterable

from .polycore import ScalarField


def field_key(field: ScalarField) -> str:
    if field.prime is not None:
        return f"fp:{field.prime}"
    return {"exact_rational": "exact", "complex_float": "float"}.get(
        field.kind, field.kind)


def job_key(kind: str, **parts) -> str:
    """Canonical cache key: kind plus sorted name=value parts.

    Architecture widths keep their order (different orders are different
    varieties); only formatting and the field descriptor are normalized.
    """
    rendered = []
    for name in sorted(parts):
        value = parts[name]
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, ScalarField):
            value = field_key(value)
        rendered.append(f"{name}={value}")
    return "|".join([kind] + rendered)


class ResultStore:
    """JSONL-backed cache; the last record for a key wins on load."""

    def __init__(self, path: str):
        self.path = path
        self._records: dict[str, dict] = {}
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    self._records[record["key"]] = record

    def get(self, key: str) -> dict | None:
        record = self._records.get(key)
        return None if record is None else record["report"]

    def put(self, key: str, kind: str, report: dict) -> None:
        record = {"key": key, "kind": kind, "report": report}
        self._records[key] = record
        directory = os.path.dirname(os.path.abspath(self.path))
        os.makedirs(directory, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def keys(self) -> Iterable[str]:
        return self._records.keys()

    def __len__(self) -> int:
        return len(self._records)
