"""Mission event log: typed, timestamped records feeding every KPI."""

from __future__ import annotations

import json
from typing import Iterable, Iterator

SCHEMA_VERSION = 1


class EventLog:
    """Append-only mission event log with stable JSONL serialization."""

    def __init__(self):
        self._events: list[dict] = []

    def emit(self, t: float, kind: str, **fields) -> dict:
        event = {"t": t, "kind": kind, **fields}
        self._events.append(event)
        return event

    def __iter__(self) -> Iterator[dict]:
        return iter(self._events)

    def __len__(self) -> int:
        return len(self._events)

    @property
    def events(self) -> list[dict]:
        return list(self._events)

    def to_jsonl(self) -> str:
        header = json.dumps({"schema": SCHEMA_VERSION}, sort_keys=True)
        lines = [header]
        lines += [json.dumps(e, sort_keys=True) for e in self._events]
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @staticmethod
    def load(path) -> list[dict]:
        with open(path) as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        if rows and "schema" in rows[0] and "kind" not in rows[0]:
            rows = rows[1:]
        return rows

    @staticmethod
    def parse(lines: Iterable[str]) -> list[dict]:
        rows = [json.loads(line) for line in lines if line.strip()]
        if rows and "schema" in rows[0] and "kind" not in rows[0]:
            rows = rows[1:]
        return rows
