"""Append-only exchange cache for replayable LLM runs."""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional


@dataclass(frozen=True)
class Exchange:
    fingerprint: str
    prompts: tuple[str, str]
    responses: tuple[str, str]
    tasks: tuple[str, ...]
    timestamp: str = ""

    @classmethod
    def from_json(cls, data: dict) -> Exchange:
        return cls(
            fingerprint=data["fingerprint"],
            prompts=tuple(data["prompts"]),
            responses=tuple(data["responses"]),
            tasks=tuple(data.get("tasks", ())),
            timestamp=data.get("timestamp", ""),
        )


class ExchangeCache:
    """Fingerprint-keyed store of prompt/response exchanges.

    Records are line-delimited JSON.  The first record for a fingerprint
    wins, so replay is stable even if a file holds duplicates.  Writes are
    serialized with a lock.
    """

    def __init__(self, path: Optional[str | Path] = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, Exchange] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    ex = Exchange.from_json(json.loads(line))
                    self._entries.setdefault(ex.fingerprint, ex)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, fingerprint: str) -> bool:
        return fingerprint in self._entries

    def __iter__(self) -> Iterator[Exchange]:
        return iter(list(self._entries.values()))

    def get(self, fingerprint: str) -> Optional[Exchange]:
        return self._entries.get(fingerprint)

    def put(self, exchange: Exchange) -> None:
        if not exchange.timestamp:
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            exchange = Exchange(**{**asdict(exchange), "timestamp": stamp})
        with self._lock:
            if exchange.fingerprint in self._entries:
                return
            self._entries[exchange.fingerprint] = exchange
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a") as fh:
                    fh.write(json.dumps(asdict(exchange), sort_keys=True) + "\n")
