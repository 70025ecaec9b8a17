"""Append-only event log file: one canonical JSON record per line.

Appending is the single serialization point of the whole service: a lock
guards seq assignment and the write, every line is flushed and fsynced
before the caller gets its ack, and nothing ever mutates or deletes a
written line. Opening an existing file replays and validates it first,
so an acked record survives restart by construction.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Callable, Iterator

from .errors import CorruptLog, DecodeError
from .events import EventRecord, decode_line, encode_record


def read_log(path: str | Path) -> Iterator[EventRecord]:
    """Yield validated records from a log file.

    Stream validation: lines must decode, seq must run 1, 2, 3, ... with no
    gaps or regressions, and the final line must be newline-terminated
    (a missing terminator means a torn write).

    Raises:
        CorruptLog: with the 1-based number of the first bad line.
    """
    expected_seq = 1
    with open(path, "r", encoding="utf-8") as fh:
        line_number = 0
        for raw in fh:
            line_number += 1
            if not raw.endswith("\n"):
                raise CorruptLog(line_number, "truncated final line")
            try:
                record = decode_line(raw[:-1])
            except DecodeError as exc:
                raise CorruptLog(line_number, str(exc)) from None
            if record.seq != expected_seq:
                raise CorruptLog(
                    line_number,
                    f"seq {record.seq} where {expected_seq} was expected",
                )
            expected_seq += 1
            yield record


class EventLog:
    """Durable append-only store over a newline-delimited JSON file."""

    def __init__(self, path: str | Path, fsync: bool = True):
        self.path = Path(path)
        self._fsync = fsync
        self._lock = threading.Lock()
        self._head = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    @property
    def head_seq(self) -> int:
        return self._head

    def load(self, apply: Callable[[EventRecord], None]) -> int:
        """Replay the existing file through ``apply``; returns the head seq."""
        count = 0
        for record in read_log(self.path):
            apply(record)
            count += 1
        self._head = count
        return count

    def append(self, t_recv: int, type: str, payload: dict) -> EventRecord:
        """Atomically assign the next seq, persist the record, and return it.

        The record is on disk (flushed, fsynced) before this returns, which
        is what makes the ingestion ack a durability promise.
        """
        with self._lock:
            record = EventRecord(seq=self._head + 1, t_recv=t_recv,
                                 type=type, payload=payload)
            self._fh.write(encode_record(record) + "\n")
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
            self._head = record.seq
            return record

    def close(self) -> None:
        self._fh.close()
