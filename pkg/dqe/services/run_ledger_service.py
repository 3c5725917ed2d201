#!/usr/bin/env python3

"""
Run Ledger Service - Local SQLite record of every pipeline invocation
"""

import json
import math
import os
import sqlite3
import threading
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, Iterator, List, Optional

from .db_migrations import DatabaseMigrations
from .exceptions import OutputError
from .logger import Logger
from .models.run_models import RunRecord, RunStatus

log = Logger('ledger')


LEDGER_FILENAME = 'runs.db'


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RunLedgerService:
    """
    Runs and their scalar metrics in `<out_dir>/runs.db`.

    One instance may be shared between threads; every operation opens its
    own connection under a reentrant lock.
    """

    def __init__(self, out_dir: str):
        self._db_lock = threading.RLock()
        self._db_path = os.path.join(out_dir, LEDGER_FILENAME)
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as e:
            raise OutputError(f"Cannot create output directory {out_dir}: {e}") from e
        with self._db_lock:
            if not DatabaseMigrations.migrate_ledger_db(self._db_path):
                raise OutputError(f"Cannot initialise run ledger {self._db_path}")
        log.log_debug(f"Run ledger at {self._db_path}")

    @property
    def db_path(self) -> str:
        return self._db_path

    def _get_connection(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self._db_path, check_same_thread=False)
        conn.execute('PRAGMA foreign_keys = ON')
        return conn

    def start_run(self, command: str, config: Dict[str, Any], seed: int) -> RunRecord:
        """Insert a run in RUNNING state"""
        record = RunRecord(command=command, config=config, seed=seed, started_at=_now())
        with self._db_lock:
            conn = self._get_connection()
            try:
                cursor = conn.execute('''
                    INSERT INTO runs (command, config_json, seed, status, started_at)
                    VALUES (?, ?, ?, ?, ?)
                ''', (command, json.dumps(config, sort_keys=True), seed, record.status.value,
                      record.started_at.isoformat()))
                conn.commit()
                record.id = cursor.lastrowid
            except sqlite3.Error as e:
                conn.rollback()
                raise OutputError(f"Failed to record {command} run: {e}") from e
            finally:
                conn.close()
        log.log_debug(f"Started run {record.id} ({command})")
        return record

    def record_metrics(self, run_id: int, metrics: Dict[str, Optional[float]]):
        """Store scalar metrics; None and non-finite values are stored as NULL"""
        rows = []
        for name, value in metrics.items():
            number = None if value is None else float(value)
            if number is not None and not math.isfinite(number):
                number = None
            rows.append((run_id, name, number))
        with self._db_lock:
            conn = self._get_connection()
            try:
                conn.executemany('INSERT OR REPLACE INTO run_metrics (run_id, name, value) VALUES (?, ?, ?)', rows)
                conn.commit()
            except sqlite3.Error as e:
                conn.rollback()
                raise OutputError(f"Failed to record metrics for run {run_id}: {e}") from e
            finally:
                conn.close()

    def finish_run(self, run_id: int, status: RunStatus, message: Optional[str] = None):
        with self._db_lock:
            conn = self._get_connection()
            try:
                conn.execute('UPDATE runs SET status = ?, finished_at = ?, message = ? WHERE id = ?',
                             (status.value, _now().isoformat(), message, run_id))
                conn.commit()
            except sqlite3.Error as e:
                conn.rollback()
                raise OutputError(f"Failed to finish run {run_id}: {e}") from e
            finally:
                conn.close()
        log.log_debug(f"Run {run_id} {status.value}")

    def get_run(self, run_id: int) -> Optional[RunRecord]:
        runs = self._query('WHERE id = ?', (run_id,))
        return runs[0] if runs else None

    def list_runs(self, command: Optional[str] = None) -> List[RunRecord]:
        """All runs, oldest first, optionally filtered by command"""
        if command is None:
            return self._query('', ())
        return self._query('WHERE command = ?', (command,))

    def _query(self, where: str, params: tuple) -> List[RunRecord]:
        with self._db_lock:
            conn = self._get_connection()
            try:
                rows = conn.execute(f'''
                    SELECT id, command, config_json, seed, status, started_at, finished_at, message
                    FROM runs {where} ORDER BY id
                ''', params).fetchall()
                records = []
                for row in rows:
                    metrics = {
                        name: value for name, value in
                        conn.execute('SELECT name, value FROM run_metrics WHERE run_id = ? ORDER BY name', (row[0],))
                    }
                    records.append(RunRecord(
                        id=row[0],
                        command=row[1],
                        config=json.loads(row[2]),
                        seed=row[3],
                        status=RunStatus(row[4]),
                        started_at=datetime.fromisoformat(row[5]),
                        finished_at=datetime.fromisoformat(row[6]) if row[6] else None,
                        message=row[7],
                        metrics=metrics,
                    ))
                return records
            except sqlite3.Error as e:
                raise OutputError(f"Failed to read run ledger {self._db_path}: {e}") from e
            finally:
                conn.close()

    @contextmanager
    def track(self, command: str, config: Dict[str, Any], seed: int) -> Iterator[RunRecord]:
        """
        Record a run around a block: SUCCEEDED when the block returns, FAILED
        (with the error message) when it raises. Metrics put into the yielded
        record's `metrics` are stored either way.
        """
        record = self.start_run(command, config, seed)
        try:
            yield record
        except Exception as e:
            self._close(record, RunStatus.FAILED, str(e))
            raise
        self._close(record, RunStatus.SUCCEEDED, None)

    def _close(self, record: RunRecord, status: RunStatus, message: Optional[str]):
        if record.metrics:
            self.record_metrics(record.id, record.metrics)
        self.finish_run(record.id, status, message)
        record.status = status
        record.message = message
