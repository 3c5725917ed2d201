#!/usr/bin/env python3

import sqlite3
from typing import Callable, List, Tuple

from .logger import Logger

log = Logger('ledger.migrations')


class DatabaseMigrations:
    """Versioned schema upgrades for the run ledger database"""

    @staticmethod
    def get_schema_version(conn: sqlite3.Connection) -> int:
        """Current schema version, 0 for a fresh database"""
        cursor = conn.execute(
            "SELECT name FROM sqlite_master WHERE type='table' AND name='schema_version'"
        )
        if not cursor.fetchone():
            return 0
        row = conn.execute('SELECT version FROM schema_version ORDER BY id DESC LIMIT 1').fetchone()
        return row[0] if row else 0

    @staticmethod
    def set_schema_version(conn: sqlite3.Connection, version: int):
        conn.execute('''
            CREATE TABLE IF NOT EXISTS schema_version (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                version INTEGER NOT NULL,
                applied_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        ''')
        conn.execute('INSERT INTO schema_version (version) VALUES (?)', (version,))

    @staticmethod
    def migrations() -> List[Tuple[int, Callable[[sqlite3.Connection], None]]]:
        return [
            (1, DatabaseMigrations._migration_001_initial_schema),
        ]

    @staticmethod
    def migrate_ledger_db(db_path: str) -> bool:
        """Apply every pending migration, each in its own transaction"""
        try:
            conn = sqlite3.connect(db_path)
            try:
                current_version = DatabaseMigrations.get_schema_version(conn)
                for version, migration_func in DatabaseMigrations.migrations():
                    if current_version < version:
                        log.log_info(f"Applying ledger migration {version}")
                        with conn:
                            migration_func(conn)
                            DatabaseMigrations.set_schema_version(conn, version)
            finally:
                conn.close()
            return True
        except sqlite3.Error as e:
            log.log_error(f"Ledger migration failed for {db_path}: {e}")
            return False

    @staticmethod
    def _migration_001_initial_schema(conn: sqlite3.Connection):
        """Migration 001: runs, their scalar metrics, and lookups by command and start time"""
        conn.execute('''
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                config_json TEXT NOT NULL,
                seed INTEGER NOT NULL,
                status TEXT NOT NULL,
                started_at TIMESTAMP NOT NULL,
                finished_at TIMESTAMP,
                message TEXT
            )
        ''')
        conn.execute('''
            CREATE TABLE IF NOT EXISTS run_metrics (
                run_id INTEGER NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
                name TEXT NOT NULL,
                value REAL,
                PRIMARY KEY (run_id, name)
            )
        ''')
        conn.execute('CREATE INDEX IF NOT EXISTS idx_runs_command ON runs(command)')
        conn.execute('CREATE INDEX IF NOT EXISTS idx_runs_started_at ON runs(started_at)')
