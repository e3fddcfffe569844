# services/db.py
import json
import os
import sqlite3
import time
from contextlib import closing
from typing import Optional

from services import settings

# --- Ledger file (default ./data/fracwave.db) ---
DB_PATH = settings.RUNS_DB


def get_conn():
    folder = os.path.dirname(DB_PATH)
    if folder:
        os.makedirs(folder, exist_ok=True)
    conn = sqlite3.connect(DB_PATH, check_same_thread=False)
    conn.row_factory = sqlite3.Row
    conn.execute("PRAGMA journal_mode=WAL")
    return conn


# --- Schema ---
SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  subcommand TEXT NOT NULL,            -- beam/slab/sne/ftse/anderson/specfun-table
  config_sha256 TEXT NOT NULL,         -- hash of the serialized config
  seed INTEGER NOT NULL,
  status TEXT NOT NULL,                -- 'ok' or 'error'
  exit_code INTEGER NOT NULL,
  output_dir TEXT,
  headline_json TEXT,                  -- fitted exponents, growth rates, drifts
  error TEXT,
  runtime_s REAL,
  version TEXT,
  created_ts INTEGER NOT NULL
);

CREATE INDEX IF NOT EXISTS runs_by_subcommand ON runs(subcommand, id);
"""


def init():
    with closing(get_conn()) as c:
        c.executescript(SCHEMA)


# ---------------- Runs ----------------
def record_run(subcommand: str, config_sha256: str, seed: int, status: str, exit_code: int,
               output_dir: Optional[str] = None, headline: Optional[dict] = None,
               error: Optional[str] = None, runtime_s: Optional[float] = None,
               ts: Optional[int] = None) -> int:
    ts = ts or int(time.time())
    with closing(get_conn()) as conn, conn as c:
        cur = c.execute(
            "INSERT INTO runs(subcommand,config_sha256,seed,status,exit_code,output_dir,headline_json,"
            "error,runtime_s,version,created_ts) VALUES (?,?,?,?,?,?,?,?,?,?,?)",
            (subcommand, config_sha256, seed, status, exit_code, output_dir,
             json.dumps(headline or {}, sort_keys=True), error, runtime_s,
             settings.FRACWAVE_VERSION, ts),
        )
        new_id = cur.lastrowid
        if new_id is None:
            new_id = c.execute("SELECT last_insert_rowid()").fetchone()[0]
        return int(new_id)


def list_runs(limit: int = 25, subcommand: Optional[str] = None):
    with closing(get_conn()) as c:
        if subcommand:
            return c.execute(
                "SELECT * FROM runs WHERE subcommand=? ORDER BY id DESC LIMIT ?",
                (subcommand, limit),
            ).fetchall()
        return c.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,)).fetchall()


def get_run(run_id: int) -> Optional[dict]:
    with closing(get_conn()) as c:
        row = c.execute("SELECT * FROM runs WHERE id=?", (run_id,)).fetchone()
    if not row:
        return None
    out = dict(row)
    out["headline"] = json.loads(out.pop("headline_json") or "{}")
    return out
