# services/settings.py
from __future__ import annotations

import os

from dotenv import load_dotenv

# ── Load env FIRST ────────────────────────────────────────────────────────────
load_dotenv()

__all__ = [
    "LOG_DIR",
    "LOG_LEVEL",
    "FRACWAVE_VERSION",
    "RUNS_DB",
    "WORKERS",
    "TENSOR_BUDGET",
    "DENSE_MAX_N",
    "KERNEL_EPS",
    "SCENARIOS",
    "LEDGER_ENABLED",
    "env_flag",
    "split_list",
]


def env_flag(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


def split_list(raw: str) -> list[str]:
    """Comma or newline separated names, blanks dropped."""
    return [c.strip() for chunk in raw.split("\n") for c in chunk.split(",") if c.strip()]


LOG_DIR = os.getenv("FRACWAVE_LOG_DIR", os.path.join(os.getcwd(), "logs"))
LOG_LEVEL = os.getenv("FRACWAVE_LOG_LEVEL", "INFO").strip().upper()
FRACWAVE_VERSION = os.getenv("FRACWAVE_VERSION", "dev")
RUNS_DB = os.getenv("FRACWAVE_RUNS_DB", os.path.join("data", "fracwave.db"))
WORKERS = int(os.getenv("FRACWAVE_WORKERS", "2"))
TENSOR_BUDGET = int(os.getenv("FRACWAVE_TENSOR_BUDGET", str(2 ** 24)))
DENSE_MAX_N = int(os.getenv("FRACWAVE_DENSE_MAX_N", "512"))
KERNEL_EPS = float(os.getenv("FRACWAVE_KERNEL_EPS", "1e-6"))

# Optional: comma or newline separated list of scenario modules to load
SCENARIOS_RAW = os.getenv(
    "FRACWAVE_SCENARIOS",
    "scenarios.beam,scenarios.slab,scenarios.sne,scenarios.ftse,scenarios.anderson,scenarios.specfun_table",
)
SCENARIOS = split_list(SCENARIOS_RAW)

LEDGER_ENABLED = env_flag("FRACWAVE_LEDGER", "on")
