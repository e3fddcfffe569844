import logging

import numpy as np
import pytest

from services import db, settings


@pytest.fixture(autouse=True)
def isolated_run(tmp_path, monkeypatch):
    """Ledger and relative output dirs live under tmp_path; CLI logging stays quiet."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr(db, "DB_PATH", str(tmp_path / "data" / "runs.db"))
    monkeypatch.setattr(settings, "LEDGER_ENABLED", False)

    # a handler already present makes fracwave._setup_logging a no-op
    root = logging.getLogger("fracwave")
    quiet = logging.NullHandler()
    root.addHandler(quiet)
    yield
    root.removeHandler(quiet)


@pytest.fixture
def hermitian4():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = 0.5 * (a + a.conj().T)
    return H / np.max(np.abs(np.linalg.eigvalsh(H)))


@pytest.fixture
def write_config(tmp_path):
    def write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text.strip() + "\n", encoding="utf-8")
        return path

    return write
