from __future__ import annotations

import pytest

from src.config.settings import get_settings
from src.tools.ensemble_tools import load_ensemble


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point the run log and gate stamp at a temporary directory."""
    monkeypatch.setenv("LDPC_RUN_LOG", str(tmp_path / "runs.jsonl"))
    monkeypatch.setenv("LDPC_GATE_STAMP", str(tmp_path / "gate.json"))
    monkeypatch.setenv("LDPC_WORKERS", "1")
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def regular_3_6():
    return load_ensemble("regular_3_6")


@pytest.fixture
def fig1():
    return load_ensemble("fig1")


@pytest.fixture
def toy():
    return load_ensemble("toy")


@pytest.fixture
def toy2():
    return load_ensemble("toy2")


@pytest.fixture
def cycle_code():
    return load_ensemble("cycle")


@pytest.fixture
def toy_exact():
    return load_ensemble("toy", exact=True)
