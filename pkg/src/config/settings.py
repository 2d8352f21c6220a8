from __future__ import annotations

import datetime
import json
import os
import uuid
from functools import lru_cache
from typing import Any, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()

DEFAULT_RUN_LOG_FILE = "ldpc_runs.jsonl"
DEFAULT_GATE_STAMP = ".oracle_gate.json"
DEFAULT_CHUNK_SIZE = 512


class Settings(BaseModel):
    """Environment-derived defaults. CLI flags take precedence."""

    model_config = ConfigDict(frozen=True)

    log_level: str = "INFO"
    workers: int = Field(1, ge=0)
    run_log_file: Optional[str] = DEFAULT_RUN_LOG_FILE
    gate_stamp_path: str = DEFAULT_GATE_STAMP
    chunk_size: int = Field(DEFAULT_CHUNK_SIZE, ge=1)
    source_date_epoch: Optional[int] = None


def _get_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}.")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build ``Settings`` from the environment (``.env`` included)."""
    run_log = os.getenv("LDPC_RUN_LOG", DEFAULT_RUN_LOG_FILE)
    epoch = os.getenv("SOURCE_DATE_EPOCH")
    return Settings(
        log_level=os.getenv("LDPC_LOG_LEVEL", "INFO").upper(),
        workers=_get_int("LDPC_WORKERS", 1),
        run_log_file=run_log or None,
        gate_stamp_path=os.getenv("LDPC_GATE_STAMP", DEFAULT_GATE_STAMP),
        chunk_size=_get_int("LDPC_CHUNK_SIZE", DEFAULT_CHUNK_SIZE),
        source_date_epoch=int(epoch) if epoch else None,
    )


def run_timestamp() -> str:
    """ISO timestamp for manifests; pinned by ``SOURCE_DATE_EPOCH`` when set."""
    epoch = get_settings().source_date_epoch
    if epoch is not None:
        moment = datetime.datetime.fromtimestamp(epoch, tz=datetime.timezone.utc)
    else:
        moment = datetime.datetime.now(tz=datetime.timezone.utc)
    return moment.replace(microsecond=0).isoformat()


def new_run_id() -> str:
    return str(uuid.uuid4())


def log_run_event(event_type: str, data: Any, subcommand: str, run_id: str | None = None):
    """Append a run event (start, finish, error) to the JSONL run log."""
    log_file = get_settings().run_log_file
    if not log_file:
        return
    timestamp = datetime.datetime.now().isoformat()

    try:
        if hasattr(data, "model_dump"):
            content = data.model_dump(mode="json")
        elif isinstance(data, (dict, list, str, int, float)) or data is None:
            content = data
        else:
            content = str(data)

        entry = {
            "timestamp": timestamp,
            "run_id": run_id,
            "subcommand": subcommand,
            "type": event_type,
            "data": content,
        }

        with open(log_file, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, default=str) + "\n")

    except Exception as exc:
        try:
            with open(log_file, "a", encoding="utf-8") as f:
                f.write(json.dumps({
                    "timestamp": timestamp,
                    "run_id": run_id,
                    "subcommand": subcommand,
                    "type": "error",
                    "error": str(exc),
                    "raw_data_str": str(data),
                }) + "\n")
        except OSError:
            pass


__all__ = [
    "Settings",
    "get_settings",
    "run_timestamp",
    "new_run_id",
    "log_run_event",
]
