from __future__ import annotations

import io
import logging
import math
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.framework.errors import ErrorCode, InputError
from src.schemas.report_schema import RunManifest

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SORT_KEYS = ("epsilon", "n", "t")


def parse_eps_grid(text: str) -> List[float]:
    """
    ``A`` or ``A:B:STEP`` (inclusive of B when it falls on the grid).

    Points are generated as A + k*STEP from decimal arithmetic so long grids do not drift.
    """
    parts = text.split(":")
    try:
        values = [Decimal(part.strip()) for part in parts]
    except InvalidOperation:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"cannot parse epsilon grid {text!r}.")

    if len(values) == 1:
        grid = [float(values[0])]
    elif len(values) == 3:
        start, stop, step = values
        if step <= 0:
            raise InputError(ErrorCode.INVALID_ARGUMENT, f"grid step must be positive in {text!r}.")
        if stop < start:
            raise InputError(ErrorCode.INVALID_ARGUMENT, f"grid stop is below start in {text!r}.")
        count = int((stop - start) / step) + 1
        grid = [float(start + k * step) for k in range(count)]
    else:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"epsilon grid must be A or A:B:STEP, got {text!r}.")

    for eps in grid:
        if not (0.0 <= eps <= 1.0) or math.isnan(eps):
            raise InputError(ErrorCode.EPSILON_OUT_OF_RANGE, f"epsilon {eps} is outside [0, 1].")
    return grid


def parse_int_list(text: str, label: str) -> List[int]:
    try:
        values = [int(part) for part in text.replace(" ", "").split(",") if part]
    except ValueError:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"{label} must be a comma-separated list of integers.")
    if not values:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"{label} is empty.")
    return values


def build_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    """Rows as a DataFrame in ``columns`` order, sorted by (epsilon, n, t) where present."""
    frame = pd.DataFrame(list(rows), columns=list(columns))
    keys = [key for key in SORT_KEYS if key in frame.columns]
    if keys and not frame.empty:
        frame = frame.sort_values(keys, kind="mergesort").reset_index(drop=True)
    return frame


def render_csv(frame: pd.DataFrame, manifest: Optional[RunManifest] = None) -> str:
    buffer = io.StringIO()
    if manifest is not None:
        for line in manifest.header_lines():
            buffer.write(line + "\n")
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def write_csv(frame: pd.DataFrame, manifest: Optional[RunManifest], out: Optional[str]) -> None:
    """Write to ``out`` or stdout; log lines never share the stream."""
    text = render_csv(frame, manifest)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
        logger.info("[csv] Wrote %d rows to %s", len(frame), path)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def read_csv(path: str) -> pd.DataFrame:
    """Read a table written by ``write_csv``, skipping the manifest lines."""
    return pd.read_csv(path, comment="#")


__all__ = ["parse_eps_grid", "parse_int_list", "build_table", "render_csv", "write_csv", "read_csv"]
