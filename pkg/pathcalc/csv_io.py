"""CSV reader and writer for sampled paths and report tables.

Path files have the header ``t,value[,left,right]`` and may start with a
``# style: continuous|cadlag-step`` line. Floats are written with 17
significant digits so a written path reads back bit-identically.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any, List, Optional, TextIO, Union

import numpy as np
import pandas as pd

from pathcalc.config import CSV_FLOAT_FORMAT
from pathcalc.errors import InvalidArgument, MalformedCsv, PathcalcError
from pathcalc.paths import CADLAG_STEP, CONTINUOUS, STYLES, Decoration, Partition, SampledPath

logger = logging.getLogger(__name__)

STYLE_PREFIX = "# style:"
REQUIRED_COLUMNS = ("t", "value")
DECORATION_COLUMNS = ("left", "right")

Source = Union[str, Path, TextIO]


def _read_text(source: Source) -> str:
    if hasattr(source, "read"):
        return source.read()
    try:
        return Path(source).read_text()
    except OSError as e:
        raise MalformedCsv(f"cannot read {source}: {e.strerror}") from e


def parse_style(first_line: str) -> Optional[str]:
    """Extract the declared interpolation style from a leading comment line.

    Args:
        first_line: The first line of the file.

    Returns:
        The style, or None when the line is not a style declaration.

    Raises:
        MalformedCsv: If the declared style is unknown.
    """
    line = first_line.strip()
    if not line.startswith(STYLE_PREFIX):
        return None
    style = line[len(STYLE_PREFIX):].strip()
    if style not in STYLES:
        raise MalformedCsv(f"unknown style '{style}'", row=0, field="style")
    return style


def _check_finite(frame: pd.DataFrame, column: str, allow_missing: bool = False) -> None:
    values = frame[column]
    for i, v in enumerate(values):
        if allow_missing and pd.isna(v):
            continue
        if not np.isfinite(v):
            raise MalformedCsv(f"value {v} is not a finite number", row=i + 1, field=column)


def read_path_csv(source: Source, style: Optional[str] = None) -> SampledPath:
    """Read a sampled path, validating every field.

    Args:
        source: A file path or an open text stream.
        style: Overrides the style declared in the file.

    Returns:
        The path on the grid given by the ``t`` column.

    Raises:
        MalformedCsv: On a missing column, a non-numeric or non-finite field,
            unsorted times, or decorations that contradict the path.
    """
    text = _read_text(source)
    lines = text.splitlines()
    if not lines:
        raise MalformedCsv("empty file")
    declared = parse_style(lines[0])
    chosen = style or declared or CONTINUOUS
    if chosen not in STYLES:
        raise InvalidArgument(f"unknown style '{chosen}'")

    try:
        frame = pd.read_csv(io.StringIO(text), comment="#", float_precision="round_trip",
                            skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MalformedCsv(f"unparseable CSV: {e}") from e

    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    for col in REQUIRED_COLUMNS:
        if col not in columns:
            raise MalformedCsv("missing required column", row=0, field=col)
    has_left = "left" in columns
    has_right = "right" in columns
    if has_left != has_right:
        missing = "right" if has_left else "left"
        raise MalformedCsv("decoration columns come in pairs", row=0, field=missing)
    unknown = [c for c in columns if c not in REQUIRED_COLUMNS + DECORATION_COLUMNS]
    if unknown:
        raise MalformedCsv("unexpected column", row=0, field=unknown[0])
    if frame.empty:
        raise MalformedCsv("no data rows")

    for col in columns:
        converted = pd.to_numeric(frame[col], errors="coerce")
        bad = converted.isna() & frame[col].notna()
        if bad.any():
            i = int(np.flatnonzero(bad.to_numpy())[0])
            raise MalformedCsv(f"'{frame[col].iloc[i]}' is not a number", row=i + 1, field=col)
        frame[col] = converted.astype(float)

    for col in REQUIRED_COLUMNS:
        if frame[col].isna().any():
            i = int(np.flatnonzero(frame[col].isna().to_numpy())[0])
            raise MalformedCsv("missing value", row=i + 1, field=col)
        _check_finite(frame, col)

    t = frame["t"].to_numpy()
    steps = np.diff(t)
    if np.any(steps <= 0):
        i = int(np.flatnonzero(steps <= 0)[0]) + 2
        raise MalformedCsv("times must be strictly increasing", row=i, field="t")

    decorations: List[Decoration] = []
    if has_left:
        _check_finite(frame, "left", allow_missing=True)
        _check_finite(frame, "right", allow_missing=True)
        left = frame["left"].to_numpy()
        right = frame["right"].to_numpy()
        for i in range(len(frame)):
            if pd.isna(left[i]) and pd.isna(right[i]):
                continue
            if pd.isna(left[i]) or pd.isna(right[i]):
                field = "left" if pd.isna(left[i]) else "right"
                raise MalformedCsv("half a decoration", row=i + 1, field=field)
            decorations.append(Decoration(float(t[i]), float(left[i]), float(right[i])))
    if decorations and chosen == CONTINUOUS:
        detail = "a continuous path cannot carry decorations"
        if declared is None and style is None:
            detail = ("decoration columns need a cadlag-step path; add a "
                      "'# style: cadlag-step' first line or pass --style cadlag-step")
        raise MalformedCsv(detail, row=0, field="style")

    try:
        path = SampledPath(Partition(t), frame["value"].to_numpy(), chosen, tuple(decorations))
    except PathcalcError as e:
        raise MalformedCsv(str(e)) from e
    logger.debug(f"Read {len(frame)} rows ({chosen}, {len(decorations)} decorations)")
    return path


def path_frame(f: SampledPath) -> pd.DataFrame:
    """Columns t, value and, when f has decorations, left and right."""
    frame = pd.DataFrame({"t": f.grid.points, "value": f.values})
    if f.style == CADLAG_STEP and f.jumps:
        left = np.full(f.values.size, np.nan)
        right = np.full(f.values.size, np.nan)
        pts = f.grid.points
        for d in f.jumps:
            i = int(np.searchsorted(pts, d.time))
            left[i] = d.left
            right[i] = d.right
        frame["left"] = left
        frame["right"] = right
    return frame


def write_path_csv(target: Source, f: SampledPath) -> None:
    """Write a path with its style line and 17-significant-digit floats."""
    body = path_frame(f).to_csv(index=False, float_format=CSV_FLOAT_FORMAT, na_rep="",
                                lineterminator="\n")
    text = f"{STYLE_PREFIX} {f.style}\n{body}"
    _write_text(target, text)


def _write_text(target: Source, text: str) -> None:
    if hasattr(target, "write"):
        target.write(text)
        return
    try:
        Path(target).write_text(text)
    except OSError as e:
        raise InvalidArgument(f"cannot write {target}: {e.strerror}") from e


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not serializable: {type(value).__name__}")


def write_table(target: Source, frame: pd.DataFrame, fmt: str = "csv") -> None:
    """Emit a report table as CSV or as a JSON list of records."""
    if fmt == "csv":
        text = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    elif fmt == "json":
        text = json.dumps(frame.to_dict(orient="records"), default=_json_default) + "\n"
    else:
        raise InvalidArgument(f"unknown output format: {fmt}")
    _write_text(target, text)
