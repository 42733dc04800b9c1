"""
critnls/persistence.py
──────────────────────
File output for runs: JSON reports, field CSVs and trajectory tables.

All writes go through a temp file and an atomic rename, so a crashed run
never leaves a half-written artifact behind. Floats are written in shortest
round-trip form (``repr``) so two identical runs produce byte-identical
files; field samples use 17 significant digits.

Layout of one run directory:
    {out}/
        threshold.json | functionals.json | report.json | variational.json
        field.csv                 # r,re,im
        trajectory.csv            # see critnls.schemas.FILE_SCHEMAS
        verdict.json
        summary.json              # dichotomy only, plus one subdirectory per eps
"""

import csv
import io
import json
import logging
import math
import os
import shutil
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import FieldValidationError

logger = logging.getLogger(__name__)

FIELD_HEADER = ("r", "re", "im")


def _json_default(obj: Any) -> Any:
    """JSON serializer for numpy scalars/arrays and pydantic models."""
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "model_dump"):
        return obj.model_dump(by_alias=True)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serializable")


def atomic_write_text(target: Path, text: str) -> Path:
    """
    Write ``text`` to ``target`` via temp file + rename.

    Raises:
        OSError: If the directory cannot be created or written
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        try:
            os.replace(tmp, target)
        except OSError:
            shutil.move(str(tmp), str(target))
    except Exception:
        if tmp.exists():
            tmp.unlink()
        raise
    logger.debug("[Persist] Wrote %s (%d bytes)", target, len(text))
    return target


def dumps_json(payload: Any) -> str:
    """Deterministic JSON text (sorted keys, 2-space indent, trailing newline)."""
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def write_json(target, payload: Any) -> Path:
    return atomic_write_text(Path(target), dumps_json(payload))


def read_json(path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# ── Field CSV ─────────────────────────────────────────────────────────────────


def write_field_csv(target, field) -> Path:
    """One row per interior node: r, Re u, Im u with 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELD_HEADER)
    for r, u in zip(field.grid.r, field.values):
        writer.writerow(
            (format(float(r), ".17g"), format(u.real, ".17g"), format(u.imag, ".17g"))
        )
    return atomic_write_text(Path(target), buf.getvalue())


def read_field_csv(path, r_max: Optional[float] = None):
    """
    Load a field CSV back onto its grid.

    The grid is recovered from the node spacing unless ``r_max`` is given.

    Raises:
        FieldValidationError: If the header or the node layout is wrong
    """
    from .engine.grid import RadialField, RadialGrid

    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != FIELD_HEADER:
        raise FieldValidationError(f"{path}: header must be r,re,im")
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float)
    except ValueError as exc:
        raise FieldValidationError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 3:
        raise FieldValidationError(f"{path}: expected three columns per row")

    n = data.shape[0]
    if r_max is None:
        r_max = float(format(data[0, 0] * (n + 1), ".12g"))
    grid = RadialGrid(r_max=r_max, n=n)
    if not np.allclose(data[:, 0], grid.r, rtol=1e-12, atol=0.0):
        raise FieldValidationError(f"{path}: radii are not the nodes j*r_max/(n+1)")
    return RadialField(grid, data[:, 1] + 1j * data[:, 2])


# ── Trajectory table ──────────────────────────────────────────────────────────


def _cell(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def write_table_csv(target, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return atomic_write_text(Path(target), buf.getvalue())


def read_table_csv(path) -> Tuple[List[str], List[List[Optional[float]]]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise FieldValidationError(f"{path}: empty table") from None
        rows = [[float(x) if x != "" else None for x in row] for row in reader]
    return header, rows
