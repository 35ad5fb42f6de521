"""
Writers for the machine-readable outputs: CSV tables with an optional
metadata preamble, and JSON documents built from pydantic models.
"""
import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import click
from pydantic import BaseModel

from core import log


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def to_csv(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Optional[Mapping[str, Any]] = None,
) -> str:
    """
    Render a table as CSV text.

    Metadata entries become leading `# key=value` lines; the header row is always
    written. Floats use their shortest round-trip form ('.' separator, no grouping).
    """
    buffer = io.StringIO()
    for key, value in (metadata or {}).items():
        buffer.write(f"# {key}={_cell(value)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def read_csv(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse text produced by `to_csv` back into (metadata, rows)."""
    metadata: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            metadata[key] = value
        else:
            body.append(line)
    return metadata, list(csv.DictReader(body))


def jsonable(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json", by_alias=True)
    if isinstance(payload, Mapping):
        return {str(k): jsonable(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [jsonable(v) for v in payload]
    if isinstance(payload, complex):
        return [payload.real, payload.imag]
    if hasattr(payload, "tolist"):
        # numpy arrays and scalars
        return jsonable(payload.tolist())
    return payload


def to_json(payload: Any) -> str:
    return json.dumps(jsonable(payload), indent=2, allow_nan=False)


def emit(text: str, out: Optional[str | Path] = None) -> None:
    """Write to the given path, or to stdout when no path is given."""
    if out is None:
        click.echo(text.rstrip("\n"))
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    log.success(f"Wrote {path}")
