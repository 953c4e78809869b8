from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping

from thetastrat import __version__
from thetastrat.config import SCHEMA_VERSION, RunConfig, canonical_payload, config_fingerprint

STRATA_CSV_COLUMNS = ("d", "lambda", "muSquared", "muSquaredFloat", "coneId", "label")


def build_report(
    command: str,
    config: RunConfig | None,
    result: Mapping[str, Any],
    *,
    oracle: Mapping[str, Any] | None = None,
    timing: Mapping[str, float] | None = None,
) -> dict[str, Any]:
    report: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "configHash": None if config is None else config_fingerprint(config),
        "config": None if config is None else canonical_payload(config),
        "result": dict(result),
    }
    if oracle is not None:
        report["oracle"] = dict(oracle)
    if timing is not None:
        report["timing"] = dict(timing)
    return report


def dumps(report: Mapping[str, Any]) -> str:
    return json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path | str, text: str) -> None:
    """Write ``text`` next to ``path`` and move it into place once it is on disk."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    descriptor, temporary_name = tempfile.mkstemp(
        prefix=f".{path.name}.",
        suffix=".tmp",
        dir=str(path.parent),
        text=True,
    )
    try:
        with os.fdopen(descriptor, "w", encoding="utf-8", newline="\n") as stream:
            stream.write(text)
            stream.flush()
            os.fsync(stream.fileno())
        os.replace(temporary_name, path)
    finally:
        if os.path.exists(temporary_name):
            os.unlink(temporary_name)


def write_report(path: Path | str, report: Mapping[str, Any]) -> None:
    write_atomic(path, dumps(report))


def strata_csv(rows: Iterable[Mapping[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=STRATA_CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({
            **row,
            "d": " ".join(row.get("d", [])),
            "lambda": " ".join(row.get("lambda", [])),
        })
    return buffer.getvalue()


__all__ = [
    "STRATA_CSV_COLUMNS",
    "build_report",
    "dumps",
    "strata_csv",
    "write_atomic",
    "write_report",
]
