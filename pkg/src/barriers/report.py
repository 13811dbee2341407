"""Deterministic CSV/JSON report writers.

All reals print with 17 significant digits so rereading a report
reproduces the in-memory doubles exactly; JSON carries a schema version
field and sorted keys for byte-stable output.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = "v1"


def fmt17(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")
    return header, [line.split(",") for line in text[1:] if line]


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"schema": SCHEMA_VERSION, **payload}
    path.write_text(
        json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )


def flow_trace_rows(trace) -> list[list]:
    rows = []
    for k in range(len(trace.iterations)):
        rows.append(
            [
                int(trace.iterations[k]),
                float(trace.energy[k]),
                float(trace.max_tension[k]),
                float(trace.oscillation[k]),
                float(trace.step[k]),
            ]
        )
    return rows


FLOW_TRACE_HEADER = ["iter", "energy", "max_tension", "oscillation", "step"]
