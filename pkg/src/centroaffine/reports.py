"""Result containers with deterministic serialization.

Reports serialize to byte-identical JSON for identical inputs and seeds:
keys are sorted, floats use shortest round-trip repr, and volatile fields
(wall time) are kept out of the payload and only shown on the console.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _sanitize(value):
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_sanitize(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


@dataclass
class Report:
    """Outcome of one experiment: echoed inputs, scalars, bounds and flags."""

    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    satisfied: bool | None = None
    flags: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def payload(self) -> dict[str, Any]:
        """JSON-ready dict; excludes wall time so output bytes are reproducible."""
        data = {
            "command": self.command,
            "inputs": _sanitize(self.inputs),
            "results": _sanitize(self.results),
            "bounds": _sanitize(self.bounds),
            "satisfied": self.satisfied,
            "flags": _sanitize(self.flags),
        }
        if self.residuals:
            data["residuals"] = _sanitize(self.residuals)
        return data

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.payload(), sort_keys=True, indent=2) + "\n").encode()

    @property
    def exit_code(self) -> int:
        return 0 if self.satisfied in (True, None) else 2


def sweep_csv_bytes(rows, header=("alpha", "value", "bound")) -> bytes:
    """CSV for parameter sweeps; floats printed with round-trip repr."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    return ("\n".join(lines) + "\n").encode()
