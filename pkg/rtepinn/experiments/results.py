#!/usr/bin/env python3
"""
Result records and their files.

Every file name starts with ``{experiment_id}_seed{seed}``. CSV files carry numbers
only (17 significant digits), so two runs with the same config and seed write
identical bytes; the wall clock and the timestamp live in the JSON summary.
"""

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..neural.checkpoint import save_network
from ..neural.mlp import MlpNetwork
from ..optim.history import TrainingHistory
from ..reference.fields import Field
from ..utils.errors import InvalidArgumentError
from ..utils.logger import get_logger

CSV = "csv"
JSON = "json"
NPZ = "npz"


@dataclass
class ResultRecord:
    experiment_id: str
    seed: int
    config: Dict[str, Any]
    history: Optional[TrainingHistory] = None
    fields: Dict[str, Field] = field(default_factory=dict)
    metrics: Dict[str, float] = field(default_factory=dict)
    tables: Dict[str, List[dict]] = field(default_factory=dict)
    wall_clock: float = 0.0
    status: str = "done"
    corrector: Optional[object] = None
    networks: Dict[str, MlpNetwork] = field(default_factory=dict)

    @property
    def prefix(self) -> str:
        return f"{self.experiment_id}_seed{self.seed}"

    def get_status(self) -> dict:
        return {
            'experiment_id': self.experiment_id,
            'seed': self.seed,
            'status': self.status,
            'wall_clock': self.wall_clock,
            'fields': sorted(self.fields),
            **self.metrics,
        }


def _number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _write_table(path: Path, rows: Sequence[dict]) -> Path:
    columns: List[str] = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row.get(k) is None else _number(row[k]) for k in columns])
    return path


def _json_safe(value):
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def emit_results(record: ResultRecord, out_dir=None,
                 formats: Sequence[str] = (CSV, JSON)) -> List[Path]:
    """Write the record under ``out_dir`` (created when missing); returns the paths."""
    unknown = set(formats) - {CSV, JSON, NPZ}
    if unknown:
        raise InvalidArgumentError(f"unknown output formats {sorted(unknown)}")
    out_dir = Path(out_dir if out_dir is not None else
                   Path(record.config.get('output', {}).get('root', "results"))
                   / record.experiment_id)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = out_dir / record.prefix
    written: List[Path] = []

    if CSV in formats:
        if record.history is not None and len(record.history):
            path = Path(f"{prefix}_history.csv")
            record.history.write_csv(path)
            written.append(path)
        for name, fld in record.fields.items():
            written.append(fld.to_csv(f"{prefix}_{name}.csv"))
        for name, rows in record.tables.items():
            written.append(_write_table(Path(f"{prefix}_{name}.csv"), rows))
        if record.metrics:
            written.append(_write_table(
                Path(f"{prefix}_metrics.csv"),
                [{'metric': k, 'value': v} for k, v in record.metrics.items()]))

    if NPZ in formats:
        for name, fld in record.fields.items():
            written.append(fld.to_npz(f"{prefix}_{name}.npz"))

    for name, net in record.networks.items():
        written.append(save_network(f"{prefix}_net_{name}.txt", net, seed=record.seed,
                                    metadata={'experiment': record.experiment_id}))
    if record.corrector is not None:
        written.append(record.corrector.save(f"{prefix}_corrector"))

    if JSON in formats:
        path = Path(f"{prefix}_summary.json")
        summary = {
            'experiment_id': record.experiment_id,
            'seed': record.seed,
            'status': record.status,
            'timestamp': datetime.now().isoformat(timespec="seconds"),
            'wall_clock': record.wall_clock,
            'metrics': record.metrics,
            'files': [p.name for p in written],
            'config': record.config,
        }
        with open(path, "w") as f:
            json.dump(_json_safe(summary), f, indent=2, sort_keys=True)
        written.append(path)

    get_logger().log_experiment_event("results written", record.experiment_id,
                                      f"{len(written)} files in {out_dir}")
    return written
