"""File formats: counts, models, graphs (JSON) and experiment tables (CSV).

All JSON outputs carry a `schema_version` field.  Bitstrings are written
qubit-0-leftmost; outcome indices put qubit k at bit k.  CSV numbers use 17
significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .collective import CollectiveCounts
from .error_model import CalibrationResult, DetectorModel
from .graphs import GraphSpec
from .reconstruct import CountsRecord, Distribution
from .util import bits_to_index, fmt17, index_to_bits

SCHEMA_VERSION = 1

FIG1_COLUMNS = (
    "state",
    "k",
    "support",
    "raw",
    "raw_sigma",
    "raw_sigma_boot",
    "corrected",
    "corrected_sigma",
    "corrected_sigma_boot",
)

FIG2_COLUMNS = (
    "state",
    "p_n",
    "w_raw",
    "w_raw_sigma",
    "w_raw_sigma_boot",
    "w_corrected",
    "w_corrected_sigma",
    "w_corrected_sigma_boot",
    "w_raw_exact",
    "w_corrected_exact",
)


def _load_json(path: str | Path) -> dict | list:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _dump_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_counts(path: str | Path) -> CountsRecord:
    """Counts file: {"n": int, "setting": "XZ..", "counts": {"<bits>": int, ...}}."""
    data = _load_json(path)
    if not isinstance(data, dict) or "counts" not in data:
        raise ValueError(f"{path}: not a counts file (missing 'counts')")
    n = int(data["n"])
    setting = str(data.get("setting", "Z" * n))
    counts = {}
    for bits, shots in data["counts"].items():
        if len(bits) != n:
            raise ValueError(f"{path}: bitstring {bits!r} is not length {n}")
        counts[bits_to_index(bits)] = int(shots)
    return CountsRecord(n=n, counts=counts, setting=setting)


def write_counts(path: str | Path, record: CountsRecord) -> None:
    _dump_json(
        path,
        {
            "schema_version": SCHEMA_VERSION,
            "n": record.n,
            "setting": record.setting,
            "counts": {
                index_to_bits(i, record.n): int(c) for i, c in sorted(record.counts.items())
            },
        },
    )


def read_calibration_record(path: str | Path) -> tuple[int, CountsRecord]:
    """Counts file with an extra "known": "<bits>" field naming the prepared state."""
    data = _load_json(path)
    if not isinstance(data, dict) or "known" not in data:
        raise ValueError(f"{path}: calibration file needs a 'known' bitstring field")
    record = read_counts(path)
    return bits_to_index(str(data["known"])), record


def read_collective_counts(path: str | Path) -> CollectiveCounts:
    """Collective counts file: a bare JSON array of n+1 integers."""
    data = _load_json(path)
    if not isinstance(data, list):
        raise ValueError(f"{path}: collective counts must be a JSON array of integers")
    return CollectiveCounts(tuple(int(c) for c in data))


def read_model(path: str | Path) -> DetectorModel:
    """Model file: {"p0": [...], "p1": [...]} with one rate per qubit."""
    data = _load_json(path)
    if not isinstance(data, dict) or "p0" not in data or "p1" not in data:
        raise ValueError(f"{path}: model file needs 'p0' and 'p1' arrays")
    p0, p1 = data["p0"], data["p1"]
    if len(p0) != len(p1):
        raise ValueError(f"{path}: p0 and p1 have different lengths")
    return DetectorModel(tuple(zip(map(float, p0), map(float, p1))))


def write_model(path: str | Path, model: DetectorModel, calibration: CalibrationResult | None = None) -> None:
    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "n": model.n,
        "p0": [p for p, _ in model.per_qubit],
        "p1": [p for _, p in model.per_qubit],
    }
    if calibration is not None:
        payload["p0_stderr"] = list(calibration.p0_stderr)
        payload["p1_stderr"] = list(calibration.p1_stderr)
        payload["shots_at_zero"] = list(calibration.shots_at_zero)
        payload["shots_at_one"] = list(calibration.shots_at_one)
    _dump_json(path, payload)


def write_distribution(
    path: str | Path,
    dist: Distribution,
    kind: str = "individual",
    condition_number: float | None = None,
) -> None:
    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "values": [float(v) for v in dist.values],
        "sigmas": [float(s) for s in dist.sigmas],
        "shots": dist.shots,
        "clamped": list(dist.clamped),
        "projected": dist.projected,
    }
    if condition_number is not None:
        payload["condition_number"] = condition_number
    _dump_json(path, payload)


def read_graph(path: str | Path) -> GraphSpec:
    """Graph file: {"n": int, "edges": [[a, b], ...], "coloring": [int, ...]}."""
    data = _load_json(path)
    if not isinstance(data, dict) or "edges" not in data:
        raise ValueError(f"{path}: graph file needs 'n', 'edges', 'coloring'")
    return GraphSpec(
        n=int(data["n"]),
        edges=frozenset((int(a), int(b)) for a, b in data["edges"]),
        coloring=tuple(int(c) for c in data["coloring"]),
    )


def write_graph(path: str | Path, graph: GraphSpec) -> None:
    _dump_json(
        path,
        {
            "schema_version": SCHEMA_VERSION,
            "n": graph.n,
            "edges": sorted([a, b] for a, b in graph.edges),
            "coloring": list(graph.coloring),
        },
    )


def _format_cell(value) -> str:
    if isinstance(value, float):
        return fmt17(value)
    return str(value)


def write_table_csv(path: str | Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_figure1_csv(path: str | Path, rows: Sequence[dict]) -> None:
    write_table_csv(path, FIG1_COLUMNS, rows)


def write_figure2_csv(path: str | Path, rows: Sequence[dict]) -> None:
    write_table_csv(path, FIG2_COLUMNS, rows)


__all__ = [
    "SCHEMA_VERSION",
    "FIG1_COLUMNS",
    "FIG2_COLUMNS",
    "read_counts",
    "write_counts",
    "read_calibration_record",
    "read_collective_counts",
    "read_model",
    "write_model",
    "write_distribution",
    "read_graph",
    "write_graph",
    "write_table_csv",
    "write_figure1_csv",
    "write_figure2_csv",
]
