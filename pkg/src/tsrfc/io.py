"""Plain-text file formats.

series CSV        header ``label,v1,...,vT``; one series per row
densities CSV     header ``label,<f_1>,...,<f_G>``; one density per row
coefficients CSV  header ``label,c1,...,cB``; one curve per row
JSON sidecars     sampling frequency, lag-window and basis settings

A label column is optional on input: if the first header cell is not
``label`` every column is treated as data and labels default to 0.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
from pathlib import Path

import numpy as np

from .sim import TimeSeries


class FormatError(ValueError):
    pass


def _write_rows(path, header, labels, matrix):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for lab, row in zip(labels, matrix):
            w.writerow([int(lab)] + [repr(float(v)) for v in row])


def _read_rows(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise FormatError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    has_label = header[0].strip().lower() == "label"
    width = len(header)
    labels, data = [], []
    for k, r in enumerate(body, start=2):
        if len(r) != width:
            raise FormatError(f"{path}:{k}: expected {width} fields, got {len(r)}")
        try:
            vals = [float(v) for v in r]
        except ValueError as exc:
            raise FormatError(f"{path}:{k}: non-numeric field ({exc})") from None
        if has_label:
            labels.append(int(vals[0]))
            vals = vals[1:]
        else:
            labels.append(0)
        data.append(vals)
    if not data:
        raise FormatError(f"{path}: no data rows")
    matrix = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise FormatError(f"{path}: non-finite values")
    return (header[1:] if has_label else header), np.asarray(labels, dtype=int), matrix


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


# -- series


def write_series(path, series, labels):
    T = len(series[0])
    if any(len(s) != T for s in series):
        raise FormatError("series CSV needs equal-length series")
    header = ["label"] + [f"v{t}" for t in range(1, T + 1)]
    _write_rows(path, header, labels, [s.values for s in series])


def read_series(path, ws: float | None = None) -> tuple[list[TimeSeries], np.ndarray]:
    """Read a series CSV; ``ws`` defaults to the manifest value, else 1."""
    _, labels, matrix = _read_rows(path)
    if ws is None:
        man = sidecar(path)
        ws = float(read_json(man).get("ws", 1.0)) if man.exists() else 1.0
    return [TimeSeries(row, ws=ws) for row in matrix], labels


def write_manifest(path, payload: dict):
    """JSON manifest; the timestamp lives only here so data files stay byte-stable."""
    out = dict(payload)
    out["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    write_json(path, out)


# -- densities


def write_densities(path, freqs, values, labels, meta: dict):
    header = ["label"] + [repr(float(f)) for f in freqs]
    _write_rows(path, header, labels, values)
    write_json(sidecar(path), meta)


def read_densities(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
    header, labels, values = _read_rows(path)
    try:
        freqs = np.asarray([float(h) for h in header])
    except ValueError:
        raise FormatError(f"{path}: header must list the frequency grid") from None
    meta = read_json(sidecar(path)) if sidecar(path).exists() else {}
    return freqs, values, labels, meta


# -- coefficients


def write_coefficients(path, coeffs, labels, basis_meta: dict):
    header = ["label"] + [f"c{j}" for j in range(1, coeffs.shape[1] + 1)]
    _write_rows(path, header, labels, coeffs)
    write_json(sidecar(path), basis_meta)


def read_coefficients(path) -> tuple[np.ndarray, np.ndarray, dict]:
    _, labels, coeffs = _read_rows(path)
    if not sidecar(path).exists():
        raise FormatError(f"{path}: missing basis descriptor {sidecar(path)}")
    return coeffs, labels, read_json(sidecar(path))


# -- partitions


def write_partition_csv(path, labels):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["item", "label"])
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab)])


def read_partition(path) -> dict:
    """Partition from JSON (``labels`` key) or a CSV with a ``label`` column."""
    path = Path(path)
    if path.suffix == ".json":
        d = read_json(path)
        if "labels" not in d:
            raise FormatError(f"{path}: no 'labels' field")
        return d
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "label" not in reader.fieldnames:
            raise FormatError(f"{path}: CSV partition needs a 'label' column")
        return {"labels": [int(r["label"]) for r in reader]}
