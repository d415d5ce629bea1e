"""Sample CSV exchange format.

One row per measurement with header ``theta_i,phi_i,theta_r,phi_r,value``;
angles in radians. Floats are written with ``repr`` (shortest round-trip
form) so files are lossless and byte-reproducible.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .geometry import HALF_PI, TWO_PI, Direction
from .measurement import MeasurementSet
from .sampling import MeasurementConfiguration

HEADER = ("theta_i", "phi_i", "theta_r", "phi_r", "value")


class SampleCsvError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def format_float(x) -> str:
    return repr(float(x))


def dumps_measurements(m: MeasurementSet) -> str:
    buf = io.StringIO()
    buf.write(",".join(HEADER) + "\n")
    for row, v in zip(m.pairs, m.values):
        buf.write(",".join(format_float(x) for x in (*row, v)) + "\n")
    return buf.getvalue()


def dumps_configuration(c: MeasurementConfiguration) -> str:
    """Configuration only (header without the value column)."""
    lines = [",".join(HEADER[:4])]
    lines += [",".join(format_float(x) for x in row) for row in c.pairs]
    return "\n".join(lines) + "\n"


def write_sample_csv(m: MeasurementSet, path, sidecar: bool = False) -> Path:
    """Write ``m`` to ``path``; with ``sidecar`` its provenance goes to ``<path>.json``."""
    path = Path(path)
    path.write_text(dumps_measurements(m), newline="")
    if sidecar:
        Path(str(path) + ".json").write_text(json.dumps(m.provenance, indent=2, sort_keys=True) + "\n")
    return path


def _parse_rows(lines, source):
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise SampleCsvError("empty file", 1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise SampleCsvError(f"expected header {','.join(HEADER)}, got {','.join(header)}", 1)
    seen = set()
    pairs, values = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(HEADER):
            raise SampleCsvError(f"expected {len(HEADER)} fields, got {len(row)}", lineno)
        try:
            ti, pi_, tr, pr, v = (float(c) for c in row)
        except ValueError:
            raise SampleCsvError(f"non-numeric field in {row}", lineno) from None
        if not all(math.isfinite(x) for x in (ti, pi_, tr, pr, v)):
            raise SampleCsvError("non-finite value", lineno)
        for name, t in (("theta_i", ti), ("theta_r", tr)):
            if not 0.0 <= t <= HALF_PI:
                raise SampleCsvError(f"{name}={t} outside [0, pi/2]", lineno)
        for name, p in (("phi_i", pi_), ("phi_r", pr)):
            if not 0.0 <= p < TWO_PI:
                raise SampleCsvError(f"{name}={p} outside [0, 2pi)", lineno)
        key = (Direction(ti, pi_), Direction(tr, pr))
        if key in seen:
            raise SampleCsvError("duplicate (incoming, reflection) pair", lineno)
        seen.add(key)
        pairs.append((key[0].theta, key[0].phi, key[1].theta, key[1].phi))
        values.append(v)
    if not pairs:
        raise SampleCsvError(f"{source} has no measurement rows")
    return np.array(pairs), np.array(values)


def loads_measurements(text: str, source="<string>") -> MeasurementSet:
    pairs, values = _parse_rows(io.StringIO(text), source)
    config = MeasurementConfiguration.from_pairs(pairs)
    # from_pairs groups by incoming direction; reorder values to match
    order = {tuple(r): k for k, r in enumerate(map(tuple, pairs))}
    values = values[[order[tuple(r)] for r in config.pairs]]
    return MeasurementSet(config, values, {"source": "ingested", "path": str(source)})


def ingest(path) -> MeasurementSet:
    """Read a sample CSV into a MeasurementSet grouped by incoming direction.

    A provenance sidecar ``<path>.json``, when present, is kept under
    ``provenance["original"]``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        text = fh.read()
    m = loads_measurements(text, path)
    side = Path(str(path) + ".json")
    if side.exists():
        m.provenance["original"] = json.loads(side.read_text())
    return m
