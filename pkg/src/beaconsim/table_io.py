"""CSV export and import of delivery probability tables.

The on-disk layout is one row per grid node, `distance_m,power_dbm,cbr,pdr`,
distance-major.  Import rebuilds the table and rejects files whose rows do
not form a complete rectangular grid or whose values break the expected
monotonic trends, naming the offending rows.
"""

from __future__ import annotations

import csv

import numpy as np

from .channel import PdrTable, monotonicity_violations

TABLE_HEADER = ["distance_m", "power_dbm", "cbr", "pdr"]


def export_pdr_table(table: PdrTable, path) -> None:
    """Write every grid node; full float precision so import is exact."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_HEADER)
        for i, d in enumerate(table.distances):
            for j, p in enumerate(table.powers):
                for k, c in enumerate(table.cbr_levels):
                    writer.writerow([f"{d:.17g}", f"{p:.17g}", f"{c:.17g}",
                                     f"{table.values[i, j, k]:.17g}"])


def import_pdr_table(path) -> PdrTable:
    """Parse and validate a table file written by export_pdr_table.

    Raises ValueError with 1-based row numbers for malformed rows,
    duplicate or missing grid nodes, out-of-range probabilities and
    monotonicity violations.
    """
    rows: list[tuple[float, float, float, float]] = []
    row_numbers: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TABLE_HEADER:
            raise ValueError(f"unexpected table header: {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"row {lineno}: expected 4 fields, got {len(row)}")
            try:
                parsed = tuple(float(x) for x in row)
            except ValueError as exc:
                raise ValueError(f"row {lineno}: {exc}") from None
            rows.append(parsed)
            row_numbers.append(lineno)
    if not rows:
        raise ValueError("table file contains no data rows")

    data = np.array(rows)
    distances = np.unique(data[:, 0])
    powers = np.unique(data[:, 1])
    cbrs = np.unique(data[:, 2])
    expected = distances.size * powers.size * cbrs.size
    if len(rows) != expected:
        raise ValueError(
            f"incomplete grid: {len(rows)} rows but "
            f"{distances.size} x {powers.size} x {cbrs.size} = {expected} nodes")

    values = np.full((distances.size, powers.size, cbrs.size), np.nan)
    source_row = np.zeros(values.shape, dtype=int)
    i = np.searchsorted(distances, data[:, 0])
    j = np.searchsorted(powers, data[:, 1])
    k = np.searchsorted(cbrs, data[:, 2])
    for n in range(len(rows)):
        if not np.isnan(values[i[n], j[n], k[n]]):
            raise ValueError(
                f"row {row_numbers[n]}: duplicate node "
                f"({data[n, 0]:g}, {data[n, 1]:g}, {data[n, 2]:g}), "
                f"first seen at row {source_row[i[n], j[n], k[n]]}")
        values[i[n], j[n], k[n]] = data[n, 3]
        source_row[i[n], j[n], k[n]] = row_numbers[n]
    if np.isnan(values).any():
        raise ValueError("incomplete grid: some nodes missing")

    bad = (values < 0.0) | (values > 1.0)
    if bad.any():
        n = source_row[bad].min()
        raise ValueError(f"row {n}: pdr outside [0, 1]")

    violations = monotonicity_violations(distances, powers, cbrs, values)
    if violations:
        axis, (vi, vj, vk) = violations[0]
        raise ValueError(
            f"monotonicity violated along {axis} at row "
            f"{source_row[vi, vj, vk]} ({len(violations)} violation(s) total)")
    return PdrTable(distances=distances, powers=powers,
                    cbr_levels=cbrs, values=values)
