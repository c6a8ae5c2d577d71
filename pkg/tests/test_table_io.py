"""Table CSV round trip and rejection of malformed files."""

import csv

import numpy as np
import pytest

from beaconsim.channel import PdrTable
from beaconsim.table_io import TABLE_HEADER, export_pdr_table, import_pdr_table


@pytest.fixture()
def small_table():
    distances = np.array([10.0, 20.0])
    powers = np.array([0.0, 5.0, 10.0])
    cbrs = np.array([0.1, 0.2])
    values = np.zeros((2, 3, 2))
    for j, base in enumerate((0.5, 0.7, 0.9)):
        values[0, j, 0] = base
        values[0, j, 1] = base - 0.05
        values[1, j, 0] = base - 0.1
        values[1, j, 1] = base - 0.15
    return PdrTable(distances=distances, powers=powers, cbr_levels=cbrs,
                    values=values)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_round_trip_is_exact(models, tmp_path):
    path = tmp_path / "table.csv"
    export_pdr_table(models.table, path)
    back = import_pdr_table(path)
    assert np.array_equal(back.distances, models.table.distances)
    assert np.array_equal(back.powers, models.table.powers)
    assert np.array_equal(back.cbr_levels, models.table.cbr_levels)
    assert np.array_equal(back.values, models.table.values)


def test_row_order_does_not_matter(small_table, tmp_path):
    path = tmp_path / "table.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    shuffled = [rows[0]] + rows[:0:-1]
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(shuffled)
    back = import_pdr_table(path)
    assert np.array_equal(back.values, small_table.values)


def test_import_rejects_other_headers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c,d\n1,2,3,0.5\n")
    with pytest.raises(ValueError, match="header"):
        import_pdr_table(path)


def test_import_rejects_short_rows_with_position(small_table, tmp_path):
    path = tmp_path / "bad.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    rows[3] = rows[3][:2]
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(ValueError, match="row 4"):
        import_pdr_table(path)


def test_import_rejects_non_numeric_cells(small_table, tmp_path):
    path = tmp_path / "bad.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    rows[5][3] = "high"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(ValueError, match="row 6"):
        import_pdr_table(path)


def test_import_rejects_duplicate_nodes(small_table, tmp_path):
    path = tmp_path / "bad.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    rows[2] = rows[1]  # same node twice, another now missing
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(ValueError, match="row 3: duplicate.*row 2"):
        import_pdr_table(path)


def test_import_rejects_missing_nodes(small_table, tmp_path):
    path = tmp_path / "bad.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    del rows[4]
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(ValueError, match="incomplete grid"):
        import_pdr_table(path)


def test_import_rejects_probabilities_outside_unit_interval(small_table, tmp_path):
    path = tmp_path / "bad.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    rows[2][3] = "1.5"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(ValueError, match=r"row 3.*outside"):
        import_pdr_table(path)


def test_import_rejects_broken_trends_naming_the_row(small_table, tmp_path):
    path = tmp_path / "bad.csv"
    export_pdr_table(small_table, path)
    rows = _rows(path)
    # make the far distance deliver better than the near one at the same
    # power and load: distance trend break at the far node's row
    far_row = next(n for n, r in enumerate(rows[1:], start=2)
                   if (float(r[0]), float(r[1]), float(r[2])) == (20.0, 0.0, 0.1))
    rows[far_row - 1][3] = "0.95"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(ValueError, match=f"distance at row {far_row}"):
        import_pdr_table(path)


def test_import_rejects_empty_files(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("distance_m,power_dbm,cbr,pdr\n")
    with pytest.raises(ValueError, match="no data rows"):
        import_pdr_table(path)
