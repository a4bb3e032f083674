"""CSV ingestion for numeric data matrices."""

import csv
import io
from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    pass


@dataclass
class Matrix:
    values: np.ndarray
    header: list = None
    blank_lines: int = 0

    @property
    def shape(self):
        return self.values.shape


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_matrix(text):
    """Parse CSV text into a float matrix.

    Blank lines are skipped. A first row that is not entirely numeric is
    taken as a header. Cells use a decimal point; exponents are accepted.
    """
    rows, header, blank = [], None, 0
    for lineno, raw in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in raw]
        if not any(cells):
            blank += 1
            continue
        if header is None and not rows and not all(_is_number(c) for c in cells):
            header = cells
            continue
        values = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"line {lineno}, column {col}: non-numeric cell {cell!r}") from None
            if not np.isfinite(v):
                raise CsvFormatError(f"line {lineno}, column {col}: non-finite value {cell!r}")
            values.append(v)
        if rows and len(values) != len(rows[0]):
            raise CsvFormatError(
                f"line {lineno}: expected {len(rows[0])} columns, found {len(values)}")
        if header is not None and len(values) != len(header):
            raise CsvFormatError(
                f"line {lineno}: expected {len(header)} columns to match the header, "
                f"found {len(values)}")
        rows.append(values)
    if not rows:
        raise CsvFormatError("no data rows found")
    return Matrix(np.array(rows, dtype=float), header, blank)


def read_matrix(path):
    with open(path, newline="") as fh:
        return parse_matrix(fh.read())


def format_matrix(values, header=None):
    """CSV text that parses back to exactly ``values``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in np.asarray(values, dtype=float):
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
