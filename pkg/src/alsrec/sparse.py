"""Compressed sparse row storage for the interaction matrix.

The same rating triples are kept in two orientations: a by-user matrix
(rows are users, columns are items) drives user-side updates and masking,
and a by-item matrix (rows are items) drives item-side updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BY_USER = "by_user"
BY_ITEM = "by_item"


@dataclass(frozen=True)
class CsrMatrix:
    """One orientation of the rating matrix as three flat arrays.

    ``values[offsets[r]:offsets[r+1]]`` are row r's ratings and
    ``indices[offsets[r]:offsets[r+1]]`` the matching column ids, sorted
    ascending within each row.
    """

    orientation: str
    values: np.ndarray
    indices: np.ndarray
    offsets: np.ndarray
    rows: int
    cols: int

    @property
    def nnz(self) -> int:
        return int(self.offsets[-1])

    def row(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        """Column ids and values of row r."""
        lo, hi = self.offsets[r], self.offsets[r + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def row_counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def row_of_entry(self) -> np.ndarray:
        """Row id for every stored entry, aligned with values/indices."""
        return np.repeat(np.arange(self.rows, dtype=np.int64), self.row_counts())


def from_triples(rows, cols, vals, n_rows: int, n_cols: int,
                 orientation: str = BY_USER) -> CsrMatrix:
    """Build a CsrMatrix from (row, col, value) triples in any order."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
        raise ValueError("row id out of range")
    if cols.size and (cols.min() < 0 or cols.max() >= n_cols):
        raise ValueError("column id out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    counts = np.bincount(rows, minlength=n_rows)
    offsets = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return CsrMatrix(orientation, vals, cols, offsets, n_rows, n_cols)


def transpose(m: CsrMatrix) -> CsrMatrix:
    """Swap row/column roles, flipping the orientation tag."""
    flipped = BY_ITEM if m.orientation == BY_USER else BY_USER
    return from_triples(m.indices, m.row_of_entry(), m.values,
                        m.cols, m.rows, flipped)


def to_triples(m: CsrMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recover (row, col, value) triples in row-major stored order."""
    return m.row_of_entry(), m.indices.copy(), m.values.copy()
