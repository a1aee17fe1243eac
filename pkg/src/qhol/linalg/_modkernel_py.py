"""Pure numpy implementation of the incremental echelon kernel.

Semantics match the compiled ``_modkernel`` exactly; this module is used
when the extension is not built or when ``QHOL_FORCE_PYTHON=1`` is set.
"""

from __future__ import annotations

import numpy as np

_SPLIT = 1 << 16


class ModEchelon:
    """Incremental reduced row echelon form over Z/p, ``p < 2**31``."""

    def __init__(self, ncols: int, p: int):
        if p < 2 or p >= 1 << 31:
            raise ValueError("modulus must be a prime below 2**31")
        self.ncols = int(ncols)
        self.p = int(p)
        self._rows = np.zeros((0, self.ncols), dtype=np.int64)
        self._piv: list[int] = []
        self._split = None

    @property
    def rank(self) -> int:
        return len(self._piv)

    @property
    def pivots(self) -> list[int]:
        return sorted(self._piv)

    def _load(self, row) -> np.ndarray:
        arr = np.asarray(row, dtype=object) if not isinstance(row, np.ndarray) else row
        if arr.dtype == object:
            arr = np.array([int(v) % self.p for v in arr], dtype=np.int64)
        else:
            arr = np.mod(arr.astype(np.int64, copy=False), self.p)
        if arr.shape[0] != self.ncols:
            raise ValueError(f"row length {arr.shape[0]} != {self.ncols}")
        return arr

    def _reduce(self, w: np.ndarray) -> np.ndarray:
        if not self._piv:
            return w
        coefs = w[self._piv]
        if not coefs.any():
            return w
        if self._split is None:
            self._split = (self._rows % _SPLIT, self._rows // _SPLIT)
        lo, hi = self._split
        p = self.p
        # coefs < 2**31 and entries of lo, hi < 2**16, so each dot product
        # stays below 2**63 for up to 2**15 pivot rows
        acc_hi = (coefs @ hi) % p
        acc = (acc_hi * _SPLIT + coefs @ lo) % p
        return (w - acc) % p

    def reduce(self, row) -> list[int]:
        """Return ``row`` reduced against the echelon rows (pivots cleared)."""
        return [int(v) for v in self._reduce(self._load(row))]

    def add_row(self, row) -> bool:
        w = self._reduce(self._load(row))
        nz = np.flatnonzero(w)
        if nz.size == 0:
            return False
        c = int(nz[0])
        inv = pow(int(w[c]), self.p - 2, self.p)
        w = (w * inv) % self.p
        if self._piv:
            col = self._rows[:, c].copy()
            if col.any():
                self._rows = (self._rows - np.outer(col, w) % self.p) % self.p
        self._rows = np.vstack([self._rows, w[None, :]])
        self._piv.append(c)
        self._split = None
        return True

    def add_rows(self, rows) -> int:
        added = 0
        for row in rows:
            if self.rank >= self.ncols:
                break
            if self.add_row(row):
                added += 1
        return added

    def rows(self) -> list[list[int]]:
        """Reduced echelon rows sorted by pivot column."""
        order = sorted(range(len(self._piv)), key=self._piv.__getitem__)
        return [[int(v) for v in self._rows[i]] for i in order]

    def nullspace(self) -> list[list[int]]:
        pivset = set(self._piv)
        basis = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            v = [0] * self.ncols
            v[f] = 1
            for i, pc in enumerate(self._piv):
                v[pc] = (-int(self._rows[i, f])) % self.p
            basis.append(v)
        return basis
