"""Exact arithmetic and linear algebra over prime fields F_q.

Elements are plain integers in ``0..q-1``. Matrices are held as ``int64``
numpy arrays; with ``q <= 2**16 + 1`` a single product fits in 33 bits, so
row operations reduce after every multiply-add and dot products over a few
hundred columns stay far below the int64 limit.

Gaussian elimination always pivots on the first nonzero entry in column
order, which makes reduced forms reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

MAX_MODULUS = 2**16 + 1


class FieldError(ValueError):
    """Invalid field, dimension mismatch or inconsistent linear system."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field of integers modulo a prime ``q``."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise FieldError(f"modulus must be an integer, got {self.q!r}")
        if not 2 <= self.q <= MAX_MODULUS:
            raise FieldError(f"modulus {self.q} out of range [2, {MAX_MODULUS}]")
        if not is_prime(int(self.q)):
            raise FieldError(f"modulus {self.q} is not prime")
        object.__setattr__(self, "q", int(self.q))

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return pow(a, self.q - 2, self.q)

    def elements(self) -> range:
        return range(self.q)

    def asarray(self, values) -> np.ndarray:
        """Reduce an integer array-like into canonical residues."""
        return np.mod(np.asarray(values, dtype=np.int64), self.q)


def field_ops(q: int) -> PrimeField:
    return PrimeField(q)


class FieldMatrix:
    """A read-only ``rows x cols`` matrix over a prime field."""

    __slots__ = ("field", "data")

    def __init__(self, field: PrimeField, data):
        arr = np.array(data, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            raise FieldError(f"expected a 2-D array, got shape {arr.shape}")
        arr %= field.q
        arr.setflags(write=False)
        self.field = field
        self.data = arr

    @classmethod
    def from_rows(cls, field: PrimeField, rows: Sequence[Sequence[int]], cols: int | None = None):
        rows = [list(r) for r in rows]
        if not rows:
            return cls.zeros(field, 0, cols or 0)
        return cls(field, rows)

    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int):
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: PrimeField, n: int):
        return cls(field, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def column(self, i: int) -> np.ndarray:
        return self.data[:, i].copy()

    def select_columns(self, idx: Iterable[int]) -> FieldMatrix:
        idx = list(idx)
        return FieldMatrix(self.field, self.data[:, idx].reshape(self.rows, len(idx)))

    def append_rows(self, rows) -> FieldMatrix:
        extra = np.asarray(rows, dtype=np.int64).reshape(-1, self.cols)
        return FieldMatrix(self.field, np.vstack([self.data, extra]))

    def hstack(self, other) -> FieldMatrix:
        other = np.asarray(getattr(other, "data", other), dtype=np.int64)
        if other.ndim == 1:
            other = other.reshape(-1, 1)
        if other.shape[0] != self.rows:
            raise FieldError(f"height mismatch: {self.rows} vs {other.shape[0]}")
        return FieldMatrix(self.field, np.hstack([self.data, other]))

    @property
    def T(self) -> FieldMatrix:
        return FieldMatrix(self.field, self.data.T)

    def matvec(self, v) -> np.ndarray:
        v = self.field.asarray(v)
        if v.shape != (self.cols,):
            raise FieldError(f"vector length {v.shape} does not match {self.cols} columns")
        return (self.data @ v) % self.field.q

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"FieldMatrix(q={self.field.q}, {self.tolist()})"


def _rref_array(a: np.ndarray, q: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` (copied), pivoting only in the first ``ncols`` columns."""
    r = np.array(a, dtype=np.int64, copy=True) % q
    nrows, total = r.shape
    ncols = total if ncols is None else ncols
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nz = np.flatnonzero(r[row:, col])
        if nz.size == 0:
            continue
        p = row + int(nz[0])
        if p != row:
            r[[row, p]] = r[[p, row]]
        r[row] = (r[row] * pow(int(r[row, col]), q - 2, q)) % q
        factors = r[:, col].copy()
        factors[row] = 0
        r = (r - np.outer(factors, r[row])) % q
        pivots.append(col)
        row += 1
    return r, pivots


def rref(m: FieldMatrix) -> tuple[FieldMatrix, list[int]]:
    """Reduced row echelon form and pivot column list."""
    r, piv = _rref_array(m.data, m.field.q)
    return FieldMatrix(m.field, r), piv


def rank(m: FieldMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    # eliminate along the shorter side
    a = m.data if m.rows >= m.cols else m.data.T
    return len(_rref_array(a, m.field.q)[1])


def in_span(v, m: FieldMatrix) -> bool:
    """True iff ``v`` is a linear combination of the columns of ``m``."""
    v = m.field.asarray(v)
    if v.shape != (m.rows,):
        raise FieldError(f"vector length {v.shape} does not match matrix height {m.rows}")
    if not v.any():
        return True
    if m.cols == 0:
        return False
    return rank(m.hstack(v)) == rank(m)


def unique_coordinate_solve(a: FieldMatrix, c, i: int) -> int | None:
    """Solve ``a @ b = c`` for the single coordinate ``b[i]``.

    Returns the value when every nullspace vector of ``a`` vanishes at
    ``i`` and ``None`` when ``b[i]`` is not determined by the system.
    Raises :class:`FieldError` if the system is inconsistent.
    """
    c = a.field.asarray(c)
    if c.shape != (a.rows,):
        raise FieldError(f"observation length {c.shape} does not match {a.rows} rows")
    if not 0 <= i < a.cols:
        raise FieldError(f"coordinate {i} out of range for {a.cols} columns")
    aug = np.hstack([a.data, c.reshape(-1, 1)])
    r, piv = _rref_array(aug, a.field.q, ncols=a.cols)
    nrank = len(piv)
    if r[nrank:, -1].any():
        raise FieldError("inconsistent linear system")
    if i not in piv:
        return None
    row = piv.index(i)
    free = [j for j in range(a.cols) if j not in piv]
    if free and r[row, free].any():
        return None
    return int(r[row, -1])


def vandermonde(points: Sequence[int], k_in: int, field: PrimeField) -> FieldMatrix:
    """``k_in x len(points)`` matrix whose column for x is (1, x, ..., x^(k_in-1))."""
    rows = [[pow(int(x), e, field.q) for x in points] for e in range(k_in)]
    return FieldMatrix(field, np.array(rows, dtype=np.int64).reshape(k_in, len(points)))


def mds_generator(n_out: int, k_in: int, field: PrimeField) -> FieldMatrix:
    """Generator matrix in which any ``k_in`` of the ``n_out`` columns are invertible.

    Column ``x`` evaluates the monomials ``1, x, ..., x^(k_in-1)`` at the
    distinct points ``x = 0..n_out-1``, so every square column submatrix is
    a nonsingular Vandermonde matrix.
    """
    if k_in < 1 or n_out < k_in:
        raise FieldError(f"need 1 <= k_in <= n_out, got k_in={k_in}, n_out={n_out}")
    if field.q <= n_out:
        raise FieldError(f"field too small for MDS: q={field.q} <= n_out={n_out}")
    return vandermonde(range(n_out), k_in, field)


def has_mds_property(g: FieldMatrix) -> bool:
    """Exhaustively check that every maximal square column submatrix is nonsingular."""
    k = g.rows
    return all(rank(g.select_columns(cols)) == k for cols in combinations(range(g.cols), k))


def solve_square(a: FieldMatrix, c) -> np.ndarray:
    """Unique solution of a nonsingular square system."""
    if a.rows != a.cols:
        raise FieldError("solve_square needs a square matrix")
    c = a.field.asarray(c)
    aug = np.hstack([a.data, c.reshape(-1, 1)])
    r, piv = _rref_array(aug, a.field.q, ncols=a.cols)
    if len(piv) != a.cols:
        raise FieldError("singular system")
    return r[:, -1].copy()


class IncrementalDecoder:
    """Receiver-side Gaussian elimination over ``n`` unknowns.

    Equations arrive one at a time; the decoder keeps them in reduced row
    echelon form together with their right-hand sides so that, once the
    rank reaches ``n``, the right-hand sides are the decoded unknowns.
    """

    def __init__(self, field: PrimeField, n: int):
        self.field = field
        self.n = n
        self._rows = np.zeros((n, n + 1), dtype=np.int64)
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def complete(self) -> bool:
        return self.rank == self.n

    def add(self, coeffs, value: int) -> bool:
        """Feed one equation ``coeffs . x = value``; return True if it was innovative."""
        q = self.field.q
        if self.complete:
            return False
        v = np.empty(self.n + 1, dtype=np.int64)
        v[: self.n] = coeffs
        v[self.n] = value
        v %= q
        r = self.rank
        if r:
            basis = self._rows[:r]
            v = (v - (v[self._pivots] @ basis)) % q
        nz = np.flatnonzero(v[: self.n])
        if nz.size == 0:
            return False
        col = int(nz[0])
        v = (v * pow(int(v[col]), q - 2, q)) % q
        if r:
            basis = self._rows[:r]
            self._rows[:r] = (basis - np.outer(basis[:, col], v)) % q
        self._rows[r] = v
        self._pivots.append(col)
        return True

    def solution(self) -> np.ndarray:
        if not self.complete:
            raise FieldError(f"rank {self.rank} < {self.n}: not decodable yet")
        out = np.empty(self.n, dtype=np.int64)
        out[self._pivots] = self._rows[: self.n, self.n]
        return out
