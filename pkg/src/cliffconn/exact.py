"""Exact rational linear algebra.

:class:`RationalMatrix` is an immutable dense matrix of :class:`fractions.Fraction`.
Rank, nullspace and solving all go through :class:`RowReducer`, an
incremental Gauss-Jordan eliminator on sparse rows, so the large but very
sparse systems met when computing prolongations never have to be densified.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

SparseRow = dict[int, Fraction]


class ShapeError(ValueError):
    """Raised on incompatible matrix dimensions."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact arithmetic; pass a Fraction or int")
    return Fraction(x)


class RationalMatrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("rows", "cols", "_data", "_nz", "_hash")

    def __init__(self, data: Sequence[Sequence], *, rows: int | None = None, cols: int | None = None):
        data = tuple(tuple(_frac(x) for x in row) for row in data)
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ShapeError("ragged or mis-sized matrix data")
        self.rows = rows
        self.cols = cols
        self._data = data
        self._nz = None
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "RationalMatrix":
        cols = rows if cols is None else cols
        z = Fraction(0)
        return cls([[z] * cols for _ in range(rows)], rows=rows, cols=cols)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], rows=n, cols=n)

    @classmethod
    def from_flat(cls, rows: int, cols: int, entries: Sequence) -> "RationalMatrix":
        if len(entries) != rows * cols:
            raise ShapeError(f"expected {rows * cols} entries, got {len(entries)}")
        return cls([entries[i * cols : (i + 1) * cols] for i in range(rows)], rows=rows, cols=cols)

    @classmethod
    def column(cls, values: Iterable) -> "RationalMatrix":
        return cls([[v] for v in values])

    @classmethod
    def from_sparse(cls, rows: int, cols: int, entries: Mapping[tuple[int, int], Fraction]):
        data = [[0] * cols for _ in range(rows)]
        for (i, j), v in entries.items():
            data[i][j] = v
        return cls(data, rows=rows, cols=cols)

    # access ---------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._data)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(x for r in self._data for x in r)

    def nonzero_rows(self) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
        """Per row, the ``(column, value)`` pairs of nonzero entries."""
        if self._nz is None:
            self._nz = tuple(tuple((j, v) for j, v in enumerate(r) if v) for r in self._data)
        return self._nz

    def nnz(self) -> int:
        return sum(len(r) for r in self.nonzero_rows())

    # arithmetic ---------------------------------------------------------------
    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_same_shape(other)
        return RationalMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._data, other._data)],
            rows=self.rows,
            cols=self.cols,
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_same_shape(other)
        return RationalMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._data, other._data)],
            rows=self.rows,
            cols=self.cols,
        )

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix([[-a for a in r] for r in self._data], rows=self.rows, cols=self.cols)

    def scale(self, factor) -> "RationalMatrix":
        f = _frac(factor)
        return RationalMatrix([[f * a for a in r] for r in self._data], rows=self.rows, cols=self.cols)

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(list(zip(*self._data)) if self.rows else [], rows=self.cols, cols=self.rows)

    def _check_same_shape(self, other: "RationalMatrix") -> None:
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def is_zero(self) -> bool:
        return all(not r for r in self.nonzero_rows())

    def is_monomial(self) -> bool:
        """Exactly one nonzero entry, equal to +1 or -1, in each row and column."""
        if self.rows != self.cols:
            return False
        seen = set()
        for r in self.nonzero_rows():
            if len(r) != 1 or r[0][1] not in (1, -1):
                return False
            seen.add(r[0][0])
        return len(seen) == self.cols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._data))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"RationalMatrix({self.rows}x{self.cols}: [{body}])"

    # serialization ----------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[str(x.numerator), str(x.denominator)] for x in self.flat()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "RationalMatrix":
        rows, cols = int(obj["rows"]), int(obj["cols"])
        entries = [Fraction(int(num), int(den)) for num, den in obj["entries"]]
        return cls.from_flat(rows, cols, entries)


def mat_mul(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    b_nz = b.nonzero_rows()
    out = []
    for arow in a.nonzero_rows():
        acc: dict[int, Fraction] = {}
        for l, av in arow:
            for j, bv in b_nz[l]:
                acc[j] = acc.get(j, 0) + av * bv
        row = [Fraction(0)] * b.cols
        for j, v in acc.items():
            row[j] = v
        out.append(row)
    return RationalMatrix(out, rows=a.rows, cols=b.cols)


def kron(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    """Kronecker product; entry ``(i, j)`` of ``a`` scales the block ``(i, j)``."""
    rows, cols = a.rows * b.rows, a.cols * b.cols
    out = [[Fraction(0)] * cols for _ in range(rows)]
    b_nz = b.nonzero_rows()
    for i, arow in enumerate(a.nonzero_rows()):
        for j, av in arow:
            for p, brow in enumerate(b_nz):
                target = out[i * b.rows + p]
                for q, bv in brow:
                    target[j * b.cols + q] = av * bv
    return RationalMatrix(out, rows=rows, cols=cols)


def block_diag(blocks: Sequence[RationalMatrix]) -> RationalMatrix:
    rows = sum(m.rows for m in blocks)
    cols = sum(m.cols for m in blocks)
    out = [[Fraction(0)] * cols for _ in range(rows)]
    r0 = c0 = 0
    for m in blocks:
        for i, mrow in enumerate(m.nonzero_rows()):
            for j, v in mrow:
                out[r0 + i][c0 + j] = v
        r0 += m.rows
        c0 += m.cols
    return RationalMatrix(out, rows=rows, cols=cols)


class RowReducer:
    """Incremental Gauss-Jordan elimination over Q on sparse rows.

    Rows are kept in reduced row echelon form at all times: every stored
    row has leading coefficient 1 at its pivot column, and no other stored
    row has a nonzero entry in that column.  The pivot of a new row is its
    first nonzero column after reduction.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, SparseRow] = {}
        # column -> pivot columns whose rows hold a nonzero there (own pivot excluded)
        self._occ: dict[int, set[int]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, Fraction]) -> SparseRow:
        r = {c: _frac(v) for c, v in row.items() if v}
        for c in [c for c in r if c in self.pivots]:
            coef = r[c]
            for j, v in self.pivots[c].items():
                nv = r.get(j, 0) - coef * v
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
        return r

    def add(self, row: Mapping[int, Fraction]) -> bool:
        """Insert ``row``; return True iff it was independent of earlier rows."""
        r = self.reduce(row)
        if not r:
            return False
        if max(r) >= self.ncols or min(r) < 0:
            raise ShapeError("row has a column index outside the system")
        p = min(r)
        lead = r[p]
        if lead != 1:
            r = {j: v / lead for j, v in r.items()}
        for q in sorted(self._occ.pop(p, ())):
            prow = self.pivots[q]
            coef = prow.pop(p)
            for j, v in r.items():
                if j == p:
                    continue
                nv = prow.get(j, 0) - coef * v
                if nv:
                    if j not in prow:
                        self._occ.setdefault(j, set()).add(q)
                    prow[j] = nv
                elif j in prow:
                    del prow[j]
                    self._occ[j].discard(q)
        self.pivots[p] = r
        for j in r:
            if j != p:
                self._occ.setdefault(j, set()).add(p)
        return True

    def contains(self, row: Mapping[int, Fraction]) -> bool:
        return not self.reduce(row)

    def pivot_columns(self) -> list[int]:
        return sorted(self.pivots)

    def free_columns(self) -> list[int]:
        return [c for c in range(self.ncols) if c not in self.pivots]

    def nullspace(self) -> list[SparseRow]:
        """Basis of the right kernel: one vector per free column, ascending."""
        basis = []
        for f in self.free_columns():
            v: SparseRow = {f: Fraction(1)}
            for q in self._occ.get(f, ()):
                v[q] = -self.pivots[q][f]
            basis.append(dict(sorted(v.items())))
        return basis

    def rref_rows(self) -> list[SparseRow]:
        return [dict(sorted(self.pivots[p].items())) for p in sorted(self.pivots)]


def sparse_rows(a: RationalMatrix) -> list[SparseRow]:
    return [dict(r) for r in a.nonzero_rows()]


def sparse_nullspace(rows: Iterable[Mapping[int, Fraction]], ncols: int) -> list[SparseRow]:
    red = RowReducer(ncols)
    for r in rows:
        red.add(r)
    return red.nullspace()


def sparse_rank(rows: Iterable[Mapping[int, Fraction]], ncols: int) -> int:
    red = RowReducer(ncols)
    for r in rows:
        red.add(r)
    return red.rank


def rank(a: RationalMatrix) -> int:
    return sparse_rank(sparse_rows(a), a.cols)


def nullspace(a: RationalMatrix) -> list[RationalMatrix]:
    """Exact basis of ``{v : a v = 0}`` as column vectors; empty iff trivial."""
    out = []
    for v in sparse_nullspace(sparse_rows(a), a.cols):
        out.append(RationalMatrix.column(v.get(j, 0) for j in range(a.cols)))
    return out


def rref(a: RationalMatrix) -> tuple[RationalMatrix, list[int]]:
    red = RowReducer(a.cols)
    for r in sparse_rows(a):
        red.add(r)
    rows = [[r.get(j, 0) for j in range(a.cols)] for r in red.rref_rows()]
    return RationalMatrix(rows, rows=len(rows), cols=a.cols), red.pivot_columns()


def solve(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix | None:
    """One exact solution of ``a x = b`` for a column ``b``, or None if inconsistent.

    Free variables are set to zero.
    """
    if b.cols != 1 or b.rows != a.rows:
        raise ShapeError(f"right-hand side must be a column of length {a.rows}")
    n = a.cols
    red = RowReducer(n + 1)
    for i, r in enumerate(a.nonzero_rows()):
        row = dict(r)
        if b[i, 0]:
            row[n] = b[i, 0]
        red.add(row)
    if n in red.pivots:
        return None
    x = [Fraction(0)] * n
    for p, row in red.pivots.items():
        x[p] = row.get(n, Fraction(0))
    return RationalMatrix.column(x)


def column_stack(vectors: Sequence[Sequence]) -> RationalMatrix:
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        raise ShapeError("need at least one column")
    return RationalMatrix([list(r) for r in zip(*vectors)])


def mat_vec(a: RationalMatrix, v: Sequence) -> tuple[Fraction, ...]:
    if len(v) != a.cols:
        raise ShapeError(f"vector of length {len(v)} for matrix with {a.cols} columns")
    return tuple(sum((x * v[j] for j, x in row), Fraction(0)) for row in a.nonzero_rows())
