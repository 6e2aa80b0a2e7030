"""Dense exact linear algebra over a coefficient field.

Everything is deterministic: columns are processed left to right, rows in
the order supplied, pivots normalized to 1.  Scalars are Fractions or
Quad values; both support truth testing for zero checks.
"""

from __future__ import annotations


class Echelon:
    """Incremental reduced row-echelon form with pivot tracking."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows = []          # reduced rows, pivot normalized to 1
        self.pivots = []        # pivot column per row, strictly increasing order not required

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, row):
        """Return row reduced against the current rows (a fresh list)."""
        row = list(row)
        for r, p in zip(self.rows, self.pivots):
            c = row[p]
            if c:
                for j in range(self.ncols):
                    if r[j]:
                        row[j] = row[j] - c * r[j]
        return row

    def add(self, row) -> bool:
        """Reduce and insert; True if the row enlarged the span."""
        row = self.reduce(row)
        piv = None
        for j in range(self.ncols):
            if row[j]:
                piv = j
                break
        if piv is None:
            return False
        c = row[piv]
        if c != 1:
            row = [x / c for x in row]
        # back-substitute into existing rows
        for i, r in enumerate(self.rows):
            cc = r[piv]
            if cc:
                self.rows[i] = [a - cc * b for a, b in zip(r, row)]
        self.rows.append(row)
        self.pivots.append(piv)
        return True

    def contains(self, row) -> bool:
        return not any(self.reduce(row))


def rank(rows, ncols=None) -> int:
    if not rows:
        return 0
    ech = Echelon(ncols if ncols is not None else len(rows[0]))
    for r in rows:
        ech.add(r)
    return ech.rank


def kernel_basis(rows, ncols, field):
    """Basis of the right kernel {x : A x = 0}; deterministic order by
    ascending free column index."""
    ech = Echelon(ncols)
    for r in rows:
        ech.add(r)
    pairs = sorted(zip(ech.pivots, ech.rows))
    pivot_cols = [p for p, _ in pairs]
    red = [r for _, r in pairs]
    pivset = set(pivot_cols)
    basis = []
    zero, one = field.zero, field.one
    for f in range(ncols):
        if f in pivset:
            continue
        v = [zero] * ncols
        v[f] = one
        for p, r in zip(pivot_cols, red):
            if r[f]:
                v[p] = -r[f]
        basis.append(v)
    return basis


def solve(rows, ncols, rhs, field):
    """One solution of A x = rhs (free variables set to 0), or None."""
    ech = Echelon(ncols + 1)
    for r, b in zip(rows, rhs):
        ech.add(list(r) + [b])
    pairs = sorted(zip(ech.pivots, ech.rows))
    x = [field.zero] * ncols
    for p, r in pairs:
        if p == ncols:
            return None  # inconsistent: pivot in the rhs column
        x[p] = r[ncols]
    return x


def mat_mul(a, b, field):
    if not a or not b:
        return []
    n, m, k = len(a), len(b), len(b[0])
    zero = field.zero
    out = []
    for i in range(n):
        row = []
        ai = a[i]
        for j in range(k):
            s = zero
            for t in range(m):
                if ai[t] and b[t][j]:
                    s = s + ai[t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def mat_inv(a, field):
    """Inverse of a square matrix, or None if singular."""
    n = len(a)
    ech = Echelon(2 * n)
    one, zero = field.one, field.zero
    for i in range(n):
        ident = [zero] * n
        ident[i] = one
        ech.add(list(a[i]) + ident)
    if ech.rank < n:
        return None
    pairs = sorted(zip(ech.pivots, ech.rows))
    if any(p >= n for p, _ in pairs):
        return None
    return [r[n:] for _, r in pairs]


def same_span(vectors_a, vectors_b, ncols) -> bool:
    """Do two lists of vectors span the same subspace?"""
    ra = rank(vectors_a, ncols)
    rb = rank(vectors_b, ncols)
    if ra != rb:
        return False
    return rank(list(vectors_a) + list(vectors_b), ncols) == ra
