"""Exact rational linear algebra.

Two jobs: certify positive semidefiniteness of symmetric rational matrices
(with an exact counterexample vector on rejection), and solve rational
linear systems for the rounding stage of the numeric solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def _as_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def mat_vec(a: Matrix, v: Vector) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def quadratic_form(a: Matrix, v: Vector) -> Fraction:
    return sum((vi * wi for vi, wi in zip(v, mat_vec(a, v))), Fraction(0))


@dataclass
class PsdOutcome:
    """Result of an exact PSD check.

    On acceptance, pivots holds the diagonal of D in the pivoted LDL^T
    factorization (all >= 0).  On rejection, witness is an exact rational
    vector with witness^T A witness < 0.
    """

    is_psd: bool
    pivots: Optional[Vector] = None
    witness: Optional[Vector] = None
    witness_value: Optional[Fraction] = None


def psd_certificate(matrix: Sequence[Sequence]) -> PsdOutcome:
    """Decide A >= 0 exactly via LDL^T with symmetric diagonal pivoting.

    Accepts iff every pivot is nonnegative and every zero-pivot row of the
    running Schur complement is identically zero.  Rejection returns a
    vector v with v^T A v < 0, exactly.
    """
    a = _as_fraction_matrix(matrix)
    n = len(a)
    for row in a:
        if len(row) != n:
            raise ValueError("matrix is not square")
    for i in range(n):
        for j in range(i + 1, n):
            if a[i][j] != a[j][i]:
                raise ValueError(f"matrix is not symmetric at ({i}, {j})")

    # Multipliers of the elimination; L[i][k] only for eliminated columns k.
    low = [[Fraction(0)] * n for _ in range(n)]
    perm = list(range(n))
    pivots: Vector = []

    def lift(k: int, tail: Vector) -> PsdOutcome:
        # Extend a witness for the trailing Schur complement (positions k..n-1)
        # to the full matrix: solve the unit upper-triangular system
        # u_i + sum_{j>i} L[j][i] u_j = 0 for i < k.
        u = [Fraction(0)] * n
        u[k:] = tail
        for i in range(k - 1, -1, -1):
            u[i] = -sum((low[j][i] * u[j] for j in range(i + 1, n)), Fraction(0))
        v = [Fraction(0)] * n
        for pos, orig in enumerate(perm):
            v[orig] = u[pos]
        value = quadratic_form(_as_fraction_matrix(matrix), v)
        return PsdOutcome(is_psd=False, witness=v, witness_value=value)

    for k in range(n):
        piv = max(range(k, n), key=lambda j: a[j][j])
        if a[piv][piv] > 0:
            if piv != k:
                a[k], a[piv] = a[piv], a[k]
                for row in a:
                    row[k], row[piv] = row[piv], row[k]
                low[k], low[piv] = low[piv], low[k]
                perm[k], perm[piv] = perm[piv], perm[k]
            d = a[k][k]
            pivots.append(d)
            for i in range(k + 1, n):
                if a[i][k] == 0:
                    continue
                m = a[i][k] / d
                low[i][k] = m
                for j in range(k, n):
                    a[i][j] -= m * a[k][j]
            for j in range(k + 1, n):
                a[k][j] = Fraction(0)
            continue
        # No positive pivot remains in the trailing block.
        for j in range(k, n):
            if a[j][j] < 0:
                tail = [Fraction(0)] * (n - k)
                tail[j - k] = Fraction(1)
                return lift(k, tail)
        # All trailing diagonal entries are zero; PSD forces the block to vanish.
        for i in range(k, n):
            for j in range(i + 1, n):
                if a[i][j] != 0:
                    tail = [Fraction(0)] * (n - k)
                    tail[i - k] = Fraction(1)
                    tail[j - k] = Fraction(-1) if a[i][j] > 0 else Fraction(1)
                    return lift(k, tail)
        pivots.extend([Fraction(0)] * (n - k))
        break
    return PsdOutcome(is_psd=True, pivots=pivots)


def ldl_decomposition(matrix: Sequence[Sequence]):
    """Pivoted LDL^T of a PSD matrix: returns (perm, L, D) with
    A[perm[i]][perm[j]] == sum_k L[i][k] * D[k] * L[j][k].

    Raises ValueError when the matrix is not PSD.
    """
    a = _as_fraction_matrix(matrix)
    n = len(a)
    # Multipliers only; the unit diagonal is added at the end.
    low = [[Fraction(0)] * n for _ in range(n)]
    perm = list(range(n))
    diag = [Fraction(0)] * n
    for k in range(n):
        piv = max(range(k, n), key=lambda j: a[j][j])
        if a[piv][piv] < 0:
            raise ValueError("matrix is not positive semidefinite")
        if a[piv][piv] == 0:
            for i in range(k, n):
                for j in range(k, n):
                    if a[i][j] != 0:
                        raise ValueError("matrix is not positive semidefinite")
            break
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            for row in a:
                row[k], row[piv] = row[piv], row[k]
            low[k], low[piv] = low[piv], low[k]
            perm[k], perm[piv] = perm[piv], perm[k]
        d = a[k][k]
        diag[k] = d
        for i in range(k + 1, n):
            m = a[i][k] / d
            low[i][k] = m
            for j in range(k, n):
                a[i][j] -= m * a[k][j]
    for i in range(n):
        low[i][i] = Fraction(1)
    return perm, low, diag


def rref_solve(a: Sequence[Sequence], rhs: Sequence) -> Optional[Vector]:
    """One exact solution of A x = rhs (free variables set to zero), or None
    when the system is inconsistent."""
    m = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(a)]
    ncols = len(aug[0]) - 1 if m else 0
    pivot_cols: list[int] = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, m):
            if aug[i][c] != 0:
                sel = i
                break
        if sel is None:
            continue
        aug[r], aug[sel] = aug[sel], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for row_idx, c in enumerate(pivot_cols):
        x[c] = aug[row_idx][ncols]
    return x


def min_norm_correction(a: Sequence[Sequence], residual: Sequence) -> Optional[Vector]:
    """Minimum-norm delta with A delta = residual, or None when residual is
    outside the row space of A.  Computed as A^T w with (A A^T) w = residual."""
    m = len(a)
    if m == 0:
        return []
    rows = _as_fraction_matrix(a)
    ncols = len(rows[0])
    gram = [[sum((rows[i][t] * rows[j][t] for t in range(ncols)), Fraction(0))
             for j in range(m)] for i in range(m)]
    w = rref_solve(gram, residual)
    if w is None:
        return None
    # Verify consistency: with w solving the normal equations, A^T w solves
    # A delta = residual iff residual lies in range(A) = range(A A^T).
    delta = [sum((rows[i][t] * w[i] for i in range(m)), Fraction(0)) for t in range(ncols)]
    check = mat_vec(rows, delta)
    if any(x != Fraction(y) for x, y in zip(check, residual)):
        return None
    return delta
