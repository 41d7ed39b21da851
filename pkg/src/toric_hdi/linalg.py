"""Exact integer and rational linear algebra.

Matrices are plain lists of row lists holding ``int`` or ``Fraction``
entries.  Nothing here ever rounds: integer routines stay in ``int`` and
rational routines stay in ``Fraction``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

IntMatrix = list[list[int]]
RatMatrix = list[list[Fraction]]


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(rows: int, cols: int) -> IntMatrix:
    return [[0] * cols for _ in range(rows)]


def copy(A):
    return [list(row) for row in A]


def shape(A) -> tuple[int, int]:
    if not A:
        return 0, 0
    return len(A), len(A[0])


def transpose(A):
    if not A:
        return []
    return [list(col) for col in zip(*A)]


def matmul(A, B):
    """Product of two matrices; ``B`` may have zero columns."""
    if not A:
        return []
    inner = len(A[0])
    if inner != len(B):
        raise ValueError(f"shape mismatch: {shape(A)} x {shape(B)}")
    cols = len(B[0]) if B else 0
    Bt = transpose(B) if B else [[] for _ in range(cols)]
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, v: Sequence):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def to_fractions(A) -> RatMatrix:
    return [[Fraction(x) for x in row] for row in A]


def primitive_vector(v: Sequence[int]) -> tuple[int, ...]:
    """Return ``v / gcd(v)``, the primitive lattice vector on the ray of ``v``."""
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(int(x) // g for x in v)


# ---------------------------------------------------------------------------
# Hermite and Smith normal forms


def hermite_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U @ A == H``.  ``H`` is in
    row echelon form, pivots are positive and every entry above a pivot lies
    in ``[0, pivot)``.  Zero rows are collected at the bottom.
    """
    m, n = len(A), (len(A[0]) if A else 0)
    H = [[int(x) for x in row] for row in A]
    U = identity(m)
    r = 0
    for j in range(n):
        if r == m:
            break
        while True:
            nonzero = [i for i in range(r, m) if H[i][j] != 0]
            if not nonzero:
                break
            k = min(nonzero, key=lambda i: abs(H[i][j]))
            if k != r:
                H[r], H[k] = H[k], H[r]
                U[r], U[k] = U[k], U[r]
            done = True
            for i in range(r + 1, m):
                if H[i][j]:
                    q = H[i][j] // H[r][j]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    if H[i][j]:
                        done = False
            if done:
                break
        if H[r][j] == 0:
            continue
        if H[r][j] < 0:
            H[r] = [-a for a in H[r]]
            U[r] = [-a for a in U[r]]
        p = H[r][j]
        for i in range(r):
            q = H[i][j] // p
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
    return H, U


def hnf_pivots(H: IntMatrix) -> list[int]:
    """Column index of the pivot of every nonzero row of an echelon matrix."""
    pivots = []
    for row in H:
        for j, x in enumerate(row):
            if x:
                pivots.append(j)
                break
    return pivots


def smith_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form ``S = P @ A @ Q`` with ``P``, ``Q`` unimodular.

    The diagonal of ``S`` is nonnegative and satisfies ``d1 | d2 | ...``.
    """
    m, n = len(A), (len(A[0]) if A else 0)
    S = [[int(x) for x in row] for row in A]
    P = identity(m)
    Q = identity(n)

    def swap_rows(i, k):
        S[i], S[k] = S[k], S[i]
        P[i], P[k] = P[k], P[i]

    def swap_cols(j, k):
        for row in S:
            row[j], row[k] = row[k], row[j]
        for row in Q:
            row[j], row[k] = row[k], row[j]

    def add_row(dst, src, q):
        # row_dst -= q * row_src
        S[dst] = [a - q * b for a, b in zip(S[dst], S[src])]
        P[dst] = [a - q * b for a, b in zip(P[dst], P[src])]

    def add_col(dst, src, q):
        for row in S:
            row[dst] -= q * row[src]
        for row in Q:
            row[dst] -= q * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(S[i][j]), i, j) for i in range(t, m) for j in range(t, n) if S[i][j]]
            if not entries:
                return S, P, Q
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
            clean = True
            for i in range(t + 1, m):
                if S[i][t]:
                    add_row(i, t, S[i][t] // S[t][t])
                    clean = clean and S[i][t] == 0
            for j in range(t + 1, n):
                if S[t][j]:
                    add_col(j, t, S[t][j] // S[t][t])
                    clean = clean and S[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % S[t][t]),
                None,
            )
            if bad is None:
                break
            # pull the offending row up so the pivot shrinks on the next pass
            add_row(t, bad, -1)
        if S[t][t] < 0:
            S[t] = [-a for a in S[t]]
            P[t] = [-a for a in P[t]]
    return S, P, Q


def smith_diagonal(A: IntMatrix) -> list[int]:
    S, _, _ = smith_normal_form(A)
    return [S[i][i] for i in range(min(shape(S)))]


# ---------------------------------------------------------------------------
# Rational elimination


def rref(A) -> tuple[RatMatrix, list[int]]:
    """Reduced row echelon form over Q and the list of pivot columns."""
    R = to_fractions(A)
    m, n = shape(R)
    pivots: list[int] = []
    r = 0
    for j in range(n):
        p = next((i for i in range(r, m) if R[i][j] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = 1 / R[r][j]
        R[r] = [x * inv for x in R[r]]
        for i in range(m):
            if i != r and R[i][j] != 0:
                c = R[i][j]
                R[i] = [a - c * b for a, b in zip(R[i], R[r])]
        pivots.append(j)
        r += 1
        if r == m:
            break
    return R, pivots


def rank(A) -> int:
    if not A or not A[0]:
        return 0
    return len(rref(A)[1])


def rational_kernel_basis(A, ncols: int | None = None) -> RatMatrix:
    """Basis of the right kernel of ``A``, returned as the columns of a matrix.

    ``ncols`` is only needed when ``A`` has no rows.  The result has shape
    ``(cols(A), nullity)``; with nullity 0 it is a list of empty rows.
    """
    n = len(A[0]) if A else (ncols or 0)
    if not A:
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, pivots = rref(A)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    if not basis:
        return [[] for _ in range(n)]
    return transpose(basis)


def kernel_vectors(A, ncols: int | None = None) -> list[list[Fraction]]:
    """Right-kernel basis as a list of vectors."""
    K = rational_kernel_basis(A, ncols)
    if not K or not K[0]:
        return []
    return transpose(K)


def integer_kernel_basis(A: IntMatrix, ncols: int | None = None) -> IntMatrix:
    """Lattice basis of ``{x in Z^n : A x = 0}`` as rows, in Hermite form."""
    n = len(A[0]) if A else (ncols or 0)
    if not A:
        return identity(n)
    H, U = hermite_normal_form(transpose(A))
    r = len(hnf_pivots(H))
    rows = [U[i] for i in range(r, n)]
    if not rows:
        return []
    Hk, _ = hermite_normal_form(rows)
    return [row for row in Hk if any(row)]


def solve(A, b) -> list[Fraction] | None:
    """One rational solution of ``A x = b`` or ``None`` when inconsistent."""
    m = len(A)
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    if not aug:
        return [Fraction(0)] * n
    R, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(R, pivots):
        x[p] = row[n]
    return x


def determinant(A) -> Fraction:
    R = to_fractions(A)
    n = len(R)
    det = Fraction(1)
    for j in range(n):
        p = next((i for i in range(j, n) if R[i][j] != 0), None)
        if p is None:
            return Fraction(0)
        if p != j:
            R[j], R[p] = R[p], R[j]
            det = -det
        det *= R[j][j]
        for i in range(j + 1, n):
            if R[i][j]:
                c = R[i][j] / R[j][j]
                R[i] = [a - c * b for a, b in zip(R[i], R[j])]
    return det


def inverse(A) -> RatMatrix:
    n = len(A)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in R]


def is_unimodular(U: IntMatrix) -> bool:
    return len(U) == (len(U[0]) if U else 0) and abs(determinant(U)) == 1


def saturate_rows(rows: IntMatrix, n: int) -> IntMatrix:
    """Hermite basis of ``span_Q(rows) ∩ Z^n``."""
    if not rows:
        return []
    annihilator = kernel_vectors(rows, n)
    if not annihilator:
        return identity(n)
    W = [_clear_denominators(v) for v in annihilator]
    return integer_kernel_basis(W, n)


def _clear_denominators(v: Sequence[Fraction]) -> list[int]:
    lcm = 1
    for x in v:
        d = Fraction(x).denominator
        lcm = lcm * d // gcd(lcm, d)
    return [int(x * lcm) for x in v]


def integral_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Smallest positive integer multiple of a rational vector, made primitive."""
    return primitive_vector(_clear_denominators(v))
