"""Cotangent module of F1 and its Frobenius pushforward, as printed by Macaulay2.

Cox variables x0..x3 belong to the rays (1,0), (0,1), (-1,1), (0,-1).
"""

import itertools

from toric_hdi.cox import FreeMultigradedModule, PresentedModule, monomial


def cotangent_presentation(F1):
    target = FreeMultigradedModule(F1, [(2, 0), (0, 2), (0, 2)])
    source = FreeMultigradedModule(F1, [(1, 2)])
    entries = [[monomial((0, 1, 0, 1))], [monomial((1, 0, 0, 0))], [monomial((0, 0, 1, 0), -1)]]
    return PresentedModule(target, source, entries)


X0, X2, X1X3, ONE = (1, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 1), (0, 0, 0, 0)

PUSHED_ROW_DEGREES = [(1, 0), (1, 1), (2, 0), (1, 1), (0, 1), (0, 2), (1, 1), (0, 2),
                      (0, 1), (0, 2), (1, 1), (0, 2)]

# (row, column, exponents, coefficient) of the nonzero entries of the 12 x 4 matrix
PUSHED_ENTRIES = [
    (0, 3, X1X3, 1), (1, 2, ONE, 1), (2, 1, X1X3, 1), (3, 0, ONE, 1),
    (4, 0, X0, 1), (5, 1, X0, 1), (6, 2, ONE, 1), (7, 3, ONE, 1),
    (8, 2, X2, -1), (9, 3, ONE, -1), (10, 0, ONE, -1), (11, 1, X2, -1),
]


def pushed_matrix():
    rows = [[{} for _ in range(4)] for _ in range(12)]
    for r, c, e, k in PUSHED_ENTRIES:
        rows[r][c] = {e: k}
    return rows


def _row_key(row):
    # canonical sign: first nonzero entry gets a positive leading coefficient
    for p in row:
        if p:
            lead = p[max(p)]
            sign = 1 if lead > 0 else -1
            break
    else:
        sign = 1
    return tuple(tuple(sorted((e, sign * c) for e, c in p.items())) for p in row)


def column_matching(A, B):
    """Column permutation and signs turning B into A up to row permutation and row signs.

    Returns ``(perm, signs)`` with column k of A matching ``signs[k]`` times
    column ``perm[k]`` of B, or None.
    """
    if len(A) != len(B) or (A and len(A[0]) != len(B[0])):
        return None
    ncols = len(A[0]) if A else 0
    target = sorted(_row_key(r) for r in A)
    for perm in itertools.permutations(range(ncols)):
        for signs in itertools.product((1, -1), repeat=ncols):
            rows = [[{e: s * c for e, c in row[j].items()} for j, s in zip(perm, signs)] for row in B]
            if sorted(_row_key(r) for r in rows) == target:
                return perm, signs
    return None


def equivalent_up_to_permutation_and_sign(A, B):
    """Whether B is obtained from A by permuting and negating rows and columns."""
    return column_matching(A, B) is not None


def reference_presentation(F1, source_degrees):
    """The printed matrix with degrees forced by homogeneity from its column degrees."""
    A = pushed_matrix()
    rows = []
    for row in A:
        c, entry = next((c, p) for c, p in enumerate(row) if p)
        cls = F1.class_of(next(iter(entry)))
        rows.append(tuple(a - b for a, b in zip(source_degrees[c], cls)))
    return PresentedModule(FreeMultigradedModule(F1, rows), FreeMultigradedModule(F1, source_degrees), A)
