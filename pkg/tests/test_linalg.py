from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from toric_hdi import linalg as la

small = st.integers(min_value=-6, max_value=6)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda m: st.integers(1, max_cols).flatmap(
            lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def unimodular(n, draws):
    """Product of elementary matrices driven by a list of draws."""
    U = la.identity(n)
    for i, j, q in draws:
        i, j = i % n, j % n
        if i != j:
            U[i] = [a + q * b for a, b in zip(U[i], U[j])]
    return U


def test_hnf_small_example():
    H, U = la.hermite_normal_form([[2, 4], [1, 3]])
    assert H == [[1, 1], [0, 2]]
    assert la.matmul(U, [[2, 4], [1, 3]]) == H
    assert la.is_unimodular(U)


def test_smith_small_example():
    assert la.smith_diagonal([[2, 4], [1, 3]]) == [1, 2]


def test_primitive_vector():
    assert la.primitive_vector((4, -6, 2)) == (2, -3, 1)
    with pytest.raises(ValueError, match="zero vector"):
        la.primitive_vector((0, 0))


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_hnf_properties(A):
    H, U = la.hermite_normal_form(A)
    assert la.matmul(U, A) == H
    assert la.is_unimodular(U)
    pivots = la.hnf_pivots(H)
    assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)
    for r, j in enumerate(pivots):
        assert H[r][j] > 0
        assert all(0 <= H[i][j] < H[r][j] for i in range(r))
    assert all(not any(row) for row in H[len(pivots):])


@settings(max_examples=50, deadline=None)
@given(matrices(), st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(-3, 3)), max_size=8))
def test_hnf_depends_only_on_row_lattice(A, draws):
    V = unimodular(len(A), draws)
    assert la.hermite_normal_form(la.matmul(V, A))[0] == la.hermite_normal_form(A)[0]


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_smith_matches_sympy(A):
    S, P, Q = la.smith_normal_form(A)
    assert la.matmul(la.matmul(P, A), Q) == S
    assert la.is_unimodular(P) and la.is_unimodular(Q)
    ours = la.smith_diagonal(A)
    ref = sympy_snf(sympy.Matrix(A), domain=sympy.ZZ)
    theirs = [abs(int(ref[i, i])) for i in range(min(ref.shape))]
    assert ours == theirs
    nz = [d for d in ours if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rank_and_kernel(A):
    n = len(A[0])
    assert la.rank(A) == sympy.Matrix(A).rank()
    K = la.kernel_vectors(A, n)
    assert len(K) == n - la.rank(A)
    for k in K:
        assert all(x == 0 for x in la.matvec(A, k))
    Z = la.integer_kernel_basis(A, n)
    assert len(Z) == len(K)
    for z in Z:
        assert all(isinstance(x, int) for x in z) and not any(la.matvec(A, z))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinant_inverse_solve(A):
    det = la.determinant(A)
    assert det == sympy.Matrix(A).det()
    if det:
        Ainv = la.inverse(A)
        assert la.matmul(A, Ainv) == la.to_fractions(la.identity(len(A)))
        b = list(range(1, len(A) + 1))
        x = la.solve(A, b)
        assert la.matvec(A, x) == [Fraction(v) for v in b]


def test_solve_inconsistent():
    assert la.solve([[1, 1], [2, 2]], [1, 3]) is None


def test_saturate_rows():
    rows = la.saturate_rows([[2, 0, 0], [0, 2, 2]], 3)
    assert len(rows) == 2
    # saturation of span{(1,0,0), (0,1,1)}
    assert la.rank(rows + [[1, 0, 0], [0, 1, 1]]) == 2
    assert la.smith_diagonal(rows) == [1, 1]
