import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_data import (
    PUSHED_ROW_DEGREES,
    cotangent_presentation,
    equivalent_up_to_permutation_and_sign,
    column_matching,
    pushed_matrix,
    reference_presentation,
)
from toric_hdi import linalg as la
from toric_hdi.cox import (
    FreeMultigradedModule,
    PresentedModule,
    class_box,
    free_presentation,
    generic_rank,
    hilbert_function,
    is_zero_matrix,
    matrix_product,
    monomial,
)
from toric_hdi.fan import hirzebruch_surface, projective_space
from toric_hdi.frobenius import (
    FrobeniusError,
    frobenius_push_complex,
    frobenius_push_map,
    frobenius_push_module,
    frobenius_summands,
    residues,
)

F1 = hirzebruch_surface(1)
P1 = projective_space(1)
P2 = projective_space(2)
VARIETIES = {"P1": P1, "P2": P2, "F1": F1}


def residue_counts(X, p, D, E):
    """Characters of O(D + pE) grouped by their residue mod p."""
    big = [a + p * b for a, b in zip(D, E)]
    return Counter(tuple(x % p for x in m) for m in X.lattice_points(big))


def test_projective_line_example():
    s = frobenius_summands(P1, 2, (0, 0))
    assert s.classes() == [(0,), (-1,)]
    assert [u for u, _ in s.summands] == [(0,), (1,)]


def test_p_equals_one_is_identity():
    for X in VARIETIES.values():
        D = tuple(range(X.n_rays))
        s = frobenius_summands(X, 1, D)
        assert s.summands == (((0,) * X.dim, D),)
    M = cotangent_presentation(F1)
    pushed = frobenius_push_module(F1, 1, M)
    assert pushed.matrix == M.matrix and pushed.target.degrees == M.target.degrees


def test_summand_counts_and_character_partition():
    for name, X in VARIETIES.items():
        for p in (2, 3):
            D = tuple((-1) ** i * i for i in range(X.n_rays))
            s = frobenius_summands(X, p, D)
            assert len(s) == p ** X.dim
            for d in class_box([-1] * X.class_group_rank, [2] * X.class_group_rank):
                E = X.lift(d).coefficients
                counts = residue_counts(X, p, D, E)
                for u, Du in s.summands:
                    assert counts.get(u, 0) == X.count_lattice_points([a + b for a, b in zip(Du, E)])


def test_plane_structure_sheaf_p3():
    s = frobenius_summands(P2, 3, (0, 0, 0))
    assert len(s) == 9
    for d in range(-2, 4):
        total = sum(P2.count_lattice_points([a + d * (i == 0) for i, a in enumerate(Du)]) for Du in s.divisors())
        assert total == P2.count_lattice_points((3 * d, 0, 0))


def test_push_of_monomial_on_projective_line():
    blocks = frobenius_push_map(P1, 2, (-1, 0), (0, 0), monomial((1, 0)))
    nonzero = {(r, c): p for r, row in enumerate(blocks) for c, p in enumerate(row) if p}
    # x0 fixes characters, so the residue of each section is preserved
    assert nonzero == {(0, 0): {(1, 0): 1}, (1, 1): {(0, 0): 1}}


def test_unit_pushes_to_identity():
    D = (1, -2, 0, 1)
    blocks = frobenius_push_map(F1, 3, D, D, monomial((0, 0, 0, 0)))
    for r, row in enumerate(blocks):
        for c, p in enumerate(row):
            assert p == ({(0, 0, 0, 0): 1} if r == c else {})


def test_class_mismatch_is_rejected():
    with pytest.raises(FrobeniusError, match="not homogeneous of the required degree"):
        frobenius_push_map(P1, 2, (0, 0), (0, 0), monomial((1, 0)))


def track_characters(X, p, s, t, c, d):
    """Independent check of one pushed monomial by following characters.

    Every character m of O(s + pE) is written p m'' + u; multiplying its Cox
    monomial by x^c gives a monomial of O(t + pE) with character p m''' + u'.
    The pushed block (u', u) must send the Cox monomial of m'' to that of m'''.
    """
    E = X.lift(d).coefficients
    src = [a + p * b for a, b in zip(s, E)]
    tgt = [a + p * b for a, b in zip(t, E)]
    res = residues(X.dim, p)
    blocks = frobenius_push_map(X, p, s, t, monomial(c))
    src_sum = dict(frobenius_summands(X, p, s).summands)
    tgt_sum = dict(frobenius_summands(X, p, t).summands)
    checked = 0
    for m in X.lattice_points(src):
        e = [la.dot(m, u) + a for u, a in zip(X.rays, src)]
        image = [x + y for x, y in zip(e, c)]
        m2 = la.solve([list(r) for r in X.rays], [x - a for x, a in zip(image, tgt)])
        m2 = tuple(int(x) for x in m2)
        u, u2 = tuple(x % p for x in m), tuple(x % p for x in m2)
        mpp = tuple((x - y) // p for x, y in zip(m, u))
        mppp = tuple((x - y) // p for x, y in zip(m2, u2))
        Du = [a + b for a, b in zip(src_sum[u], E)]
        Dv = [a + b for a, b in zip(tgt_sum[u2], E)]
        before = tuple(la.dot(mpp, r) + a for r, a in zip(X.rays, Du))
        after = tuple(la.dot(mppp, r) + a for r, a in zip(X.rays, Dv))
        entry = blocks[res.index(u2)][res.index(u)]
        assert len(entry) == 1
        (ex, coef), = entry.items()
        assert coef == 1
        assert tuple(x + y for x, y in zip(before, ex)) == after
        checked += 1
    return checked


@pytest.mark.parametrize("p", [2, 3])
def test_pushed_monomials_follow_characters(p):
    rng = random.Random(7)
    total = 0
    for _ in range(6):
        s = tuple(rng.randint(-2, 2) for _ in range(4))
        c = tuple(rng.randint(0, 2) for _ in range(4))
        cls = tuple(a + b for a, b in zip(F1.class_of(s), F1.class_of(c)))
        t = F1.lift(cls).coefficients
        for d in [(0, 0), (1, 1), (2, 1)]:
            total += track_characters(F1, p, s, t, c, d)
    assert total > 0


def test_cotangent_pushforward_matches_reference():
    M = cotangent_presentation(F1)
    pushed = frobenius_push_module(F1, 2, M)
    assert list(pushed.target.degrees) == PUSHED_ROW_DEGREES
    assert equivalent_up_to_permutation_and_sign(pushed_matrix(), pushed.matrix)
    assert generic_rank(pushed) == 8
    box = class_box((-1, -1), (3, 3))
    perm, _ = column_matching(pushed_matrix(), pushed.matrix)
    ref = reference_presentation(F1, [pushed.source.degrees[j] for j in perm])
    assert sorted(ref.target.degrees) == sorted(PUSHED_ROW_DEGREES)
    assert hilbert_function(ref, box) == hilbert_function(pushed, box)
    doubled = hilbert_function(M, [(2 * a, 2 * b) for a, b in box])
    assert all(hilbert_function(pushed, [d])[d] == doubled[(2 * d[0], 2 * d[1])] for d in box)


def test_reference_comparison_detects_changes():
    changed = pushed_matrix()
    changed[0][3] = {(0, 1, 0, 1): 2}
    assert not equivalent_up_to_permutation_and_sign(pushed_matrix(), changed)


def test_free_module_pushforward():
    F = FreeMultigradedModule(F1, [(1, 0)])
    pushed = frobenius_push_module(F1, 2, free_presentation(F))
    expected = sorted(tuple(-x for x in c) for c in frobenius_summands(F1, 2, F.divisor(0)).classes())
    assert sorted(pushed.target.degrees) == expected
    assert pushed.source.rank == 0


def koszul_complex():
    """0 -> S(-2) -> S(-1)^2 -> S on P1."""
    F0 = FreeMultigradedModule(P1, [(0,)])
    F1_ = FreeMultigradedModule(P1, [(1,), (1,)])
    F2 = FreeMultigradedModule(P1, [(2,)])
    d1 = PresentedModule(F0, F1_, [[monomial((1, 0)), monomial((0, 1))]])
    d2 = PresentedModule(F1_, F2, [[monomial((0, 1))], [monomial((1, 0), -1)]])
    return d1, d2


@pytest.mark.parametrize("p", [1, 2, 3])
def test_complex_pushforward(p):
    d1, d2 = koszul_complex()
    e1, e2 = frobenius_push_complex(P1, p, [d1, d2])
    assert is_zero_matrix(matrix_product(e1.matrix, e2.matrix, e1.source.rank))
    assert e1.target.rank == p and e1.source.rank == 2 * p and e2.source.rank == p


def test_complex_edge_cases():
    assert frobenius_push_complex(P1, 2, []) == []
    (single,) = frobenius_push_complex(F1, 2, [cotangent_presentation(F1)])
    assert single.target.rank == 12
    d1, d2 = koszul_complex()
    bad = PresentedModule(d2.target, d2.source, [[monomial((0, 1))], [monomial((1, 0))]])
    with pytest.raises(FrobeniusError, match="not a complex"):
        frobenius_push_complex(P1, 2, [d1, bad])


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=4, max_size=4), st.lists(st.integers(0, 2), min_size=4, max_size=4),
       st.integers(-2, 2), st.integers(-2, 2), st.sampled_from([2, 3]))
def test_push_respects_composition(e1, e2, a, b, p):
    g0 = (a, b)
    g1 = tuple(x + y for x, y in zip(g0, F1.class_of(e1)))
    g2 = tuple(x + y for x, y in zip(g1, F1.class_of(e2)))
    F0, Fm1, Fm2 = (FreeMultigradedModule(F1, [g]) for g in (g0, g1, g2))
    A = PresentedModule(F0, Fm1, [[monomial(e1)]])
    B = PresentedModule(Fm1, Fm2, [[monomial(e2)]])
    AB = PresentedModule(F0, Fm2, matrix_product(A.matrix, B.matrix, 1))
    pA, pB, pAB = (frobenius_push_module(F1, p, M) for M in (A, B, AB))
    assert matrix_product(pA.matrix, pB.matrix, pA.source.rank) == pAB.matrix


def tower_classes(X, p, q, D):
    inner = frobenius_summands(X, q, D)
    return Counter(c for Du in inner.divisors() for c in frobenius_summands(X, p, Du).classes())


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_tower_law(D):
    direct = Counter(frobenius_summands(F1, 6, D).classes())
    assert tower_classes(F1, 2, 3, D) == direct
    assert tower_classes(F1, 3, 2, D) == direct
