import pytest

from toric_hdi.contractions import nef_cone_rays, nef_ray_contractions, walls
from toric_hdi.fan import FanError, Fan, ToricVariety, hirzebruch_surface, product_variety, projective_space
from toric_hdi.maps import is_fibration


def test_walls_of_f1(F1):
    ws = walls(F1)
    assert len(ws) == 4
    for w in ws:
        a, b = w.cones
        (ra,), (rb,) = a - b, b - a
        assert w.relation[ra] > 0 and w.relation[rb] > 0
        # relation is a linear dependency among the rays
        assert all(sum(c * u[k] for c, u in zip(w.relation, F1.rays)) == 0 for k in range(2))


def test_nef_cones(F1, P2):
    assert nef_cone_rays(F1) == [(0, 1), (1, 0)]
    assert nef_cone_rays(P2) == [(1,)]
    Q = product_variety(projective_space(1), projective_space(1))
    assert len(nef_cone_rays(Q)) == 2


def test_f1_contractions(F1):
    maps = nef_ray_contractions(F1)
    assert len(maps) == 2
    assert not any(f.is_isomorphism for f in maps)
    dims = sorted((f.target.dim, len(f.target.rays)) for f in maps)
    assert dims == [(1, 2), (2, 3)]
    for f in maps:
        assert f.target.is_smooth and f.target.is_complete
        assert is_fibration(f)


def test_plane_contraction_is_identity(P2):
    (f,) = nef_ray_contractions(P2)
    assert f.is_isomorphism


def test_quadric_projections():
    Q = product_variety(projective_space(1), projective_space(1))
    maps = nef_ray_contractions(Q)
    assert len(maps) == 2
    assert sorted(f.matrix for f in maps) == [((0, 1),), ((1, 0),)]
    assert all(f.target.dim == 1 for f in maps)


def test_higher_hirzebruch():
    maps = nef_ray_contractions(hirzebruch_surface(2))
    # one ray is the P1-bundle projection; the other contracts the (-2)-curve
    # onto a singular weighted plane
    assert sorted(f.target.dim for f in maps) == [1, 2]
    singular = [f for f in maps if f.target.dim == 2][0]
    assert not singular.target.is_smooth


def test_nef_cone_needs_complete_variety():
    cone = ToricVariety(Fan([(1, 0), (0, 1)], [(0, 1)]))
    with pytest.raises(FanError):
        nef_cone_rays(cone)
