"""Wall relations, nef cones and the contractions of extremal nef rays."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg as la
from .fan import Fan, FanError, TDivisor, ToricVariety, point
from .maps import ToricMorphism, identity_morphism


@dataclass(frozen=True)
class Wall:
    cones: tuple[frozenset[int], frozenset[int]]
    relation: tuple[int, ...]
    curve_class: tuple[int, ...]

    def degree(self, D: TDivisor) -> int:
        return la.dot(self.relation, D.coefficients)


def walls(X: ToricVariety) -> list[Wall]:
    """Every wall of a complete simplicial fan with its primitive ray relation.

    The relation is supported on the rays of the two adjacent cones and is
    positive on the two rays off the wall.
    """
    out = []
    basis = [X.lift([int(i == j) for j in range(X.class_group_rank)]) for i in range(X.class_group_rank)]
    for a, b in itertools.combinations(X.max_cones, 2):
        wall = a & b
        if len(wall) != X.dim - 1:
            continue
        (ra,), (rb,) = a - wall, b - wall
        support = [ra, rb] + sorted(wall)
        cols = la.transpose([list(X.rays[i]) for i in support])
        kernel = la.kernel_vectors(cols, len(support))
        if len(kernel) != 1:
            raise FanError(f"wall {sorted(wall)} has no unique relation")
        rel = list(la.integral_vector(kernel[0]))
        if rel[0] < 0:
            rel = [-x for x in rel]
        full = [0] * X.n_rays
        for i, c in zip(support, rel):
            full[i] = c
        curve = tuple(la.dot(full, e.coefficients) for e in basis)
        out.append(Wall((a, b), tuple(full), curve))
    return out


def nef_cone_rays(X: ToricVariety) -> list[tuple[int, ...]]:
    """Extremal rays of the nef cone in class coordinates, sorted lexicographically."""
    if not (X.is_smooth and X.is_complete):
        raise FanError("nef cone needs a smooth complete variety")
    r = X.class_group_rank
    normals = sorted({w.curve_class for w in walls(X)})
    if r == 0:
        return []
    if r == 1:
        cands = [(1,), (-1,)]
        return [c for c in cands if all(la.dot(nrm, c) >= 0 for nrm in normals)]
    found = set()
    for subset in itertools.combinations(normals, r - 1):
        kernel = la.kernel_vectors([list(s) for s in subset], r)
        if len(kernel) != 1:
            continue
        v = la.integral_vector(kernel[0])
        for w in (v, tuple(-x for x in v)):
            if all(la.dot(nrm, w) >= 0 for nrm in normals):
                found.add(w)
    return sorted(found)


def _contraction_of(X: ToricVariety, cls) -> ToricMorphism:
    D = X.lift(cls)
    verts = X.divisor_polytope_vertices(D)
    distinct = sorted({m for _, m in verts})
    if len(distinct) == len(verts) and la.rank([[a - b for a, b in zip(m, distinct[0])] for m in distinct]) == X.dim:
        return identity_morphism(X)
    m0 = distinct[0]
    diffs = [[a - b for a, b in zip(m, m0)] for m in distinct[1:]]
    diffs = [d for d in diffs if any(d)]
    n = X.dim
    # basis of V ∩ M; its rows are the lattice map N -> N_Y
    proj = la.saturate_rows([la._clear_denominators(d) for d in diffs], n) if diffs else []
    k = len(proj)
    if k == 0:
        return ToricMorphism(point(), X, [])
    # a source ray gives a target ray when its face of P_D is a facet
    facet_rays: dict[tuple[int, ...], list[int]] = {}
    for rho in range(X.n_rays):
        on_face = [m for c, m in verts if rho in c]
        span = [[a - b for a, b in zip(m, on_face[0])] for m in on_face[1:]]
        if (la.rank(span) if span else 0) == k - 1:
            image = la.primitive_vector(la.matvec(proj, X.rays[rho]))
            facet_rays.setdefault(image, []).append(rho)
    target_rays = sorted(facet_rays, key=lambda v: min(facet_rays[v]))
    cones = []
    for v in distinct:
        cone = []
        for t, ray in enumerate(target_rays):
            rho = facet_rays[ray][0]
            if la.dot(v, X.rays[rho]) == -D.coefficients[rho]:
                cone.append(t)
        cones.append(cone)
    try:
        target_fan = Fan(target_rays, cones, dim=k)
    except FanError:
        # normal fans of polytopes are fans, but may be non-simplicial
        target_fan = Fan(target_rays, cones, dim=k, check=False)
    target = ToricVariety(target_fan)
    return ToricMorphism(target, X, proj)


def nef_ray_contractions(X: ToricVariety) -> list[ToricMorphism]:
    """One morphism per extremal nef ray, in lexicographic order of the ray.

    Ample rays give the identity, flagged by ``is_isomorphism``.
    """
    return [_contraction_of(X, c) for c in nef_cone_rays(X)]
