"""Line bundle cohomology on (sub)fans through support complexes.

For a character ``m`` the graded piece ``H^i(X, O(D))_m`` is the reduced
cohomology ``H~^{i-1}`` of the simplicial complex on the rays with
``<m, u_rho> < -a_rho`` whose faces are the cone-spanning subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Iterable, Sequence

from . import linalg as la
from .fan import Fan, FanError, TDivisor, ToricVariety


@dataclass(frozen=True)
class SupportComplex:
    """Abstract simplicial complex stored by its facets.

    ``facets == frozenset({frozenset()})`` is the empty complex (only the
    empty face); ``facets == frozenset()`` is the void complex.
    """

    facets: frozenset

    @classmethod
    def from_faces(cls, faces: Iterable[Iterable[int]]) -> "SupportComplex":
        faces = {frozenset(f) for f in faces}
        return cls(frozenset(f for f in faces if not any(f < g for g in faces)))

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset().union(*self.facets) if self.facets else frozenset()

    @property
    def is_void(self) -> bool:
        return not self.facets

    def faces(self, k: int) -> tuple[tuple[int, ...], ...]:
        """Faces of dimension ``k`` (``k + 1`` vertices), sorted lexicographically."""
        return _faces_of(self.facets, k)

    def is_subcomplex_of(self, other: "SupportComplex") -> bool:
        return all(any(f <= g for g in other.facets) for f in self.facets)


@lru_cache(maxsize=None)
def _faces_of(facets: frozenset, k: int) -> tuple[tuple[int, ...], ...]:
    out = set()
    for f in facets:
        if len(f) >= k + 1:
            out.update(itertools.combinations(sorted(f), k + 1))
    return tuple(sorted(out))


def support_complex(fan: Fan, D: TDivisor | Sequence[int], m: Sequence[int]) -> SupportComplex:
    coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
    used = fan.used_rays
    V = frozenset(i for i in used if la.dot(m, fan.rays[i]) < -coeffs[i])
    return restrict_to(fan, V)


def restrict_to(fan: Fan, V: frozenset[int]) -> SupportComplex:
    return SupportComplex.from_faces(c & V for c in fan.max_cones)


# ---------------------------------------------------------------------------
# reduced simplicial cohomology over Q


def _coboundary(facets: frozenset, k: int) -> list[list[int]]:
    """Matrix of ``delta: C^k -> C^{k+1}`` (rows: (k+1)-faces, cols: k-faces)."""
    if k == -1:
        rows = _faces_of(facets, 0)
        return [[1] for _ in rows] if facets else []
    src = _faces_of(facets, k) if facets else ()
    dst = _faces_of(facets, k + 1) if facets else ()
    index = {f: j for j, f in enumerate(src)}
    M = []
    for g in dst:
        row = [0] * len(src)
        for j in range(len(g)):
            row[index[g[:j] + g[j + 1:]]] = (-1) ** j
        M.append(row)
    return M


def _cochain_dim(facets: frozenset, k: int) -> int:
    if not facets:
        return 0
    if k == -1:
        return 1
    return len(_faces_of(facets, k))


@lru_cache(maxsize=None)
def _cohomology(facets: frozenset, k: int):
    """``(basis, boundaries)`` of reduced ``H^k``: cocycle representatives and a
    spanning set of coboundaries, each as a tuple of ``Fraction`` vectors."""
    n = _cochain_dim(facets, k)
    if n == 0:
        return (), ()
    delta_k = _coboundary(facets, k)
    cocycles = la.kernel_vectors(delta_k, n) if delta_k else [
        [Fraction(int(i == j)) for j in range(n)] for i in range(n)
    ]
    if k - 1 >= -1 and _cochain_dim(facets, k - 1):
        prev = _coboundary(facets, k - 1)
        boundaries = [list(map(Fraction, col)) for col in zip(*prev)] if prev and prev[0] else []
    else:
        boundaries = []
    span = [b for b in boundaries]
    r = la.rank(span) if span else 0
    basis = []
    for z in cocycles:
        trial = span + [z]
        r2 = la.rank(trial)
        if r2 > r:
            span, r = trial, r2
            basis.append(tuple(z))
    return tuple(basis), tuple(tuple(b) for b in boundaries)


def reduced_cohomology(C: SupportComplex, k: int) -> tuple[int, list[tuple[Fraction, ...]]]:
    """Dimension and pivot-chosen cocycle basis of ``H~^k(C; Q)``."""
    if k < -1:
        return 0, []
    basis, _ = _cohomology(C.facets, k)
    return len(basis), list(basis)


def reduced_cohomology_dim(C: SupportComplex, k: int) -> int:
    return reduced_cohomology(C, k)[0]


@lru_cache(maxsize=None)
def _restriction(big: frozenset, sub: frozenset, k: int) -> tuple[tuple[Fraction, ...], ...]:
    basis_big, _ = _cohomology(big, k)
    basis_sub, bound_sub = _cohomology(sub, k)
    if not basis_big or not basis_sub:
        return tuple(tuple(Fraction(0) for _ in basis_big) for _ in basis_sub)
    if k == -1:
        src_faces = dst_faces = ((),)
    else:
        src_faces = _faces_of(big, k)
        dst_faces = _faces_of(sub, k)
    index = {f: j for j, f in enumerate(src_faces)}
    pick = [index[f] for f in dst_faces]
    # solve [basis_sub | boundaries] x = restricted cocycle
    A = la.transpose([list(b) for b in basis_sub] + [list(b) for b in bound_sub])
    cols = []
    for z in basis_big:
        target = [z[j] for j in pick]
        x = la.solve(A, target)
        if x is None:
            raise ArithmeticError("restricted cocycle is not a cocycle")
        cols.append(x[: len(basis_sub)])
    return tuple(tuple(row) for row in la.transpose(cols))


def induced_restriction(C_big: SupportComplex, C_sub: SupportComplex, k: int) -> list[list[Fraction]]:
    """Matrix of ``H~^k(C_big) -> H~^k(C_sub)`` in the chosen bases."""
    if not C_sub.is_subcomplex_of(C_big):
        raise ValueError("not a subcomplex")
    if k < -1:
        return []
    return [list(row) for row in _restriction(C_big.facets, C_sub.facets, k)]


# ---------------------------------------------------------------------------
# line bundles


def character_box(X: ToricVariety, D: TDivisor | Sequence[int]) -> list[tuple[int, int]]:
    """Integer box containing every chamber vertex, widened by one."""
    coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
    if X.dim == 0:
        return []
    pts = X.chamber_vertices(coeffs)
    if not pts:
        raise FanError("rays do not span the lattice")
    return [(floor(min(p[k] for p in pts)) - 1, ceil(max(p[k] for p in pts)) + 1) for k in range(X.dim)]


def box_points(box: Sequence[tuple[int, int]]):
    return itertools.product(*(range(a, b + 1) for a, b in box))


def double_box(box: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    out = []
    for a, b in box:
        w = b - a + 1
        out.append((a - w, b + w))
    return out


@dataclass
class GradedCohomologyTable:
    degree: int
    divisor: tuple[int, ...]
    dims: dict[tuple[int, ...], int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def to_json(self) -> list[dict]:
        return [{"m": list(m), "dim": d} for m, d in sorted(self.dims.items())]


def line_bundle_cohomology(X: ToricVariety, D: TDivisor | Sequence[int], i: int,
                           box: Sequence[tuple[int, int]] | None = None) -> GradedCohomologyTable:
    coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
    table = GradedCohomologyTable(i, tuple(coeffs))
    if i < 0 or i > X.dim:
        return table
    if box is None:
        box = character_box(X, coeffs)
    for m in box_points(box):
        d = reduced_cohomology_dim(support_complex(X.fan, coeffs, m), i - 1)
        if d:
            table.dims[m] = d
    return table


def cohomology_dims(X: ToricVariety, D: TDivisor | Sequence[int],
                    box: Sequence[tuple[int, int]] | None = None) -> list[int]:
    """``[h^0, ..., h^n]`` of ``O(D)`` in one sweep over the character box."""
    coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
    n = X.dim
    if box is None:
        box = character_box(X, coeffs)
    h = [0] * (n + 1)
    for m in box_points(box):
        C = support_complex(X.fan, coeffs, m)
        for i in range(n + 1):
            h[i] += reduced_cohomology_dim(C, i - 1)
    return h


def euler_characteristic(X: ToricVariety, D) -> int:
    return sum((-1) ** i * h for i, h in enumerate(cohomology_dims(X, D)))
