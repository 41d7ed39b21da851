"""Toric morphisms, pullbacks, preimage subfans and kernel characters."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from . import linalg as la
from .fan import Fan, TDivisor, ToricVariety


class MorphismError(ValueError):
    pass


class ToricMorphism:
    """Toric morphism ``source -> target`` induced by a lattice map.

    ``matrix`` has ``target.dim`` rows and ``source.dim`` columns.
    """

    def __init__(self, target: ToricVariety, source: ToricVariety, matrix: Sequence[Sequence[int]],
                 check: bool = True):
        self.target = target
        self.source = source
        self.matrix: tuple[tuple[int, ...], ...] = tuple(tuple(int(x) for x in row) for row in matrix)
        if len(self.matrix) != target.dim or any(len(row) != source.dim for row in self.matrix):
            raise MorphismError(
                f"matrix must be {target.dim} x {source.dim} to map N_source to N_target"
            )
        if check:
            self._check_compatible()

    def __repr__(self):
        return f"ToricMorphism({self.target!r} <--- {self.source!r}, {[list(r) for r in self.matrix]})"

    def image(self, v: Sequence[int]) -> tuple[int, ...]:
        if not self.matrix:
            return ()
        return tuple(la.matvec(self.matrix, v))

    @cached_property
    def ray_images(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.image(u) for u in self.source.rays)

    def _check_compatible(self):
        for c in self.source.max_cones:
            if self.target_cone_of(c) is None:
                raise MorphismError(f"image of source cone {sorted(c)} lies in no target cone")

    def target_cone_of(self, cone) -> frozenset[int] | None:
        """A maximal target cone containing the image of a source cone."""
        images = [self.ray_images[i] for i in cone]
        for t in self.target.max_cones:
            if all(self.target.fan._in_cone(v, t) for v in images):
                return t
        return None

    @cached_property
    def is_isomorphism(self) -> bool:
        if self.source.dim != self.target.dim or not la.is_unimodular([list(r) for r in self.matrix] or [[1]]):
            return False
        images = set(self.ray_images)
        if images != set(self.target.rays):
            return False
        index = {u: i for i, u in enumerate(self.target.rays)}
        mapped = {frozenset(index[self.ray_images[i]] for i in c) for c in self.source.max_cones}
        return mapped == set(self.target.max_cones)

    def compose(self, other: "ToricMorphism") -> "ToricMorphism":
        """``self o other``."""
        return ToricMorphism(self.target, other.source, la.matmul([list(r) for r in self.matrix],
                                                                  [list(r) for r in other.matrix]))


def make_toric_morphism(target: ToricVariety, source: ToricVariety, matrix) -> ToricMorphism:
    return ToricMorphism(target, source, matrix)


def identity_morphism(X: ToricVariety) -> ToricMorphism:
    return ToricMorphism(X, X, la.identity(X.dim))


def frobenius_morphism(X: ToricVariety, p: int) -> ToricMorphism:
    if p < 1:
        raise ValueError("Frobenius degree must be positive")
    return ToricMorphism(X, X, [[p * x for x in row] for row in la.identity(X.dim)])


def is_fibration(f: ToricMorphism) -> bool:
    """Lattice-surjectivity test; for complete varieties this means connected fibers."""
    A = [list(r) for r in f.matrix]
    if not A:
        return True
    diag = la.smith_diagonal(A)
    return len(diag) == f.target.dim and all(d == 1 for d in diag)


def support_function_character(Y: ToricVariety, E: TDivisor, cone) -> tuple:
    """``m`` with ``<m, u_eta> = -e_eta`` on the rays of a full-dimensional cone."""
    B = Y.fan.ray_matrix(cone)
    m = la.solve(B, [-E.coefficients[i] for i in sorted(cone)])
    if m is None or len(cone) != Y.dim:
        raise MorphismError("support function undefined on a lower-dimensional cone")
    return tuple(m)


def pullback_divisor(f: ToricMorphism, E: TDivisor) -> TDivisor:
    """Pull back a Cartier divisor along ``f`` via its support function."""
    Y = f.target
    if not Y.is_complete:
        raise MorphismError("target is not complete; support function undefined somewhere")
    if Y.dim == 0:
        return f.source.zero_divisor()
    chars = {}
    coeffs = []
    for i, v in enumerate(f.ray_images):
        cone = f.target_cone_of([i])
        if cone not in chars:
            chars[cone] = support_function_character(Y, E, cone)
        value = la.dot(chars[cone], v)
        if value.denominator != 1:
            raise MorphismError("divisor is not Cartier along the image")
        coeffs.append(-int(value))
    return TDivisor(f.source, tuple(coeffs))


def preimage_subfan(f: ToricMorphism, cone) -> Fan:
    """Subfan of source cones mapping into ``cone``; ray indices are unchanged."""
    cone = frozenset(cone)
    if not f.target.fan.contains_cone(cone):
        raise MorphismError(f"{sorted(cone)} is not a cone of the target fan")
    inside = frozenset(i for i, v in enumerate(f.ray_images) if f.target.fan._in_cone(v, cone))
    return Fan(f.source.rays, [c & inside for c in f.source.max_cones], dim=f.source.dim, check=False)


@dataclass(frozen=True)
class KernelCharacterData:
    """Splitting ``M_X = s(M_K) + f^*(M_Y)`` for a fibration.

    ``pullback`` is ``f^*`` (``dim X x dim Y``), ``kernel`` a basis of
    ``N_K = ker f_N`` as columns and ``section`` the splitting ``s`` with
    ``kernel^T @ section = I``.
    """

    pullback: tuple[tuple[int, ...], ...]
    kernel: tuple[tuple[int, ...], ...]
    section: tuple[tuple[int, ...], ...]
    rank: int

    def project(self, m: Sequence[int]) -> tuple[int, ...]:
        """Restriction of a character of ``T_X`` to the kernel torus."""
        if not self.rank:
            return ()
        return tuple(la.dot(col, m) for col in zip(*self.kernel))

    def lift(self, u: Sequence[int]) -> tuple[int, ...]:
        if not self.rank:
            return (0,) * len(self.pullback)
        return tuple(la.matvec([list(r) for r in self.section], u))

    def pull(self, m_prime: Sequence[int]) -> tuple[int, ...]:
        if not m_prime:
            return (0,) * len(self.pullback)
        return tuple(la.matvec([list(r) for r in self.pullback], m_prime))

    def decompose(self, m: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Write ``m = s(u) + f^*(m')`` and return ``(u, m')``."""
        u = self.project(m)
        rest = [a - b for a, b in zip(m, self.lift(u))]
        P = [list(r) for r in self.pullback]
        if not P or not P[0]:
            return u, ()
        sol = la.solve(P, rest)
        if sol is None or any(x.denominator != 1 for x in sol):
            raise MorphismError("character does not decompose over the lattice")
        return u, tuple(int(x) for x in sol)


def kernel_characters(f: ToricMorphism) -> KernelCharacterData:
    if not is_fibration(f):
        raise MorphismError("morphism is not a fibration")
    n = f.source.dim
    A = [list(r) for r in f.matrix]
    K_rows = la.integer_kernel_basis(A, n) if A else la.identity(n)
    k = len(K_rows)
    pullback = tuple(tuple(r) for r in la.transpose(A)) if A else tuple(() for _ in range(n))
    if k == 0:
        return KernelCharacterData(pullback, tuple(() for _ in range(n)), tuple(() for _ in range(n)), 0)
    K = la.transpose(K_rows)
    H, U = la.hermite_normal_form(K)
    if [H[i] for i in range(k)] != la.identity(k):
        raise MorphismError("kernel lattice is not saturated")
    section = la.transpose(U[:k])
    return KernelCharacterData(
        pullback,
        tuple(tuple(r) for r in K),
        tuple(tuple(r) for r in section),
        k,
    )


def fiber_fan(f: ToricMorphism, data: KernelCharacterData | None = None) -> tuple[ToricVariety, list[int]]:
    """Generic fiber of a fibration as a toric variety over ``N_K``, together
    with the source ray indices of its rays."""
    data = data or kernel_characters(f)
    zero_cone = frozenset()
    sub = preimage_subfan(f, zero_cone)
    rays_used = sorted(sub.used_rays)
    K = [list(r) for r in data.kernel]
    coords = []
    for i in rays_used:
        c = la.solve(K, list(f.source.rays[i])) if data.rank else []
        coords.append(tuple(int(x) for x in c))
    index = {i: j for j, i in enumerate(rays_used)}
    cones = [[index[i] for i in c] for c in sub.max_cones]
    return ToricVariety(Fan(coords, cones, dim=data.rank, check=False)), rays_used


def to_json(f: ToricMorphism) -> dict:
    from .fan import to_json as fan_json

    return {"matrix": [list(r) for r in f.matrix], "source": fan_json(f.source), "target": fan_json(f.target)}


def from_json(data: dict) -> ToricMorphism:
    from .fan import from_json as fan_from

    return ToricMorphism(fan_from(data["target"]), fan_from(data["source"]), data["matrix"])
