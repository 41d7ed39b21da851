"""Simplicial fans, toric varieties, torus-invariant divisors and class groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor
from typing import Iterable, Iterator, Sequence

from . import linalg as la


class FanError(ValueError):
    pass


def _faces(cone: frozenset[int]) -> Iterator[frozenset[int]]:
    items = sorted(cone)
    for k in range(len(items) + 1):
        for sub in itertools.combinations(items, k):
            yield frozenset(sub)


def _inequality_description(rays: list[tuple[int, ...]], n: int):
    """Equalities ``W x = 0`` and inequalities ``L x >= 0`` cutting out the
    simplicial cone generated by linearly independent ``rays``."""
    if not rays:
        return la.to_fractions(la.identity(n)), []
    W = la.kernel_vectors(rays, n)
    gram = la.matmul(rays, la.transpose(rays))
    L = la.matmul(la.inverse(gram), la.to_fractions(rays))
    return W, L


def _extreme_rays(equalities, inequalities, n: int) -> list[list[Fraction]]:
    """Extreme rays of the pointed cone ``{E x = 0, I x >= 0}`` by brute force."""
    found = []
    for k in range(len(inequalities) + 1):
        if k > n - 1:
            break
        for subset in itertools.combinations(range(len(inequalities)), k):
            system = list(equalities) + [inequalities[i] for i in subset]
            kernel = la.kernel_vectors(system, n) if system else la.kernel_vectors([], n)
            if len(kernel) != 1:
                continue
            v = kernel[0]
            for sign in (1, -1):
                w = [sign * x for x in v]
                if all(la.dot(row, w) >= 0 for row in inequalities):
                    prim = la.integral_vector(w)
                    if prim not in found:
                        found.append(prim)
    return found


class Fan:
    """A simplicial fan given by primitive ray generators and maximal cones.

    Cones are frozensets of ray indices.  With ``check=False`` the fan may
    leave some rays unused, which is how subfans of a bigger fan are stored
    so that ray indices stay aligned with the ambient fan.
    """

    def __init__(self, rays: Sequence[Sequence[int]], max_cones: Iterable[Iterable[int]],
                 dim: int | None = None, check: bool = True):
        self.rays: tuple[tuple[int, ...], ...] = tuple(tuple(int(x) for x in r) for r in rays)
        if dim is None:
            if not self.rays:
                raise FanError("dimension required for a fan without rays")
            dim = len(self.rays[0])
        self.dim = dim
        cones = {frozenset(int(i) for i in c) for c in max_cones}
        # keep only inclusion-maximal cones, in a canonical order
        maximal = [c for c in cones if not any(c < d for d in cones)]
        self.max_cones: tuple[frozenset[int], ...] = tuple(sorted(maximal, key=lambda c: (sorted(c), len(c))))
        if check:
            self._validate()

    def __repr__(self):
        cones = [sorted(c) for c in self.max_cones]
        return f"Fan(rays={[list(r) for r in self.rays]}, max_cones={cones})"

    def __eq__(self, other):
        return isinstance(other, Fan) and (self.dim, self.rays, self.max_cones) == (other.dim, other.rays, other.max_cones)

    def __hash__(self):
        return hash((self.dim, self.rays, self.max_cones))

    def _validate(self):
        n = self.dim
        for r in self.rays:
            if len(r) != n:
                raise FanError(f"ray {list(r)} does not have length {n}")
            if not any(r):
                raise FanError("zero vector is not a ray")
            if la.primitive_vector(r) != r:
                raise FanError(f"ray {list(r)} is not primitive")
        if len(set(self.rays)) != len(self.rays):
            raise FanError("rays are not distinct")
        used = set().union(*self.max_cones) if self.max_cones else set()
        for c in self.max_cones:
            for i in c:
                if not 0 <= i < len(self.rays):
                    raise FanError(f"cone {sorted(c)} refers to missing ray {i}")
        if used != set(range(len(self.rays))):
            missing = sorted(set(range(len(self.rays))) - used)
            raise FanError(f"rays {missing} lie in no maximal cone")
        for c in self.max_cones:
            if la.rank(self.ray_matrix(c)) != len(c):
                raise FanError(f"cone {sorted(c)} is not simplicial")
        self._check_intersections()

    def _check_intersections(self):
        n = self.dim
        descr = {c: _inequality_description(self.ray_matrix(c), n) for c in self.max_cones}
        for a, b in itertools.combinations(self.max_cones, 2):
            common = a & b
            Wa, La = descr[a]
            Wb, Lb = descr[b]
            for v in _extreme_rays(Wa + Wb, La + Lb, n):
                if not self._in_cone(v, common):
                    raise FanError(f"cones {sorted(a)} and {sorted(b)} do not meet in a common face")

    def _in_cone(self, v: Sequence, cone: Iterable[int]) -> bool:
        cone = sorted(cone)
        if not cone:
            return not any(v)
        B = self.ray_matrix(cone)
        r = la.rank(B)
        # Caratheodory: v lies in the cone iff it lies in a simplicial subcone
        subsets = [cone] if r == len(cone) else itertools.combinations(cone, r)
        for sub in subsets:
            Bs = self.ray_matrix(sub)
            if len(sub) != len(cone) and la.rank(Bs) != r:
                continue
            coords = la.solve(la.transpose(Bs), list(v))
            if coords is not None and all(c >= 0 for c in coords):
                return True
        return False

    def ray_matrix(self, cone: Iterable[int] | None = None) -> list[list[int]]:
        idx = range(len(self.rays)) if cone is None else sorted(cone)
        return [list(self.rays[i]) for i in idx]

    @cached_property
    def cones(self) -> tuple[frozenset[int], ...]:
        """Every cone of the fan (faces of maximal cones), smallest first."""
        out = set()
        for c in self.max_cones:
            out.update(_faces(c))
        return tuple(sorted(out, key=lambda c: (len(c), sorted(c))))

    def cones_of_dim(self, k: int) -> list[frozenset[int]]:
        return [c for c in self.cones if len(c) == k]

    def contains_cone(self, cone: Iterable[int]) -> bool:
        cone = frozenset(cone)
        return any(cone <= c for c in self.max_cones)

    def cone_containing(self, v: Sequence[int]) -> frozenset[int] | None:
        """Smallest cone of the fan containing the vector ``v``."""
        for c in self.cones:
            if self._in_cone(v, c):
                return c
        return None

    @cached_property
    def used_rays(self) -> frozenset[int]:
        return frozenset().union(*self.max_cones) if self.max_cones else frozenset()


@dataclass(frozen=True, eq=False)
class ToricVariety:
    """Toric variety of a simplicial fan, with its class group data."""

    fan: Fan
    name: str = field(default="", compare=False)

    def __eq__(self, other):
        return isinstance(other, ToricVariety) and self.fan == other.fan

    def __hash__(self):
        return hash(self.fan)

    def __repr__(self):
        return f"ToricVariety({self.name or self.fan!r})"

    @property
    def dim(self) -> int:
        return self.fan.dim

    @property
    def rays(self):
        return self.fan.rays

    @property
    def n_rays(self) -> int:
        return len(self.fan.rays)

    @property
    def max_cones(self):
        return self.fan.max_cones

    # -- class group -------------------------------------------------------

    @cached_property
    def _class_data(self):
        r, n = self.n_rays, self.dim
        principal = la.transpose(self.fan.ray_matrix()) if r else []
        if n == 0 or r == 0:
            return {"kind": "free", "proj": la.identity(r), "lift": la.identity(r), "torsion": []}
        H, _ = la.hermite_normal_form(principal)
        pivots = la.hnf_pivots(H)
        if len(pivots) == n and all(H[k][p] == 1 for k, p in enumerate(pivots)):
            free = [j for j in range(r) if j not in pivots]
            proj = la.zeros(len(free), r)
            for b, j in enumerate(free):
                proj[b][j] = 1
            for k, p in enumerate(pivots):
                for b, j in enumerate(free):
                    proj[b][p] = -H[k][j]
            lift = la.zeros(r, len(free))
            for b, j in enumerate(free):
                lift[j][b] = 1
            return {"kind": "free", "proj": proj, "lift": lift, "torsion": []}
        S, _, Q = la.smith_normal_form(principal)
        diag = [S[i][i] for i in range(min(len(S), r))]
        k = sum(1 for d in diag if d)
        torsion = [(i, d) for i, d in enumerate(diag) if d > 1]
        keep = [i for i, _ in torsion] + list(range(k, r))
        proj = [[Q[row][i] for row in range(r)] for i in keep]
        Qinv = [[int(x) for x in row] for row in la.inverse(Q)]
        lift = [[Qinv[i][j] for i in keep] for j in range(r)]
        return {"kind": "snf", "proj": proj, "lift": lift, "torsion": [d for _, d in torsion]}

    @property
    def class_group_projection(self) -> list[list[int]]:
        """Integer matrix taking divisor coefficients to class coordinates."""
        return self._class_data["proj"]

    @property
    def class_group_rank(self) -> int:
        return len(self._class_data["proj"]) - len(self._class_data["torsion"])

    @property
    def class_group_torsion(self) -> list[int]:
        return list(self._class_data["torsion"])

    def class_of(self, D: "TDivisor | Sequence[int]") -> tuple[int, ...]:
        coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
        if len(coeffs) != self.n_rays:
            raise ValueError("divisor length does not match the number of rays")
        c = la.matvec(self._class_data["proj"], coeffs)
        t = self._class_data["torsion"]
        return tuple([x % d for x, d in zip(c, t)] + c[len(t):])

    def lift(self, cls: Sequence[int]) -> "TDivisor":
        """Canonical divisor representative of a class."""
        L = self._class_data["lift"]
        return TDivisor(self, tuple(int(x) for x in la.matvec(L, cls)) if L else ())

    def divisor(self, coeffs: Sequence[int]) -> "TDivisor":
        return TDivisor(self, tuple(int(a) for a in coeffs))

    def principal_divisor(self, m: Sequence[int]) -> "TDivisor":
        return TDivisor(self, tuple(la.dot(m, u) for u in self.rays))

    def canonical_divisor(self) -> "TDivisor":
        return TDivisor(self, (-1,) * self.n_rays)

    def zero_divisor(self) -> "TDivisor":
        return TDivisor(self, (0,) * self.n_rays)

    def torus_invariant_prime(self, i: int) -> "TDivisor":
        return TDivisor(self, tuple(int(j == i) for j in range(self.n_rays)))

    # -- geometry ----------------------------------------------------------

    @cached_property
    def is_smooth(self) -> bool:
        for c in self.max_cones:
            if not c:
                continue
            if la.smith_diagonal(self.fan.ray_matrix(c)) != [1] * len(c):
                return False
        return True

    @cached_property
    def is_complete(self) -> bool:
        n = self.dim
        if n == 0:
            return True
        if any(len(c) != n for c in self.max_cones):
            return False
        count: dict[frozenset[int], int] = {}
        for c in self.max_cones:
            for i in c:
                facet = c - {i}
                count[facet] = count.get(facet, 0) + 1
        return all(v == 2 for v in count.values())

    @cached_property
    def _chamber_solvers(self):
        """Inverse matrices for every linearly independent n-subset of rays."""
        n = self.dim
        out = []
        for subset in itertools.combinations(range(self.n_rays), n):
            B = [list(self.rays[i]) for i in subset]
            if la.determinant(B) != 0:
                out.append((subset, la.inverse(B)))
        return out

    def chamber_vertices(self, coeffs: Sequence[int]) -> list[list[Fraction]]:
        """Points with ``<m, u_rho> = -a_rho`` for n independent rays."""
        pts = []
        for subset, Binv in self._chamber_solvers:
            rhs = [-coeffs[i] for i in subset]
            pts.append(la.matvec(Binv, rhs))
        return pts

    def divisor_polytope_vertices(self, D: "TDivisor") -> list[tuple[frozenset[int], tuple[Fraction, ...]]]:
        """For each maximal cone the character ``m_sigma`` cut out by the cone's rays.

        For a nef divisor these are exactly the vertices of its polytope.
        """
        out = []
        for c in self.max_cones:
            B = self.fan.ray_matrix(c)
            if len(c) != self.dim or la.determinant(B) == 0:
                raise FanError(f"maximal cone {sorted(c)} is not full-dimensional simplicial")
            if abs(la.determinant(B)) != 1:
                raise FanError(f"maximal cone {sorted(c)} is singular")
            m = la.solve(B, [-D.coefficients[i] for i in sorted(c)])
            out.append((c, tuple(m)))
        return out

    def polytope_box(self, coeffs: Sequence[int]) -> list[tuple[int, int]] | None:
        """Integer bounding box of all chamber vertices, or ``None`` if none exist."""
        pts = self.chamber_vertices(coeffs)
        if not pts:
            return None
        return [(floor(min(p[k] for p in pts)), ceil(max(p[k] for p in pts))) for k in range(self.dim)]

    def lattice_points(self, D: "TDivisor | Sequence[int]") -> list[tuple[int, ...]]:
        """Characters ``m`` with ``<m, u_rho> >= -a_rho`` for every ray."""
        coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
        if self.dim == 0:
            return [()]
        box = self.polytope_box(coeffs)
        if box is None:
            raise FanError("rays do not span the lattice")
        return list(points_in_box(self.rays, [-a for a in coeffs], box))

    def count_lattice_points(self, D: "TDivisor | Sequence[int]") -> int:
        coeffs = D.coefficients if isinstance(D, TDivisor) else tuple(D)
        if self.dim == 0:
            return 1
        box = self.polytope_box(coeffs)
        return sum(1 for _ in points_in_box(self.rays, [-a for a in coeffs], box))


def points_in_box(rays, lower: Sequence[int], box: Sequence[tuple[int, int]]) -> Iterator[tuple[int, ...]]:
    """Integer points ``m`` in ``box`` with ``<m, u_i> >= lower[i]`` for all rays.

    The last coordinate is solved as an interval instead of being scanned.
    """
    n = len(box)
    head_ranges = [range(a, b + 1) for a, b in box[:-1]]
    zlo, zhi = box[-1]
    for head in itertools.product(*head_ranges):
        lo, hi = zlo, zhi
        ok = True
        for u, bound in zip(rays, lower):
            need = bound - sum(h * x for h, x in zip(head, u))
            c = u[n - 1]
            if c > 0:
                lo = max(lo, -((-need) // c))
            elif c < 0:
                hi = min(hi, (-need) // (-c))
            elif need > 0:
                ok = False
                break
        if not ok:
            continue
        for z in range(lo, hi + 1):
            yield head + (z,)


@dataclass(frozen=True)
class TDivisor:
    """Torus-invariant Weil divisor ``sum a_rho D_rho`` in ray order."""

    variety: ToricVariety
    coefficients: tuple[int, ...]

    def __post_init__(self):
        if len(self.coefficients) != self.variety.n_rays:
            raise ValueError(
                f"divisor has {len(self.coefficients)} coefficients, variety has {self.variety.n_rays} rays"
            )

    def __add__(self, other: "TDivisor") -> "TDivisor":
        return TDivisor(self.variety, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "TDivisor") -> "TDivisor":
        return TDivisor(self.variety, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> "TDivisor":
        return TDivisor(self.variety, tuple(-a for a in self.coefficients))

    def __mul__(self, k: int) -> "TDivisor":
        return TDivisor(self.variety, tuple(k * a for a in self.coefficients))

    __rmul__ = __mul__

    def __iter__(self):
        return iter(self.coefficients)

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, i):
        return self.coefficients[i]

    def __repr__(self):
        return f"TDivisor({list(self.coefficients)})"

    @property
    def divisor_class(self) -> tuple[int, ...]:
        return self.variety.class_of(self)


# ---------------------------------------------------------------------------
# builders


def projective_space(n: int) -> ToricVariety:
    if n < 1:
        raise ValueError("projective space needs n >= 1")
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    cones = [c for c in itertools.combinations(range(n + 1), n)]
    return ToricVariety(Fan(rays, cones), name=f"P{n}")


def hirzebruch_surface(a: int) -> ToricVariety:
    if a < 0:
        raise ValueError("Hirzebruch surface needs a >= 0")
    rays = [(1, 0), (0, 1), (-1, a), (0, -1)]
    cones = [(0, 1), (1, 2), (2, 3), (3, 0)]
    return ToricVariety(Fan(rays, cones), name=f"F{a}")


def point() -> ToricVariety:
    return ToricVariety(Fan([], [()], dim=0), name="pt")


def product_variety(X: ToricVariety, Y: ToricVariety) -> ToricVariety:
    n, k = X.dim, Y.dim
    rays = [tuple(u) + (0,) * k for u in X.rays] + [(0,) * n + tuple(v) for v in Y.rays]
    shift = X.n_rays
    cones = [set(c) | {shift + j for j in d} for c in X.max_cones for d in Y.max_cones]
    name = f"{X.name}x{Y.name}" if X.name and Y.name else ""
    return ToricVariety(Fan(rays, cones, dim=n + k), name=name)


def star_subdivision(X: ToricVariety, ray_indices: Iterable[int]) -> ToricVariety:
    """Blow up the orbit closure of a cone by star subdivision; new ray appended last."""
    S = frozenset(ray_indices)
    if not X.fan.contains_cone(S) or not S:
        raise FanError("not a face of the fan")
    if len(S) == 1:
        raise FanError("already a ray")
    new = la.primitive_vector([sum(X.rays[i][k] for i in S) for k in range(X.dim)])
    new_index = X.n_rays
    cones = []
    for c in X.max_cones:
        if S <= c:
            for s in sorted(S):
                cones.append((c - {s}) | {new_index})
        else:
            cones.append(c)
    return ToricVariety(Fan(list(X.rays) + [new], cones, dim=X.dim), name=f"Bl{X.name}" if X.name else "")


def from_json(data: dict) -> ToricVariety:
    rays = data["rays"]
    dim = data.get("dim")
    return ToricVariety(Fan(rays, data["maxCones"], dim=dim))


def to_json(X: ToricVariety) -> dict:
    return {
        "rays": [list(r) for r in X.rays],
        "maxCones": [sorted(c) for c in X.max_cones],
    }
