"""Higher direct images of line bundles along toric fibrations.

Over an affine chart ``U_sigma`` of the target, ``R^i f_* O(D)`` has
sections ``H^i(f^{-1}(U_sigma), O(D))``; the preimage is the toric variety of
the subfan of source cones mapping into ``sigma``.  Global sections of twists
are the kernel of the Čech map between charts and their pairwise overlaps,
computed one character of ``M_X`` at a time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import linalg as la
from .cohomology import (
    box_points,
    character_box,
    double_box,
    cohomology_dims,
    induced_restriction,
    reduced_cohomology_dim,
    restrict_to,
)
from .contractions import nef_cone_rays
from .fan import TDivisor, ToricVariety
from .maps import (
    MorphismError,
    ToricMorphism,
    fiber_fan,
    is_fibration,
    kernel_characters,
    preimage_subfan,
    pullback_divisor,
)

log = logging.getLogger(__name__)

STABILIZATION_CAP = 20
TWIST_BOX_BASE = 11
SPLITTING_RANGE_CAP = 64


class HdiError(ValueError):
    pass


class _Charts:
    """Per-morphism chart data: preimage subfans of target cones."""

    def __init__(self, f: ToricMorphism):
        if not is_fibration(f):
            raise HdiError("morphism is not a fibration")
        self.f = f
        self.kernel = kernel_characters(f)
        Y = f.target
        self.maximal = list(Y.max_cones)
        self.pairs = []
        for a in range(len(self.maximal)):
            for b in range(a + 1, len(self.maximal)):
                self.pairs.append((a, b, self.maximal[a] & self.maximal[b]))
        cones = set(self.maximal) | {t for _, _, t in self.pairs} | {frozenset()}
        self.subfans = {c: preimage_subfan(f, c) for c in cones}
        self.fiber, self.fiber_rays = fiber_fan(f, self.kernel)

    def vertex_set(self, coeffs, m) -> frozenset[int]:
        rays = self.f.source.rays
        return frozenset(i for i, u in enumerate(rays) if la.dot(m, u) < -coeffs[i])

    def complex(self, cone, V):
        return restrict_to(self.subfans[cone], V)

    def global_sections(self, coeffs, m, i, torsion: bool = False) -> tuple[int, int]:
        """Dimensions of ``H^0(Y, R^i f_* O(D))_m`` and of its torsion part."""
        V = self.vertex_set(coeffs, m)
        complexes = [self.complex(c, V) for c in self.maximal]
        dims = [reduced_cohomology_dim(C, i - 1) for C in complexes]
        total = sum(dims)
        if total == 0:
            return 0, 0
        offsets = [sum(dims[:a]) for a in range(len(dims))]
        rows = []
        for a, b, t in self.pairs:
            if not dims[a] and not dims[b]:
                continue
            Ct = self.complex(t, V)
            dt = reduced_cohomology_dim(Ct, i - 1)
            if not dt:
                continue
            Ra = induced_restriction(complexes[a], Ct, i - 1)
            Rb = induced_restriction(complexes[b], Ct, i - 1)
            for r in range(dt):
                row = [Fraction(0)] * total
                for j in range(dims[a]):
                    row[offsets[a] + j] += Ra[r][j]
                for j in range(dims[b]):
                    row[offsets[b] + j] -= Rb[r][j]
                rows.append(row)
        h0 = total - (la.rank(rows) if rows else 0)
        if not torsion or h0 == 0:
            return h0, 0
        C0 = self.complex(frozenset(), V)
        d0 = reduced_cohomology_dim(C0, i - 1)
        extra = []
        if d0:
            for a, C in enumerate(complexes):
                if not dims[a]:
                    continue
                R = induced_restriction(C, C0, i - 1)
                for r in range(d0):
                    row = [Fraction(0)] * total
                    for j in range(dims[a]):
                        row[offsets[a] + j] = R[r][j]
                    extra.append(row)
        all_rows = rows + extra
        tors = total - (la.rank(all_rows) if all_rows else 0)
        return h0, tors

    def chart_dim(self, coeffs, i, cone, m) -> int:
        V = self.vertex_set(coeffs, m)
        return reduced_cohomology_dim(self.complex(frozenset(cone), V), i - 1)


def _charts(f: ToricMorphism) -> _Charts:
    ctx = getattr(f, "_hdi_charts", None)
    if ctx is None:
        ctx = _Charts(f)
        f._hdi_charts = ctx
    return ctx


def _coeffs(D) -> tuple[int, ...]:
    return D.coefficients if isinstance(D, TDivisor) else tuple(D)


# ---------------------------------------------------------------------------
# chart sections and ranks


def chart_sections_dim(f: ToricMorphism, D, i: int, sigma, m: Sequence[int]) -> int:
    """``dim (R^i f_* O(D))(U_sigma)_m``."""
    ctx = _charts(f)
    sigma = frozenset(sigma)
    if sigma not in ctx.maximal:
        raise HdiError(f"{sorted(sigma)} is not a maximal target cone")
    return ctx.chart_dim(_coeffs(D), i, sigma, m)


def _interior_dual(Y: ToricVariety, cone, weights=None) -> tuple[int, ...]:
    """Integer character strictly positive on the rays of a full-dimensional cone."""
    B = Y.fan.ray_matrix(cone)
    w = weights or [1] * len(B)
    m = la.solve(B, [Fraction(x) for x in w])
    return la.integral_vector(m)


def fiber_characters(f: ToricMorphism, D, double: bool = False) -> list[tuple[int, ...]]:
    """Kernel characters whose generic-fiber piece can be nonzero."""
    ctx = _charts(f)
    if ctx.kernel.rank == 0:
        return [()]
    coeffs = _coeffs(D)
    box = character_box(ctx.fiber, [coeffs[j] for j in ctx.fiber_rays])
    return list(box_points(double_box(box) if double else box))


def stabilized_chart_dim(f: ToricMorphism, D, i: int, u: Sequence[int], sigma=None,
                         cap: int = STABILIZATION_CAP) -> int:
    """Chart dimension at ``s(u) + t f^*(m0)`` for ``m0`` interior to ``sigma^vee``
    and ``t`` large.

    Probing starts at the first ``t`` beyond which the support complex on the
    chart no longer changes (a chart dimension can sit at 0 for a while and
    then jump, so agreement of two early values proves nothing).  From there
    ``t`` increases until two consecutive values agree and a second interior
    direction gives the same value.
    """
    ctx = _charts(f)
    Y = f.target
    coeffs = _coeffs(D)
    sigma = frozenset(sigma) if sigma is not None else ctx.maximal[0]
    if Y.dim == 0:
        return ctx.chart_dim(coeffs, i, sigma, ctx.kernel.lift(u))
    base = ctx.kernel.lift(u)
    rays = f.source.rays
    chart_rays = ctx.subfans[sigma].used_rays

    def start(direction):
        t0 = 0
        for j in chart_rays:
            slope = la.dot(direction, rays[j])
            if slope > 0:
                need = -coeffs[j] - la.dot(base, rays[j])
                t0 = max(t0, -(-need // slope))
        return t0

    def value(direction, t):
        m = tuple(b + t * x for b, x in zip(base, direction))
        return ctx.chart_dim(coeffs, i, sigma, m)

    d0 = ctx.kernel.pull(_interior_dual(Y, sigma))
    d1 = ctx.kernel.pull(_interior_dual(Y, sigma, list(range(1, Y.dim + 1))))
    t0, t1 = start(d0), start(d1)
    prev = value(d0, t0)
    for step in range(1, cap + 1):
        cur = value(d0, t0 + step)
        if cur == prev and value(d1, t1 + step) == cur:
            return cur
        prev = cur
    raise HdiError("stabilization cap exceeded")


def hdi_rank(f: ToricMorphism, i: int, D, cap: int = STABILIZATION_CAP, double: bool = False) -> int:
    """Generic rank of ``R^i f_* O(D)``, summed over kernel characters."""
    if i < 0 or i > f.source.dim:
        return 0
    return sum(stabilized_chart_dim(f, D, i, u, cap=cap) for u in fiber_characters(f, D, double))


def generic_rank(f: ToricMorphism, i: int, D) -> int:
    """Rank read off the torus chart directly (the fiber's cohomology)."""
    ctx = _charts(f)
    coeffs = _coeffs(D)
    return sum(
        ctx.chart_dim(coeffs, i, frozenset(), ctx.kernel.lift(u)) for u in fiber_characters(f, D)
    )


# ---------------------------------------------------------------------------
# twist tables


@dataclass
class TwistTable:
    """``d -> h^0(Y, R^i f_* O(D) (x) O(d))`` together with its torsion part and
    its split over kernel characters."""

    degree: int
    divisor: tuple[int, ...]
    values: dict[tuple[int, ...], int] = field(default_factory=dict)
    torsion: dict[tuple[int, ...], int] = field(default_factory=dict)
    by_eigencharacter: dict[tuple[int, ...], dict[tuple[int, ...], int]] = field(default_factory=dict)

    def __getitem__(self, d):
        return self.values[tuple(d)]

    def to_json(self) -> list[dict]:
        return [{"class": list(d), "h0": h} for d, h in sorted(self.values.items())]


def twist_divisor(f: ToricMorphism, D, d: Sequence[int], representative: TDivisor | None = None) -> tuple[int, ...]:
    """``D + f^*E`` for a divisor ``E`` of class ``d`` on the target."""
    E = representative if representative is not None else f.target.lift(d)
    if tuple(f.target.class_of(E)) != tuple(d):
        raise HdiError("representative does not have the requested class")
    pulled = pullback_divisor(f, E)
    return tuple(a + b for a, b in zip(_coeffs(D), pulled.coefficients))


def twist_sections(f: ToricMorphism, i: int, D, d: Sequence[int], torsion: bool = False,
                   representative: TDivisor | None = None, double: bool = False):
    """``(h0, torsion h0, per-kernel-character h0)`` for one twist class.

    ``double`` sweeps a box twice as wide, for checking the box bound.
    """
    ctx = _charts(f)
    coeffs = twist_divisor(f, D, d, representative)
    h0 = tors = 0
    by_u: dict[tuple[int, ...], int] = {}
    if i < 0 or i > f.source.dim:
        return 0, 0, by_u
    box = character_box(f.source, coeffs)
    for m in box_points(double_box(box) if double else box):
        a, b = ctx.global_sections(coeffs, m, i, torsion=torsion)
        if a:
            h0 += a
            tors += b
            u = ctx.kernel.project(m)
            by_u[u] = by_u.get(u, 0) + a
    return h0, tors, by_u


def hdi_twist_table(f: ToricMorphism, i: int, D, classes: Iterable[Sequence[int]],
                    torsion: bool = False, max_entries: int | None = None) -> TwistTable:
    classes = [tuple(c) for c in classes]
    limit = max_entries if max_entries is not None else TWIST_BOX_BASE ** max(1, f.target.class_group_rank)
    if len(classes) > limit:
        raise HdiError("twist box exceeds limit")
    table = TwistTable(i, _coeffs(D))
    for d in classes:
        h0, tors, by_u = twist_sections(f, i, D, d, torsion=torsion)
        table.values[d] = h0
        table.torsion[d] = tors
        for u, v in by_u.items():
            table.by_eigencharacter.setdefault(u, {})[d] = v
    for u in table.by_eigencharacter:
        for d in classes:
            table.by_eigencharacter[u].setdefault(d, 0)
    return table


def ample_class(Y: ToricVariety) -> tuple[int, ...]:
    """Sum of the extremal nef rays, an ample class on a projective toric variety."""
    rays = nef_cone_rays(Y)
    if not rays:
        return ()
    return tuple(sum(r[k] for r in rays) for k in range(len(rays[0])))


# ---------------------------------------------------------------------------
# eigencharacters


@dataclass
class EigencharacterEntry:
    character: tuple[int, ...]
    representative: tuple[int, ...]
    shifted_divisor: tuple[int, ...]
    generic_rank: int
    chart_ranks: dict[tuple[int, ...], int]
    probe_sections: dict[tuple[int, ...], int]


@dataclass
class EigencharacterTable:
    """Kernel characters carrying a nonzero eigensheaf of ``R^i f_* O(D)``.

    Keys are characters of the kernel torus; ``representative`` is the same
    character as a vector of ``M_X`` via the chosen splitting.
    """

    degree: int
    divisor: tuple[int, ...]
    entries: dict[tuple[int, ...], EigencharacterEntry] = field(default_factory=dict)

    def keys(self) -> list[tuple[int, ...]]:
        return sorted(self.entries)

    def representatives(self) -> list[tuple[int, ...]]:
        return [self.entries[k].representative for k in self.keys()]

    def __len__(self):
        return len(self.entries)


def compute_eigencharacters(f: ToricMorphism, i: int, D, max_probe: int = 8) -> EigencharacterTable:
    """Kernel characters of nonzero eigensheaves.

    A character is kept when the generic fiber sees it or when some twist
    ``k * A`` (``A`` ample on the target) has sections in that eigenspace;
    twists are probed until the key set is stable twice in a row.
    """
    ctx = _charts(f)
    coeffs = _coeffs(D)
    table = EigencharacterTable(i, coeffs)
    if i < 0 or i > f.source.dim:
        return table
    generic = {}
    for u in fiber_characters(f, D):
        r = stabilized_chart_dim(f, D, i, u)
        if r:
            generic[u] = r
    A = ample_class(f.target)
    probes: dict[tuple[int, ...], dict[tuple[int, ...], int]] = {}
    keys = set(generic)
    stable = 0
    for k in range(max_probe + 1):
        d = tuple(k * a for a in A)
        _, _, by_u = twist_sections(f, i, D, d)
        for u, v in by_u.items():
            probes.setdefault(u, {})[d] = v
        new = keys | set(by_u)
        stable = stable + 1 if new == keys and k >= 1 else 0
        keys = new
        if stable >= 2:
            break
    for u in sorted(keys):
        rep = ctx.kernel.lift(u)
        shifted = tuple(a + la.dot(rep, r) for a, r in zip(coeffs, f.source.rays))
        charts = {}
        for c in ctx.maximal:
            charts[tuple(sorted(c))] = stabilized_chart_dim(f, D, i, u, sigma=c) if u in generic else 0
        table.entries[u] = EigencharacterEntry(
            u, rep, shifted, generic.get(u, 0), charts, probes.get(u, {})
        )
    return table


# ---------------------------------------------------------------------------
# P^1 base: splitting types, Leray and relative duality


@dataclass
class SplittingType:
    degrees: tuple[int, ...]
    torsion: int

    def h0(self, d: int) -> int:
        return sum(max(0, a + d + 1) for a in self.degrees) + self.torsion

    def h1(self, d: int = 0) -> int:
        return sum(max(0, -a - d - 1) for a in self.degrees)


def _is_p1(Y: ToricVariety) -> bool:
    return Y.dim == 1 and sorted(Y.rays) == [(-1,), (1,)]


def splitting_type_over_p1(f: ToricMorphism, i: int, D) -> SplittingType:
    if not _is_p1(f.target):
        raise HdiError("target is not the projective line")
    r = hdi_rank(f, i, D)
    cache: dict[int, int] = {}

    def h(d):
        if d not in cache:
            cache[d] = twist_sections(f, i, D, (d,))[0]
        return cache[d]

    lo, hi = -4, 4
    while True:
        low_ok = h(lo) == h(lo + 1)
        high_ok = h(hi) - h(hi - 1) == r
        if low_ok and high_ok:
            break
        if max(-lo, hi) > SPLITTING_RANGE_CAP:
            raise HdiError("not a sum of line bundles plus finite torsion")
        if not low_ok:
            lo *= 2
        if not high_ok:
            hi *= 2
    torsion = h(lo)
    degrees = []
    prev = 0
    for d in range(lo + 1, hi + 1):
        delta = h(d) - h(d - 1)
        count = delta - prev
        if count < 0:
            raise HdiError("not a sum of line bundles plus finite torsion")
        degrees.extend([-d] * count)
        prev = delta
    result = SplittingType(tuple(sorted(degrees, reverse=True)), torsion)
    if len(degrees) != r or any(result.h0(d) != h(d) for d in range(lo, hi + 1)):
        raise HdiError("not a sum of line bundles plus finite torsion")
    return result


def _growth_degree(values: Sequence[int], window: int = 4) -> int | None:
    """Degree of the polynomial matching the tail of ``values``; ``None`` if all zero."""
    if not any(values):
        return None
    seq = list(values)
    for j in range(len(seq)):
        tail = seq[-window:]
        if len(tail) >= 2 and len(set(tail)) == 1:
            return j if tail[0] != 0 else j - 1
        seq = [b - a for a, b in zip(seq, seq[1:])]
        if len(seq) < 2:
            break
    raise HdiError("torsion growth not polynomial on the probed range")


@dataclass
class TorsionProfile:
    rank: int
    ks: list[int]
    sections: list[int]
    torsion_sections: list[int]
    growth_degree: int | None

    @property
    def has_torsion(self) -> bool:
        return any(self.torsion_sections)


def torsion_profile(f: ToricMorphism, i: int, D, ample: Sequence[int] | None = None,
                    ks: Iterable[int] = range(0, 8)) -> TorsionProfile:
    """Torsion sections of ``R^i f_* O(D)(k A)`` for ``k`` in ``ks``.

    A global section is torsion exactly when it dies on the dense torus
    chart; the growth degree of their count is the dimension of the torsion
    support.
    """
    ks = list(ks)
    A = tuple(ample) if ample is not None else ample_class(f.target)
    secs, tors = [], []
    for k in ks:
        h0, t, _ = twist_sections(f, i, D, tuple(k * a for a in A), torsion=True)
        secs.append(h0)
        tors.append(t)
    return TorsionProfile(hdi_rank(f, i, D), ks, secs, tors, _growth_degree(tors))


def fiber_dimension(f: ToricMorphism) -> int:
    return f.source.dim - f.target.dim


def leray_check_over_p1(f: ToricMorphism, D, details: bool = False):
    """Compare ``h^k(X, O(D))`` with ``h^0(R^k) + h^1(R^{k-1})`` on ``P^1``."""
    lhs = cohomology_dims(f.source, _coeffs(D))
    split = [splitting_type_over_p1(f, q, D) for q in range(fiber_dimension(f) + 1)]
    rhs = []
    for k in range(f.source.dim + 1):
        v = 0
        if k < len(split):
            v += split[k].h0(0)
        if 0 <= k - 1 < len(split):
            v += split[k - 1].h1(0)
        rhs.append(v)
    ok = lhs == rhs
    return (ok, lhs, rhs) if details else ok


def relative_duality_check_over_p1(f: ToricMorphism, D, details: bool = False):
    """``R^1 f_* L`` against the dual of ``f_*(L^vee (x) omega_{X/Y})``."""
    if not _is_p1(f.target) or f.source.dim != 2:
        raise HdiError("relative duality check needs a surface over the projective line")
    X = f.source
    coeffs = _coeffs(D)
    KY = pullback_divisor(f, f.target.canonical_divisor())
    dual = tuple(-1 - k - a for k, a in zip(KY.coefficients, coeffs))
    top = splitting_type_over_p1(f, 1, coeffs)
    bottom = splitting_type_over_p1(f, 0, dual)
    if top.torsion or bottom.torsion:
        raise HdiError("duality check requires locally free images")
    ok = sorted(top.degrees) == sorted(-a for a in bottom.degrees)
    return (ok, top, bottom) if details else ok
