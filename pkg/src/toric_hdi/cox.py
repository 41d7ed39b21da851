"""Multigraded modules over the Cox ring: graded pieces and Hilbert functions.

Polynomials are dicts ``{exponent tuple: Fraction}`` with one exponent per ray.
A free module generator of degree ``g`` stands for ``S(-g)``, the Cox-ring
counterpart of ``O(-g)``, so its degree-``d`` piece is ``S_{d-g}``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg as la
from .fan import ToricVariety

Poly = dict


class CoxError(ValueError):
    pass


def monomial(exponents: Sequence[int], coefficient=1) -> Poly:
    if any(e < 0 for e in exponents):
        raise CoxError("monomial exponents must be nonnegative")
    return {tuple(exponents): Fraction(coefficient)}


def poly(terms: Mapping[Sequence[int], object] | Iterable[tuple[Sequence[int], object]]) -> Poly:
    items = terms.items() if isinstance(terms, Mapping) else terms
    out: Poly = {}
    for e, c in items:
        e = tuple(int(x) for x in e)
        if any(x < 0 for x in e):
            raise CoxError("monomial exponents must be nonnegative")
        out[e] = out.get(e, Fraction(0)) + Fraction(c)
    return {e: c for e, c in out.items() if c}


def poly_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, Fraction(0)) + c
    return {e: c for e, c in out.items() if c}


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return {e: c for e, c in out.items() if c}


def poly_eval(p: Poly, point: Sequence) -> Fraction:
    total = Fraction(0)
    for e, c in p.items():
        term = c
        for x, k in zip(point, e):
            if k:
                term *= Fraction(x) ** k
        total += term
    return total


def poly_classes(X: ToricVariety, p: Poly) -> set[tuple[int, ...]]:
    return {X.class_of(e) for e in p}


def format_poly(p: Poly, names: Sequence[str] | None = None) -> str:
    if not p:
        return "0"
    parts = []
    for e in sorted(p, reverse=True):
        c = p[e]
        names_ = names or [f"x{i}" for i in range(len(e))]
        mono = "".join(f"{names_[i]}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def poly_to_json(p: Poly) -> list[dict]:
    return [{"coefficient": str(c), "exponents": list(e)} for e, c in sorted(p.items())]


def poly_from_json(data: Sequence[Mapping]) -> Poly:
    return poly((t["exponents"], Fraction(t["coefficient"])) for t in data)


# ---------------------------------------------------------------------------
# modules


@dataclass(frozen=True)
class FreeMultigradedModule:
    """``(+)_j S(-g_j)``; ``divisors[j]`` optionally fixes a divisor of class ``-g_j``."""

    variety: ToricVariety
    degrees: tuple[tuple[int, ...], ...]
    divisors: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(tuple(int(x) for x in g) for g in self.degrees))
        if self.divisors is not None:
            divs = tuple(tuple(int(a) for a in D) for D in self.divisors)
            object.__setattr__(self, "divisors", divs)
            for g, D in zip(self.degrees, divs):
                if self.variety.class_of(D) != tuple(-x for x in g):
                    raise CoxError("divisor representative does not match generator degree")

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def divisor(self, j: int) -> tuple[int, ...]:
        if self.divisors is not None:
            return self.divisors[j]
        return self.variety.lift([-x for x in self.degrees[j]]).coefficients

    def direct_sum(self, other: "FreeMultigradedModule") -> "FreeMultigradedModule":
        divs = None
        if self.divisors is not None and other.divisors is not None:
            divs = self.divisors + other.divisors
        return FreeMultigradedModule(self.variety, self.degrees + other.degrees, divs)


def free_module_from_divisors(X: ToricVariety, divisors: Sequence[Sequence[int]]) -> FreeMultigradedModule:
    """``(+) O(D_j)`` as a free Cox module."""
    degrees = tuple(tuple(-x for x in X.class_of(D)) for D in divisors)
    return FreeMultigradedModule(X, degrees, tuple(tuple(D) for D in divisors))


@dataclass
class PresentedModule:
    """Cokernel of ``matrix: source -> target``; ``matrix[r][c]`` maps generator
    ``c`` of the source into row ``r`` of the target."""

    target: FreeMultigradedModule
    source: FreeMultigradedModule
    matrix: list[list[Poly]] = field(default_factory=list)

    def __post_init__(self):
        X = self.target.variety
        if not self.matrix:
            self.matrix = [[{} for _ in range(self.source.rank)] for _ in range(self.target.rank)]
        if len(self.matrix) != self.target.rank or any(len(r) != self.source.rank for r in self.matrix):
            raise CoxError("matrix shape does not match the free modules")
        for r, row in enumerate(self.matrix):
            for c, entry in enumerate(row):
                want = tuple(a - b for a, b in zip(self.source.degrees[c], self.target.degrees[r]))
                for e in entry:
                    if len(e) != X.n_rays:
                        raise CoxError("exponent vector length does not match the number of rays")
                    if X.class_of(e) != want:
                        raise CoxError(f"entry ({r}, {c}) is not homogeneous of degree {list(want)}")

    @property
    def variety(self) -> ToricVariety:
        return self.target.variety

    def direct_sum(self, other: "PresentedModule") -> "PresentedModule":
        rows = [row + [{} for _ in range(other.source.rank)] for row in self.matrix]
        rows += [[{} for _ in range(self.source.rank)] + row for row in other.matrix]
        return PresentedModule(self.target.direct_sum(other.target), self.source.direct_sum(other.source), rows)

    def compose(self, other: "PresentedModule") -> list[list[Poly]]:
        """Matrix of ``self o other`` (``other.target`` must be ``self.source``)."""
        return matrix_product(self.matrix, other.matrix, self.source.rank)

    def to_json(self) -> dict:
        return {
            "target": [list(g) for g in self.target.degrees],
            "source": [list(g) for g in self.source.degrees],
            "entries": [[poly_to_json(p) for p in row] for row in self.matrix],
        }


def free_presentation(F: FreeMultigradedModule) -> PresentedModule:
    return PresentedModule(F, FreeMultigradedModule(F.variety, ()), [[] for _ in range(F.rank)])


def presentation_from_json(X: ToricVariety, data: Mapping) -> PresentedModule:
    target = FreeMultigradedModule(X, data["target"], data.get("targetDivisors"))
    source = FreeMultigradedModule(X, data.get("source", []), data.get("sourceDivisors"))
    entries = data.get("entries") or [[] for _ in target.degrees]
    return PresentedModule(target, source, [[poly_from_json(p) for p in row] for row in entries])


def matrix_product(A: list[list[Poly]], B: list[list[Poly]], inner: int) -> list[list[Poly]]:
    cols = len(B[0]) if B else 0
    out = []
    for row in A:
        new = []
        for c in range(cols):
            acc: Poly = {}
            for k in range(inner):
                if row[k] and B[k][c]:
                    acc = poly_add(acc, poly_mul(row[k], B[k][c]))
            new.append(acc)
        out.append(new)
    return out


def is_zero_matrix(A: list[list[Poly]]) -> bool:
    return all(not p for row in A for p in row)


# ---------------------------------------------------------------------------
# graded pieces


def graded_piece_basis(F: FreeMultigradedModule, d: Sequence[int]) -> list[tuple[int, tuple[int, ...]]]:
    """Pairs ``(j, e)`` with ``x^e`` of class ``d - g_j``, sorted."""
    X = F.variety
    out = []
    for j in range(F.rank):
        # monomials of class c <-> lattice points of the divisor D_j + lift(d)
        E = [a + b for a, b in zip(F.divisor(j), X.lift(d).coefficients)]
        for m in X.lattice_points(E):
            e = tuple(la.dot(m, u) + a for u, a in zip(X.rays, E))
            out.append((j, e))
    return sorted(out)


def graded_piece_matrix(M: PresentedModule, d: Sequence[int]) -> list[list[Fraction]]:
    """Degree-``d`` part of the presentation matrix (rows: target basis)."""
    rows = graded_piece_basis(M.target, d)
    cols = graded_piece_basis(M.source, d)
    index = {b: i for i, b in enumerate(rows)}
    A = [[Fraction(0)] * len(cols) for _ in rows]
    for c, (j, e) in enumerate(cols):
        for r in range(M.target.rank):
            for a, coef in M.matrix[r][j].items():
                key = (r, tuple(x + y for x, y in zip(a, e)))
                A[index[key]][c] += coef
    return A


def hilbert_value(M: PresentedModule, d: Sequence[int]) -> int:
    A = graded_piece_matrix(M, d)
    if not A:
        return 0
    return len(A) - (la.rank(A) if A[0] else 0)


def hilbert_function(M: PresentedModule, classes: Iterable[Sequence[int]]) -> dict[tuple[int, ...], int]:
    return {tuple(d): hilbert_value(M, d) for d in classes}


def class_box(lower: Sequence[int], upper: Sequence[int]) -> list[tuple[int, ...]]:
    return list(itertools.product(*(range(a, b + 1) for a, b in zip(lower, upper))))


def generic_rank(M: PresentedModule, trials: int = 3, seed: int = 0) -> int:
    """Rank of the cokernel at a general point: rows minus the matrix rank
    evaluated at seeded random rational points."""
    rng = random.Random(seed)
    n = M.variety.n_rays
    best = 0
    for _ in range(trials):
        point = [Fraction(rng.randint(1, 997), rng.randint(1, 97)) for _ in range(n)]
        A = [[poly_eval(p, point) for p in row] for row in M.matrix]
        r = la.rank(A) if A and A[0] else 0
        best = max(best, r)
    return M.target.rank - best
