"""Toric Frobenius pushforward of line bundles, maps, complexes and modules.

Write a character as ``m = p m'' + u`` with ``u`` in ``{0..p-1}^n``.  The
characters of ``O(D)`` with residue ``u`` are the characters ``m''`` of
``O(D_u)``, where ``(D_u)_rho = floor((a_rho + <u, u_rho>) / p)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .cox import (
    FreeMultigradedModule,
    Poly,
    PresentedModule,
    free_module_from_divisors,
    is_zero_matrix,
    matrix_product,
)
from .fan import TDivisor, ToricVariety


class FrobeniusError(ValueError):
    pass


def residues(n: int, p: int) -> list[tuple[int, ...]]:
    """Residue representatives of ``M / pM`` in lexicographic order."""
    return list(itertools.product(range(p), repeat=n))


def _coeffs(D) -> tuple[int, ...]:
    return D.coefficients if isinstance(D, TDivisor) else tuple(int(a) for a in D)


@dataclass(frozen=True)
class FrobeniusSummands:
    variety: ToricVariety
    p: int
    divisor: tuple[int, ...]
    summands: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self):
        return len(self.summands)

    def divisors(self) -> list[tuple[int, ...]]:
        return [D for _, D in self.summands]

    def classes(self) -> list[tuple[int, ...]]:
        return [self.variety.class_of(D) for _, D in self.summands]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "summands": [
                {"u": list(u), "divisor": list(D), "class": list(self.variety.class_of(D))}
                for u, D in self.summands
            ],
        }


def summand_divisor(X: ToricVariety, p: int, D, u: Sequence[int]) -> tuple[int, ...]:
    return tuple((a + la.dot(u, r)) // p for a, r in zip(_coeffs(D), X.rays))


def frobenius_summands(X: ToricVariety, p: int, D) -> FrobeniusSummands:
    if p < 1:
        raise FrobeniusError("Frobenius degree must be positive")
    coeffs = _coeffs(D)
    out = tuple((u, summand_divisor(X, p, coeffs, u)) for u in residues(X.dim, p))
    return FrobeniusSummands(X, p, coeffs, out)


def alignment_character(X: ToricVariety, source, target, c: Sequence[int]) -> tuple[int, ...]:
    """``w`` with ``<w, u_rho> = t_rho - s_rho - c_rho`` for every ray."""
    rhs = [t - s - e for s, t, e in zip(_coeffs(source), _coeffs(target), c)]
    w = la.solve([list(r) for r in X.rays], [Fraction(x) for x in rhs]) if X.dim else []
    if w is None or any(Fraction(x).denominator != 1 for x in w):
        raise FrobeniusError("entry not homogeneous of the required degree")
    return tuple(int(x) for x in w)


def frobenius_push_map(X: ToricVariety, p: int, source, target, entry: Poly) -> list[list[Poly]]:
    """Block matrix of ``F_*`` applied to ``entry: O(source) -> O(target)``.

    Rows are target residues and columns source residues, both in
    lexicographic order.
    """
    s, t = _coeffs(source), _coeffs(target)
    res = residues(X.dim, p)
    index = {u: k for k, u in enumerate(res)}
    blocks: list[list[Poly]] = [[{} for _ in res] for _ in res]
    for c, coef in entry.items():
        w = alignment_character(X, s, t, c)
        for col, u in enumerate(res):
            u2 = tuple((a - b) % p for a, b in zip(u, w))
            e = []
            for a, r, cr in zip(s, X.rays, c):
                base = a + la.dot(u, r)
                e.append((base + cr) // p - base // p)
            if any(x < 0 for x in e):
                raise FrobeniusError("negative exponent in pushed entry")
            key = tuple(e)
            cell = blocks[index[u2]][col]
            cell[key] = cell.get(key, Fraction(0)) + coef
            if not cell[key]:
                del cell[key]
    return blocks


def _push_free(X: ToricVariety, p: int, F: FreeMultigradedModule) -> FreeMultigradedModule:
    divs = []
    for j in range(F.rank):
        divs.extend(frobenius_summands(X, p, F.divisor(j)).divisors())
    return free_module_from_divisors(X, divs)


def frobenius_push_module(X: ToricVariety, p: int, M: PresentedModule) -> PresentedModule:
    """Presentation of ``F_* coker(M)``: every generator becomes ``p^n``
    generators and every entry a ``p^n x p^n`` block."""
    if p < 1:
        raise FrobeniusError("Frobenius degree must be positive")
    size = p ** X.dim
    target = _push_free(X, p, M.target)
    source = _push_free(X, p, M.source)
    rows = [[{} for _ in range(source.rank)] for _ in range(target.rank)]
    for r in range(M.target.rank):
        for c in range(M.source.rank):
            entry = M.matrix[r][c]
            if not entry:
                continue
            blocks = frobenius_push_map(X, p, M.source.divisor(c), M.target.divisor(r), entry)
            for i in range(size):
                for j in range(size):
                    rows[r * size + i][c * size + j] = blocks[i][j]
    return PresentedModule(target, source, rows)


def frobenius_push_complex(X: ToricVariety, p: int, maps: Sequence[PresentedModule]) -> list[PresentedModule]:
    """Push a chain ``... -> F_2 -> F_1 -> F_0``; ``maps[k]`` is ``F_{k+1} -> F_k``."""
    for a, b in zip(maps, maps[1:]):
        if a.source.degrees != b.target.degrees:
            raise FrobeniusError("consecutive maps do not share a free module")
        if not is_zero_matrix(matrix_product(a.matrix, b.matrix, a.source.rank)):
            raise FrobeniusError("input is not a complex")
    return [frobenius_push_module(X, p, d) for d in maps]
