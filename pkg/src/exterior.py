"""
Exterior powers of Z^N and the maps induced by sublattice inclusions.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.exact_linalg import (
    HermiteBasis, hstack, int_matrix, lattice_coordinates, rank, zeros,
)


@dataclass(frozen=True)
class WedgeIndex:
    """Lexicographic basis e_S of Λ_k Z^N, S a strictly increasing k-subset."""
    ambient_rank: int
    degree: int

    @cached_property
    def subsets(self) -> List[Tuple[int, ...]]:
        return list(itertools.combinations(range(self.ambient_rank), self.degree))

    @cached_property
    def positions(self) -> Dict[Tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.subsets)}

    def __len__(self) -> int:
        return comb(self.ambient_rank, self.degree) if 0 <= self.degree <= self.ambient_rank else 0

    def label(self, i: int) -> str:
        return "".join(str(x + 1) for x in self.subsets[i]) or "1"


@dataclass(frozen=True, eq=False)
class ExteriorMap:
    source_basis: HermiteBasis
    degree: int
    matrix: np.ndarray

    @property
    def ambient_rank(self) -> int:
        return self.source_basis.ambient_rank


def bareiss_det(rows: List[List[int]]) -> int:
    """Integer determinant by fraction-free elimination."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def compound_matrix(a: np.ndarray, k: int) -> np.ndarray:
    """k-th compound: the matrix of all k x k minors, subsets in lexicographic order."""
    p, q = a.shape
    if k < 0:
        raise ValueError(f"Negative exterior degree {k}")
    row_sets = list(itertools.combinations(range(p), k))
    col_sets = list(itertools.combinations(range(q), k))
    out = zeros(len(row_sets), len(col_sets))
    if not col_sets or not row_sets:
        return out
    rows = a.tolist()
    for j, cs in enumerate(col_sets):
        for i, rs in enumerate(row_sets):
            out[i, j] = bareiss_det([[int(rows[r][c]) for c in cs] for r in rs])
    return out


def exterior_power_map(basis: HermiteBasis, k: int) -> ExteriorMap:
    """Λ_k of the inclusion basis -> Z^N, in ambient wedge coordinates.

    Raises:
        ValueError: if k < 0 or k > N
    """
    if k < 0 or k > basis.ambient_rank:
        raise ValueError(f"Exterior degree {k} outside 0..{basis.ambient_rank}")
    return ExteriorMap(basis, k, compound_matrix(basis.basis, k))


def relative_exterior_map(sub: HermiteBasis, sup: HermiteBasis, k: int) -> np.ndarray:
    """Λ_k of sub -> sup, with sub expressed in the coordinates of sup's basis."""
    if sub.ambient_rank != sup.ambient_rank:
        raise ValueError("Sublattices live in different ambient ranks")
    coords = lattice_coordinates(sup, sub.basis)
    return compound_matrix(int_matrix(coords, sup.rank, sub.rank), k)


def generated_rank(maps: Sequence[ExteriorMap]) -> int:
    """Rank of the subgroup of Λ_k Z^N generated by the images of the maps."""
    if not maps:
        return 0
    ns = {m.ambient_rank for m in maps}
    ks = {m.degree for m in maps}
    if len(ns) > 1 or len(ks) > 1:
        raise ValueError(f"Mismatched exterior maps: ranks {sorted(ns)}, degrees {sorted(ks)}")
    n, k = ns.pop(), ks.pop()
    return rank(hstack([m.matrix for m in maps], comb(n, k)))


def wedge_with_vector(v: Sequence[int], column: Sequence[int], k: int) -> List[int]:
    """Coordinates of v ∧ w in Λ_(k+1) Z^N for w in Λ_k Z^N.

    e_i ∧ e_S = (-1)^#{s in S : s < i} e_(S ∪ {i}) for i not in S.
    """
    n = len(v)
    source, target = WedgeIndex(n, k), WedgeIndex(n, k + 1)
    if len(column) != len(source):
        raise ValueError(f"Wedge vector of length {len(column)}, expected {len(source)}")
    out = [0] * len(target)
    for subset, coeff in zip(source.subsets, column):
        if not coeff:
            continue
        for i, vi in enumerate(v):
            if not vi or i in subset:
                continue
            sign = -1 if sum(1 for s in subset if s < i) % 2 else 1
            out[target.positions[tuple(sorted(subset + (i,)))]] += sign * int(vi) * int(coeff)
    return out
