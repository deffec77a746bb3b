"""
Intersection closure of the singular families up to translation by Γ = Z^N.

Classes are indexed by singular dimension r = rank(direction) / nu, so
levels[r] is the list I_r. Incidences record, for every class Θ and every
r below its dimension, which r-classes have a translate inside Θ.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.exact_linalg import (
    HermiteBasis, hnf, hstack, int_matrix, is_zero, lattice_coordinates,
    lattice_intersection, matmul, matvec, rational_coordinates, solve_mod_lattice,
    solve_rational, kernel_basis,
)
from src.scheme import SchemeSpec, canonical_offset, chart_for
from src.utils import DepthExceeded, InfiniteOrbits, RationalityError, SchemeError


@dataclass(frozen=True)
class AffineClass:
    """Γ-orbit of offset + span(dir), with dir saturated and offset canonical."""
    dir: HermiteBasis
    offset: Tuple[Fraction, ...]
    nu: int

    @classmethod
    def create(cls, direction: HermiteBasis, offset, nu: int) -> "AffineClass":
        if direction.rank % nu:
            raise RationalityError(f"Direction rank {direction.rank} is not divisible by nu={nu}")
        return cls(direction, canonical_offset(direction, offset), nu)

    @property
    def dim_perp(self) -> int:
        return self.dir.rank // self.nu

    @property
    def key(self):
        return (self.dir.key, self.offset)

    @property
    def sort_key(self):
        return (self.dir.rank, self.dir.columns, self.offset)

    def contains_direction(self, other: "AffineClass") -> bool:
        """True when span(other.dir) lies in span(self.dir)."""
        return is_zero(matmul(chart_for(self.dir).normals(), other.dir.basis))

    def __str__(self) -> str:
        offset = "(" + ",".join(str(x) for x in self.offset) + ")"
        return f"{offset} + {self.dir}"


@dataclass(frozen=True)
class Incidence:
    """An r-class with a translate inside a class Θ.

    point is the translated offset lying in Θ; relative_offset and
    relative_dir give that subspace in the coordinates of Γ^Θ.
    """
    target: int
    point: Tuple[Fraction, ...]
    relative_dir: HermiteBasis
    relative_offset: Tuple[Fraction, ...]


@dataclass
class Arrangement:
    ambient_rank: int
    nu: int
    codim: int
    levels: List[List[AffineClass]]
    incidence: Dict[Tuple[int, int], Dict[int, List[Incidence]]] = field(default_factory=dict)
    name: str = ""

    @property
    def top(self) -> int:
        return self.codim - 1

    def incidences(self, k: int, i: int, r: int) -> List[Incidence]:
        """I_r^Θ for Θ = levels[k][i]."""
        return self.incidence.get((k, i), {}).get(r, [])

    def index_of(self, cls: AffineClass) -> Tuple[int, int]:
        r = cls.dim_perp
        for i, other in enumerate(self.levels[r]):
            if other.key == cls.key:
                return r, i
        raise KeyError(f"Class {cls} is not in the arrangement")


def intersect_classes(a: AffineClass, b: AffineClass, ambient_rank: Optional[int] = None
                      ) -> List[Tuple[AffineClass, int]]:
    """Γ-classes of the components A ∩ (B + γ), γ in Z^N, with multiplicities.

    Raises:
        InfiniteOrbits: when Γ^A + Γ^B has infinite index in Z^N ∩ (V_A + V_B)
        RationalityError: when a component direction has rank not divisible by nu
    """
    n = a.dir.ambient_rank if ambient_rank is None else ambient_rank
    if a.dir.ambient_rank != n or b.dir.ambient_rank != n:
        raise ValueError("Classes live in different ambient ranks")
    span = hnf(hstack([a.dir.basis, b.dir.basis], n))
    normals = kernel_basis(span.basis.T.copy()).T.copy()
    rhs = matvec(normals, np.array([x - y for x, y in zip(a.offset, b.offset)], dtype=object))
    solved = solve_mod_lattice(normals, list(rhs))
    if solved is None:
        return []
    gamma0, lattice = solved

    coords = lattice_coordinates(lattice, span.basis)
    sub = hnf(int_matrix(coords, lattice.rank, span.rank))
    if sub.rank < lattice.rank:
        raise InfiniteOrbits(f"Intersection of {a} and {b} meets infinitely many translation orbits")
    bounds = [sub.columns[j][p] for j, p in enumerate(sub.pivots)]
    reps = [()]
    for bound in bounds:
        reps = [r + (c,) for r in reps for c in range(bound)]

    direction = lattice_intersection(a.dir, b.dir)
    if direction.rank % a.nu:
        raise RationalityError(
            f"Intersection of {a} and {b} has direction rank {direction.rank}, not divisible by nu={a.nu}")
    system = hstack([a.dir.basis, -b.dir.basis], n)
    found: Dict = {}
    order = []
    basis = lattice.basis
    a_basis = a.dir.basis
    for rep in reps:
        gamma = [gamma0[i] + sum(basis[i, j] * rep[j] for j in range(len(rep))) for i in range(n)]
        target = [ob + g - oa for oa, ob, g in zip(a.offset, b.offset, gamma)]
        st = solve_rational(system, target)
        if st is None:
            raise SchemeError(f"Inconsistent intersection data for {a} and {b}")
        point = [oa + sum(a_basis[i, j] * st[j] for j in range(a.dir.rank)) for i, oa in enumerate(a.offset)]
        cls = AffineClass(direction, canonical_offset(direction, point), a.nu)
        if cls.key not in found:
            found[cls.key] = [cls, 0]
            order.append(cls.key)
        found[cls.key][1] += 1
    return [(found[k][0], found[k][1]) for k in order]


def _incidence_record(theta: AffineClass, x: AffineClass, target: int) -> Incidence:
    chart = chart_for(theta.dir)
    shift = matvec(chart.q, np.array([p - q for p, q in zip(x.offset, theta.offset)], dtype=object))
    delta = matvec(chart.x0, shift) if chart.x0.shape[1] else np.zeros(0, dtype=object)
    point = tuple(Fraction(o) - (Fraction(delta[i]) if len(delta) else 0) for i, o in enumerate(x.offset))
    inside = np.array([[p - q] for p, q in zip(point, theta.offset)], dtype=object)
    rel = rational_coordinates(theta.dir, inside)[:, 0]
    rel_dir = hnf(int_matrix(lattice_coordinates(theta.dir, x.dir.basis), theta.dir.rank, x.dir.rank))
    rel_offset = canonical_offset(rel_dir, list(rel)) if theta.dir.rank else ()
    return Incidence(target, point, rel_dir, rel_offset)


def _compute_incidence(levels: List[List[AffineClass]]) -> Dict[Tuple[int, int], Dict[int, List[Incidence]]]:
    incidence: Dict[Tuple[int, int], Dict[int, List[Incidence]]] = {}
    for k in range(1, len(levels)):
        for i, theta in enumerate(levels[k]):
            chart = chart_for(theta.dir)
            theta_key = chart.key(theta.offset)
            per_r: Dict[int, List[Incidence]] = {}
            for r in range(k):
                found = []
                for t, x in enumerate(levels[r]):
                    if not theta.contains_direction(x):
                        continue
                    if chart.key(x.offset) != theta_key:
                        continue
                    found.append(_incidence_record(theta, x, t))
                per_r[r] = found
            incidence[(k, i)] = per_r
    return incidence


def close_arrangement(s: SchemeSpec, max_depth: Optional[int] = None, verbose: bool = False) -> Arrangement:
    """Close the family set under pairwise intersection and compute incidences.

    Raises:
        SchemeError: when a family direction has the wrong rank
        InfiniteOrbits, RationalityError: propagated from intersect_classes
        DepthExceeded: when new classes still appear after max_depth rounds
    """
    nu = s.nu
    top_rank = s.family_rank
    top: List[AffineClass] = []
    for fam in s.families:
        if fam.direction.rank != top_rank:
            raise SchemeError(f"Family {fam.label} has direction rank {fam.direction.rank}, expected {top_rank}")
        top.append(AffineClass.create(fam.direction, fam.offset, nu))

    classes = {c.key: c for c in top}
    frontier = list(top)
    limit = s.codim if max_depth is None else max_depth
    for _ in range(limit):
        fresh = []
        for c in frontier:
            for f in top:
                if f.contains_direction(c):
                    continue
                for cls, _mult in intersect_classes(c, f, s.ambient_rank):
                    if cls.key not in classes:
                        classes[cls.key] = cls
                        fresh.append(cls)
        frontier = fresh
        if not frontier:
            break
    if frontier:
        raise DepthExceeded(f"Intersection closure of {s.name} still growing after {limit} rounds")

    levels: List[List[AffineClass]] = [[] for _ in range(s.codim)]
    for cls in classes.values():
        levels[cls.dim_perp].append(cls)
    for level in levels:
        level.sort(key=lambda c: c.sort_key)
    if verbose:
        from src.utils import print_ts
        print_ts(f"📊 {s.name}: " + ", ".join(f"L{r}={len(level)}" for r, level in enumerate(levels)))
    return Arrangement(s.ambient_rank, nu, s.codim, levels, _compute_incidence(levels), s.name)


def counts(arr: Arrangement) -> Dict:
    """L_r, L_r^Θ and the aggregate sums used by the rank formulas."""
    top = arr.top
    l_theta = {}
    for (k, i), per_r in arr.incidence.items():
        l_theta[(k, i)] = {r: len(found) for r, found in per_r.items()}

    def l0_of(k: int, i: int) -> int:
        return l_theta.get((k, i), {}).get(0, 0)

    sum_l0_alpha = sum(l0_of(top, i) for i in range(len(arr.levels[top]))) if top >= 1 else 0
    sum_l1_alpha = sum(l_theta[(top, i)].get(1, 0) for i in range(len(arr.levels[top]))) if top >= 2 else 0
    sum_l0_theta = sum(l0_of(1, i) for i in range(len(arr.levels[1]))) if len(arr.levels) > 1 else 0
    sum_sum = 0
    if top >= 2:
        for i in range(len(arr.levels[top])):
            for inc in arr.incidences(top, i, 1):
                sum_sum += l0_of(1, inc.target)
    return {
        "L": [len(level) for level in arr.levels],
        "L_theta": l_theta,
        "sum_L1_alpha": sum_l1_alpha,
        "sum_L0_alpha": sum_l0_alpha,
        "sum_L0_theta": sum_l0_theta,
        "sum_sum_L0_theta": sum_sum,
    }


def arrangement_to_dict(arr: Arrangement) -> Dict:
    table = counts(arr)
    return {
        "nu": arr.nu,
        "codim": arr.codim,
        "levels": [
            [
                {
                    "dir": [list(col) for col in cls.dir.columns],
                    "offset": [str(x) for x in cls.offset],
                    "stabilizer_rank": cls.dir.rank,
                }
                for cls in level
            ]
            for level in arr.levels
        ],
        "counts": {
            "L": table["L"],
            "L_theta": {f"{k}:{i}": {str(r): c for r, c in per.items()} for (k, i), per in table["L_theta"].items()},
            "sum_L1_alpha": table["sum_L1_alpha"],
            "sum_L0_alpha": table["sum_L0_alpha"],
            "sum_L0_theta": table["sum_L0_theta"],
            "sum_sum_L0_theta": table["sum_sum_L0_theta"],
        },
    }
