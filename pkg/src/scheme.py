"""
Rational cut-and-project schemes in the lifted lattice picture.

A scheme is Γ = Z^N together with a finite list of singular families: each
family is the Γ-orbit of one rational affine subspace, given by a saturated
integer direction lattice and a rational offset.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.exact_linalg import (
    HermiteBasis, columns_matrix, frac_part, hnf, hstack, identity, int_matrix,
    is_saturated, kernel_basis, kernel_lattice, matmul, matvec, rational_inverse,
    snf, unimodular_inverse,
)
from src.utils import (
    DepthExceeded, InfiniteOrbits, RationalityError, SchemeError,
    format_rational, parse_rational,
)


SCHEME_KEYS = {"name", "rank", "codim", "families"}
FAMILY_KEYS = {"label", "direction", "offset"}


class AffineChart:
    """Canonical coordinates on Q^N / (Z^N + span D) for a saturated lattice D.

    With u @ D @ v = [I; 0] from the Smith form, the rows Q = u[k:] vanish on D
    and X0 = inverse(u)[:, k:] satisfies Q @ X0 = I. Two offsets are equivalent
    exactly when Q maps them to the same point of the torus (Q/Z)^(N-k).
    """

    def __init__(self, direction: HermiteBasis):
        if not is_saturated(direction):
            raise SchemeError(f"Direction {direction} is not saturated")
        d = snf(direction.basis)
        k = direction.rank
        n = direction.ambient_rank
        self.direction = direction
        self.q = d.u[k:, :].copy()
        self.x0 = unimodular_inverse(d.u)[:, k:].copy() if n else d.u

    def key(self, offset: Sequence) -> Tuple[Fraction, ...]:
        return tuple(frac_part(x) for x in matvec(self.q, np.array(list(offset), dtype=object)))

    def representative(self, offset: Sequence) -> Tuple[Fraction, ...]:
        key = np.array(list(self.key(offset)), dtype=object)
        if self.x0.shape[1] == 0:
            return tuple(Fraction(0) for _ in range(self.direction.ambient_rank))
        return tuple(Fraction(x) for x in matvec(self.x0, key))

    def normals(self) -> np.ndarray:
        """Integer rows whose common kernel is span D."""
        return self.q


@lru_cache(maxsize=None)
def chart_for(direction: HermiteBasis) -> AffineChart:
    return AffineChart(direction)


def canonical_offset(direction: HermiteBasis, offset: Sequence) -> Tuple[Fraction, ...]:
    return chart_for(direction).representative([Fraction(x) for x in offset])


@dataclass(frozen=True)
class SingularFamily:
    """One Γ-orbit of rational affine subspaces: offset + span(direction)."""
    label: str
    direction: HermiteBasis
    offset: Tuple[Fraction, ...]

    @classmethod
    def create(cls, label: str, generators, offset: Sequence, ambient_rank: int) -> "SingularFamily":
        """Build a family from direction generators (columns) and a rational offset.

        Raises:
            SchemeError: on shape errors or an unsaturated direction lattice
        """
        if isinstance(generators, HermiteBasis):
            direction = generators
        else:
            try:
                direction = hnf(columns_matrix([list(g) for g in generators], ambient_rank))
            except ValueError as e:
                raise SchemeError(f"Family {label}: {e}")
        if len(offset) != ambient_rank:
            raise SchemeError(f"Family {label}: offset has length {len(offset)}, expected {ambient_rank}")
        if not is_saturated(direction):
            raise SchemeError(f"Family {label}: direction {direction} is not saturated")
        return cls(label, direction, canonical_offset(direction, offset))

    @property
    def class_key(self):
        return (self.direction.key, self.offset)


@dataclass(frozen=True)
class SchemeSpec:
    name: str
    ambient_rank: int
    codim: int
    families: Tuple[SingularFamily, ...]

    def __post_init__(self):
        if self.ambient_rank <= 0 or self.codim <= 0 or self.codim > self.ambient_rank:
            raise SchemeError(f"Scheme {self.name}: invalid rank {self.ambient_rank} / codim {self.codim}")
        if self.ambient_rank % self.codim != 0:
            raise SchemeError(f"Scheme {self.name}: nu = {self.ambient_rank}/{self.codim} is not an integer")
        seen = set()
        for fam in self.families:
            if fam.direction.ambient_rank != self.ambient_rank:
                raise SchemeError(f"Family {fam.label} lives in rank {fam.direction.ambient_rank}")
            if fam.class_key in seen:
                raise SchemeError(f"Scheme {self.name}: duplicate family {fam.label}")
            seen.add(fam.class_key)

    @property
    def dim(self) -> int:
        return self.ambient_rank - self.codim

    @property
    def nu(self) -> int:
        return self.ambient_rank // self.codim

    @property
    def family_rank(self) -> int:
        return self.nu * (self.codim - 1)

    def family_keys(self) -> set:
        return {f.class_key for f in self.families}

    def summary(self) -> str:
        return f"{self.name} N={self.ambient_rank} n={self.codim} ν={self.nu}"


def validate_rationality(s: SchemeSpec, max_depth: Optional[int] = None) -> Dict:
    """Check the rationality conditions of a scheme without raising.

    Returns:
        Report dict with keys ok, nu, finite, failures and (when the closure
        succeeded) counts
    """
    from src.arrangement import close_arrangement

    report = {"scheme": s.name, "nu": s.nu, "ok": True, "finite": None, "failures": []}
    for fam in s.families:
        if fam.direction.rank != s.family_rank:
            report["failures"].append(
                f"dimension: family {fam.label} has direction rank {fam.direction.rank}, expected {s.family_rank}")
    if report["failures"]:
        report["ok"] = False
        return report
    try:
        arr = close_arrangement(s, max_depth=max_depth)
    except InfiniteOrbits as e:
        report["finite"] = False
        report["failures"].append(f"finiteness: {e}")
    except RationalityError as e:
        report["failures"].append(f"rationality: {e}")
    except DepthExceeded as e:
        report["failures"].append(f"depth: {e}")
    else:
        report["finite"] = True
        report["counts"] = {f"L{r}": len(level) for r, level in enumerate(arr.levels)}
        for level in arr.levels:
            for cls in level:
                if not is_saturated(cls.dir) or cls.dir.rank % s.nu:
                    report["failures"].append(f"saturation: class {cls} violates rank law")
    report["ok"] = not report["failures"]
    return report


def fixed_sublattice(m: np.ndarray) -> HermiteBasis:
    """Sublattice of Z^N fixed by an integral matrix."""
    m = int_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"Fixed sublattice needs a square matrix, got {m.shape}")
    return kernel_lattice(m - identity(m.shape[0]))


def _coset_representatives(lattice: HermiteBasis) -> List[Tuple[int, ...]]:
    """Box representatives of Z^N / lattice for a full-rank HNF lattice."""
    if not lattice.is_full():
        raise InfiniteOrbits("Coset index is infinite")
    bounds = [lattice.columns[j][p] for j, p in enumerate(lattice.pivots)]
    reps = [()]
    for b in bounds:
        reps = [r + (c,) for r in reps for c in range(b)]
    return reps


def restrict_to_sublattice(scheme: SchemeSpec, basis: np.ndarray, name: Optional[str] = None) -> SchemeSpec:
    """Re-express a scheme over the full-rank sublattice spanned by `basis`.

    Each family splits into one family per coset of Γ' + Γ^α in Γ; new
    coordinates are y with x = basis @ y.
    """
    basis = int_matrix(basis)
    n = scheme.ambient_rank
    if basis.shape != (n, n):
        raise SchemeError(f"Sublattice basis must be {n}x{n}")
    inverse = rational_inverse(basis)
    families = []
    for fam in scheme.families:
        sub_plus = hnf(hstack([basis, fam.direction.basis], n))
        normals = kernel_basis(fam.direction.basis.T.copy()).T.copy()
        new_dir = kernel_lattice(matmul(normals, basis)) if normals.shape[0] else hnf(identity(n))
        reps = _coset_representatives(sub_plus)
        for k, rep in enumerate(reps):
            shifted = [o + g for o, g in zip(fam.offset, rep)]
            offset = [sum((inverse[i, j] * shifted[j] for j in range(n)), Fraction(0)) for i in range(n)]
            label = fam.label if len(reps) == 1 else f"{fam.label}/{k}"
            families.append(SingularFamily.create(label, new_dir, offset, n))
    return SchemeSpec(name or f"{scheme.name}_restricted", n, scheme.codim, tuple(families))


def is_translation_invariant(scheme: SchemeSpec, t: Sequence) -> bool:
    """True when translating by t permutes the family classes."""
    keys = scheme.family_keys()
    shifted = set()
    for fam in scheme.families:
        moved = canonical_offset(fam.direction, [o + Fraction(x) for o, x in zip(fam.offset, t)])
        shifted.add((fam.direction.key, moved))
    return shifted == keys


def is_symmetry(scheme: SchemeSpec, m: np.ndarray) -> bool:
    """True when the integral linear map m permutes the family classes."""
    m = int_matrix(m)
    keys = scheme.family_keys()
    image = set()
    for fam in scheme.families:
        direction = hnf(matmul(m, fam.direction.basis))
        offset = canonical_offset(direction, matvec(m, np.array(list(fam.offset), dtype=object)))
        image.add((direction.key, offset))
    return image == keys


def scheme_to_dict(scheme: SchemeSpec) -> Dict:
    return {
        "name": scheme.name,
        "rank": scheme.ambient_rank,
        "codim": scheme.codim,
        "families": [
            {
                "label": fam.label,
                "direction": [list(col) for col in fam.direction.columns],
                "offset": [format_rational(x) for x in fam.offset],
            }
            for fam in scheme.families
        ],
    }


def scheme_from_dict(data: Dict) -> SchemeSpec:
    """Parse the scheme JSON object. Unknown keys are rejected."""
    if not isinstance(data, dict):
        raise SchemeError("Scheme JSON must be an object")
    unknown = set(data) - SCHEME_KEYS
    if unknown:
        raise SchemeError(f"Unknown scheme keys: {sorted(unknown)}")
    missing = SCHEME_KEYS - set(data)
    if missing:
        raise SchemeError(f"Missing scheme keys: {sorted(missing)}")
    n = data["rank"]
    if not isinstance(n, int) or not isinstance(data["codim"], int):
        raise SchemeError("rank and codim must be integers")
    families = []
    for i, fam in enumerate(data["families"]):
        if not isinstance(fam, dict):
            raise SchemeError(f"Family #{i} must be an object")
        unknown = set(fam) - FAMILY_KEYS
        if unknown:
            raise SchemeError(f"Family #{i}: unknown keys {sorted(unknown)}")
        if set(fam) != FAMILY_KEYS:
            raise SchemeError(f"Family #{i}: missing keys {sorted(FAMILY_KEYS - set(fam))}")
        for col in fam["direction"]:
            if any(isinstance(x, bool) or not isinstance(x, int) for x in col):
                raise SchemeError(f"Family {fam['label']}: direction entries must be integers")
        offset = [parse_rational(x) for x in fam["offset"]]
        families.append(SingularFamily.create(str(fam["label"]), fam["direction"], offset, n))
    return SchemeSpec(str(data["name"]), n, data["codim"], tuple(families))


def load_scheme(path) -> SchemeSpec:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemeError(f"Malformed scheme file {path}: {e}")
    except OSError as e:
        raise SchemeError(f"Cannot read scheme file {path}: {e}")
    return scheme_from_dict(data)


def save_scheme(scheme: SchemeSpec, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scheme_to_dict(scheme), f, indent=2, ensure_ascii=False)
        f.write("\n")
