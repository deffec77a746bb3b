"""
Builtin scheme catalog.

Dihedral schemes live in Z[ζ_n] with the power basis 1, ζ, ..., ζ^(φ(n)-1):
singular directions are fixed lattices of the mirrors x -> ζ^m conj(x).
Icosahedral schemes live in the primitive lattice Z^6 spanned by the six
five-fold vertex vectors; a plane orthogonal to a in perpendicular space
lifts to the rational kernel of a^T and (S a)^T, where S holds the signs of
the pairwise vertex inner products.
"""

import itertools
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols

from src.exact_linalg import (
    HermiteBasis, columns_matrix, hnf, hstack, identity, int_matrix, kernel_lattice, matmul,
    rational_inverse, saturate, zeros,
)
from src.scheme import SchemeSpec, SingularFamily, fixed_sublattice, load_scheme
from src.utils import BUILTIN_SCHEME_DIR, SchemeError, get_default_gamma, get_scheme_dir


# Dihedral schemes

def dihedral_rotation(order: int) -> np.ndarray:
    """Companion matrix of the order-th cyclotomic polynomial (multiplication by ζ)."""
    x = symbols("x")
    coeffs = [int(c) for c in reversed(Poly(cyclotomic_poly(order, x), x).all_coeffs())]
    n = len(coeffs) - 1
    c = zeros(n, n)
    for j in range(n - 1):
        c[j + 1, j] = 1
    for i in range(n):
        c[i, n - 1] = -coeffs[i]
    return c


def matrix_power(m: np.ndarray, k: int) -> np.ndarray:
    out = identity(m.shape[0])
    for _ in range(k):
        out = matmul(m, out)
    return out


def rotation_order(m: np.ndarray, limit: int = 120) -> int:
    """Smallest k > 0 with m^k = I."""
    eye = identity(m.shape[0])
    power = m.copy()
    for k in range(1, limit + 1):
        if (power == eye).all():
            return k
        power = matmul(m, power)
    raise ValueError(f"Matrix has no finite order up to {limit}")


def zeta_power(order: int, j: int) -> np.ndarray:
    """Coordinates of ζ^j as a column vector."""
    c = dihedral_rotation(order)
    e0 = zeros(c.shape[0], 1)
    e0[0, 0] = 1
    return matmul(matrix_power(c, j % order), e0)


def conjugation(order: int) -> np.ndarray:
    """Matrix of ζ^j -> ζ^(-j)."""
    n = dihedral_rotation(order).shape[0]
    return np.concatenate([zeta_power(order, -j) for j in range(n)], axis=1)


def dihedral_mirror(order: int, m: int) -> np.ndarray:
    return matmul(matrix_power(dihedral_rotation(order), m % order), conjugation(order))


def dihedral_scheme(name: str, order: int, kinds: str) -> SchemeSpec:
    """Lines through the origin fixed by the even ("a") and/or odd ("b") mirrors."""
    n = dihedral_rotation(order).shape[0]
    families = []
    for kind in kinds:
        parity = {"a": 0, "b": 1}[kind]
        for i in range(order // 2):
            direction = fixed_sublattice(dihedral_mirror(order, 2 * i + parity))
            families.append(SingularFamily.create(f"{kind}{i}", direction, [0] * n, n))
    return SchemeSpec(name, n, 2, tuple(families))


def generalized_penrose(gamma: Optional[Fraction] = None) -> SchemeSpec:
    """Ten line families: five directions, each through two shifted points.

    The line along ζ^(2k) passes through -γ ζ^(2k+1) and γ (ζ^(2k+1) + ζ^(2k+2)).
    """
    gamma = Fraction(get_default_gamma() if gamma is None else gamma)
    if gamma.denominator == 1:
        raise SchemeError(f"gamma = {gamma} is integral; the generic pattern needs a non-integer value")
    order = 10
    real = zeta_power(order, 1) + zeta_power(order, -1)
    one = zeta_power(order, 0)
    c = dihedral_rotation(order)
    families = []
    for k in range(5):
        rot = matrix_power(c, 2 * k)
        direction = saturate(hnf(np.concatenate([matmul(rot, one), matmul(rot, real)], axis=1)))
        first = [-gamma * x for x in zeta_power(order, 2 * k + 1)[:, 0]]
        second = [gamma * (x + y) for x, y in zip(zeta_power(order, 2 * k + 1)[:, 0],
                                                 zeta_power(order, 2 * k + 2)[:, 0])]
        families.append(SingularFamily.create(f"p{k}", direction, first, 4))
        families.append(SingularFamily.create(f"q{k}", direction, second, 4))
    return SchemeSpec("generalized_penrose", 4, 2, tuple(families))


# Icosahedral schemes

def icosahedral_signs() -> np.ndarray:
    """Signs of the inner products between the six vertex vectors (pole 0, ring 1..5)."""
    s = zeros(6, 6)
    for k in range(1, 6):
        s[0, k] = s[k, 0] = 1
    for i, j in itertools.permutations(range(1, 6), 2):
        s[i, j] = 1 if (i - j) % 5 in (1, 4) else -1
    return s


def icosahedral_rotation() -> np.ndarray:
    """Five-fold rotation about the pole: cyclic shift of the ring vectors."""
    m = zeros(6, 6)
    m[0, 0] = 1
    for k in range(1, 6):
        m[k % 5 + 1, k] = 1
    return m


def icosahedral_half_turn() -> np.ndarray:
    """Two-fold rotation swapping the pole with ring vertex 1."""
    m = zeros(6, 6)
    m[1, 0] = m[0, 1] = 1
    m[5, 2] = m[2, 5] = 1
    m[3, 3] = m[4, 4] = -1
    return m


def icosahedral_lattice_bases() -> Dict[str, np.ndarray]:
    """Bases of the F- and P-lattices in primitive coordinates.

    The F basis is 2e0, e0 + e1, ..., e0 + e5, so x0 = 2y0 + y1 + ... + y5.
    """
    f_gens = [[2, 0, 0, 0, 0, 0]] + [[1] + [int(i == j) for i in range(1, 6)] for j in range(1, 6)]
    return {"F": columns_matrix(f_gens, 6), "P": identity(6)}


def icosahedral_lattices() -> Dict[str, HermiteBasis]:
    """The F-, P- and I-lattices scaled by 2, so that all three are integral."""
    twice = identity(6) * 2
    return {
        "F": hnf(icosahedral_lattice_bases()["F"] * 2),
        "P": hnf(twice),
        "I": hnf(hstack([twice, int_matrix([[1]] * 6)], 6)),
    }


def icosahedral_generators(lattice: str = "P") -> List[np.ndarray]:
    """Five-fold and two-fold rotations written in the coordinates of a lattice basis."""
    basis = _lattice_basis(lattice)
    inverse = rational_inverse(basis)
    out = []
    for m in (icosahedral_rotation(), icosahedral_half_turn()):
        conjugated = matmul(inverse, matmul(m, basis))
        if any(Fraction(x).denominator != 1 for x in conjugated.flat):
            raise SchemeError(f"The {lattice}-lattice is not invariant under the icosahedral group")
        out.append(int_matrix(conjugated))
    return out


def lattice_vector(lattice: str, v: Sequence) -> List[Fraction]:
    """Coordinates of a primitive-coordinate vector in a lattice basis."""
    inverse = rational_inverse(_lattice_basis(lattice))
    return [sum((inverse[i, j] * Fraction(v[j]) for j in range(6)), Fraction(0)) for i in range(6)]


def _lattice_basis(lattice: str) -> np.ndarray:
    bases = icosahedral_lattice_bases()
    if lattice not in bases:
        raise SchemeError(f"Icosahedral schemes are built over the F- or P-lattice, not '{lattice}'")
    return bases[lattice]


def _plane_normals(kind: str) -> List[List[int]]:
    s = icosahedral_signs()
    normals = []
    if kind == "5":
        for k in range(6):
            normals.append([int(i == k) for i in range(6)])
    elif kind == "2":
        for i, j in itertools.combinations(range(6), 2):
            a = [0] * 6
            a[i], a[j] = 1, -s[i, j]
            normals.append(a)
    elif kind == "3":
        for i, j, k in itertools.combinations(range(6), 3):
            if s[i, j] * s[i, k] * s[j, k] == -1:
                a = [0] * 6
                a[i], a[j], a[k] = 1, -s[i, j], -s[i, k]
                normals.append(a)
    else:
        raise ValueError(f"Unknown icosahedral family kind {kind}")
    return normals


def icosahedral_scheme(name: str, lattice: str, kinds: str) -> SchemeSpec:
    """Planes through the origin orthogonal to the 5-, 3- or 2-fold axes."""
    basis = _lattice_basis(lattice)
    s = icosahedral_signs()
    families = []
    for kind in kinds:
        for idx, a in enumerate(_plane_normals(kind)):
            a_col = columns_matrix([a], 6)
            constraints = np.concatenate([a_col.T, matmul(s, a_col).T], axis=0)
            direction = kernel_lattice(matmul(constraints, basis))
            families.append(SingularFamily.create(f"w{kind}.{idx}", direction, [0] * 6, 6))
    return SchemeSpec(name, 6, 3, tuple(families))


CATALOG: Dict[str, Callable[[], SchemeSpec]] = {
    "penrose": lambda: dihedral_scheme("penrose", 10, "a"),
    "ttt": lambda: dihedral_scheme("ttt", 10, "b"),
    "ammann_beenker": lambda: dihedral_scheme("ammann_beenker", 8, "a"),
    "ammann_beenker_coloured": lambda: dihedral_scheme("ammann_beenker_coloured", 8, "b"),
    "ammann_beenker_decorated": lambda: dihedral_scheme("ammann_beenker_decorated", 8, "ab"),
    "socolar": lambda: dihedral_scheme("socolar", 12, "a"),
    "socolar_decorated": lambda: dihedral_scheme("socolar_decorated", 12, "ab"),
    "generalized_penrose": lambda: generalized_penrose(),
    "heptagonal_a": lambda: dihedral_scheme("heptagonal_a", 14, "a"),
    "heptagonal_b": lambda: dihedral_scheme("heptagonal_b", 14, "b"),
    "ammann_kramer": lambda: icosahedral_scheme("ammann_kramer", "P", "2"),
    "dual_canonical_d6": lambda: icosahedral_scheme("dual_canonical_d6", "F", "2"),
    "canonical_d6": lambda: icosahedral_scheme("canonical_d6", "F", "53"),
    "danzer": lambda: icosahedral_scheme("danzer", "F", "5"),
}


def scheme_names() -> List[str]:
    """Builtin names plus any extra *.json names from the user scheme directory."""
    names = list(CATALOG)
    user_dir = get_scheme_dir()
    if user_dir and user_dir.is_dir():
        for path in sorted(user_dir.glob("*.json")):
            if path.stem not in names:
                names.append(path.stem)
    return names


def shipped_scheme_path(name: str) -> Path:
    """Path of the data file shipped for a scheme name under schemes/."""
    return BUILTIN_SCHEME_DIR / f"{name}.json"


def builtin_scheme(name: str, gamma: Optional[Fraction] = None) -> SchemeSpec:
    """Look up a scheme by name; the user scheme directory takes precedence.

    Catalog entries are derived in code; the shipped schemes/ files hold the
    same data and also serve the small worked examples by name.

    Raises:
        SchemeError: for an unknown name
    """
    user_dir = get_scheme_dir()
    if user_dir:
        path = user_dir / f"{name}.json"
        if path.is_file():
            return load_scheme(path)
    if name == "generalized_penrose" and gamma is not None:
        return generalized_penrose(gamma)
    if name in CATALOG:
        return CATALOG[name]()
    shipped = shipped_scheme_path(name)
    if shipped.is_file():
        return load_scheme(shipped)
    raise SchemeError(f"Unknown scheme '{name}'. Available: {', '.join(scheme_names())}")
