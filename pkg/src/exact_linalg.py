"""
Exact integer and rational linear algebra.

Matrices are numpy arrays with dtype=object holding Python ints (or Fractions
for rational data), so every operation is exact at any magnitude.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint


# Matrix helpers

def zeros(rows: int, cols: int) -> np.ndarray:
    """Integer zero matrix of the given shape."""
    out = np.empty((rows, cols), dtype=object)
    out.fill(0)
    return out


def identity(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def int_matrix(data, rows: Optional[int] = None, cols: Optional[int] = None) -> np.ndarray:
    """Build an object-dtype integer matrix from nested sequences.

    Args:
        data: Row-major nested sequence (or an existing array)
        rows, cols: Shape to use when data is empty

    Returns:
        2-D numpy array of Python ints
    """
    if isinstance(data, np.ndarray) and data.ndim == 2:
        out = zeros(*data.shape)
        for (i, j), x in np.ndenumerate(data):
            out[i, j] = int(x)
        return out
    data = [list(row) for row in data]
    if not data or not data[0]:
        return zeros(rows if rows is not None else len(data), cols or 0)
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise ValueError("Ragged matrix rows")
    out = zeros(len(data), width)
    for i, row in enumerate(data):
        for j, x in enumerate(row):
            out[i, j] = int(x)
    return out


def rat_vector(values: Iterable) -> np.ndarray:
    """Object array of Fractions in lowest terms."""
    items = [Fraction(x) for x in values]
    out = np.empty(len(items), dtype=object)
    for i, x in enumerate(items):
        out[i] = x
    return out


def columns_matrix(columns: Sequence[Sequence[int]], rows: int) -> np.ndarray:
    """Matrix whose columns are the given vectors."""
    out = zeros(rows, len(columns))
    for j, col in enumerate(columns):
        if len(col) != rows:
            raise ValueError(f"Column of length {len(col)} in ambient rank {rows}")
        for i, x in enumerate(col):
            out[i, j] = int(x)
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product that also handles empty inner dimensions."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"Shape mismatch {a.shape} x {b.shape}")
    if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return np.dot(a, b)


def matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    if a.shape[1] != len(x):
        raise ValueError(f"Shape mismatch {a.shape} x {len(x)}")
    out = np.empty(a.shape[0], dtype=object)
    for i in range(a.shape[0]):
        out[i] = sum((a[i, j] * x[j] for j in range(a.shape[1])), 0)
    return out


def hstack(blocks: Sequence[np.ndarray], rows: int) -> np.ndarray:
    """Concatenate blocks horizontally; `rows` fixes the shape when blocks is empty."""
    blocks = [b for b in blocks if b.shape[1] > 0]
    for b in blocks:
        if b.shape[0] != rows:
            raise ValueError(f"Block with {b.shape[0]} rows, expected {rows}")
    if not blocks:
        return zeros(rows, 0)
    return np.concatenate(blocks, axis=1)


def vstack(blocks: Sequence[np.ndarray], cols: int) -> np.ndarray:
    blocks = [b for b in blocks if b.shape[0] > 0]
    for b in blocks:
        if b.shape[1] != cols:
            raise ValueError(f"Block with {b.shape[1]} columns, expected {cols}")
    if not blocks:
        return zeros(0, cols)
    return np.concatenate(blocks, axis=0)


def block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = zeros(rows, cols)
    i = j = 0
    for b in blocks:
        out[i:i + b.shape[0], j:j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


def is_zero(a: np.ndarray) -> bool:
    return all(x == 0 for x in a.flat)


def denominator_lcm(values: Iterable) -> int:
    return reduce(lambda acc, x: acc * Fraction(x).denominator // math.gcd(acc, Fraction(x).denominator), values, 1)


def frac_part(x: Fraction) -> Fraction:
    """x modulo 1, in [0, 1)."""
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def rational_inverse(m: np.ndarray) -> np.ndarray:
    """Exact inverse of a square nonsingular matrix, as Fractions."""
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError(f"Cannot invert a {m.shape} matrix")
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == r)) for i in range(n)]
           for r, row in enumerate(m.tolist())]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("Matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    out = zeros(n, n)
    for i in range(n):
        for j in range(n):
            out[i, j] = aug[i][n + j]
    return out


def solve_rational(a: np.ndarray, b: Sequence) -> Optional[np.ndarray]:
    """One rational solution of a @ x == b (free variables set to 0), or None."""
    n_eq, n = a.shape
    rows = [[Fraction(x) for x in a[i, :]] + [Fraction(b[i])] for i in range(n_eq)]
    pivot_cols = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, n_eq) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        rows[r] = [x / p for x in rows[r]]
        for i in range(n_eq):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivot_cols.append(col)
        r += 1
    if any(rows[i][n] != 0 for i in range(r, n_eq)):
        return None
    x = [Fraction(0)] * n
    for i, col in enumerate(pivot_cols):
        x[col] = rows[i][n]
    return rat_vector(x)


def unimodular_inverse(u: np.ndarray) -> np.ndarray:
    """Exact inverse of a unimodular integer matrix."""
    inv = rational_inverse(u)
    if any(Fraction(x).denominator != 1 for x in inv.flat):
        raise ValueError("Matrix is not unimodular")
    return int_matrix(inv)


# Hermite normal form

@dataclass(frozen=True)
class HermiteBasis:
    """Canonical column-style HNF basis of a sublattice of Z^N.

    Column j has its pivot at row pivots[j]; entries above a pivot are zero,
    pivots are positive and strictly increasing, and entries to the left of
    a pivot lie in [0, pivot).
    """
    ambient_rank: int
    columns: Tuple[Tuple[int, ...], ...]
    pivots: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def rank(self) -> int:
        return len(self.columns)

    @cached_property
    def _matrix(self) -> np.ndarray:
        return columns_matrix(self.columns, self.ambient_rank)

    @property
    def basis(self) -> np.ndarray:
        return self._matrix.copy()

    @property
    def key(self) -> Tuple[int, Tuple[Tuple[int, ...], ...]]:
        return (self.ambient_rank, self.columns)

    def is_full(self) -> bool:
        return self.rank == self.ambient_rank

    def determinant(self) -> int:
        """Index of a full-rank sublattice (product of pivots)."""
        if not self.is_full():
            raise ValueError("Index is infinite for a lower-rank sublattice")
        return math.prod(self.columns[j][p] for j, p in enumerate(self.pivots))

    def contains(self, vector: Sequence) -> bool:
        try:
            lattice_coordinates(self, columns_matrix([list(vector)], self.ambient_rank))
        except ValueError:
            return False
        return True

    def __str__(self) -> str:
        gens = ", ".join("(" + ",".join(str(x) for x in col) + ")" for col in self.columns)
        return f"<{gens}>"


def hnf(a: np.ndarray) -> HermiteBasis:
    """Canonical HNF basis of the column span of an integer matrix.

    Args:
        a: Integer matrix of shape N x m

    Returns:
        HermiteBasis of the sublattice generated by the columns of a
    """
    m = int_matrix(a) if a.dtype != object else a.copy()
    n_rows, n_cols = m.shape
    pivots: List[int] = []
    c = 0
    for i in range(n_rows):
        if c >= n_cols:
            break
        while True:
            nonzero = [j for j in range(c, n_cols) if m[i, j] != 0]
            if not nonzero:
                break
            s = min(nonzero, key=lambda j: (abs(m[i, j]), j))
            others = [j for j in nonzero if j != s]
            if not others:
                break
            for j in others:
                q = m[i, j] // m[i, s]
                m[:, j] = m[:, j] - q * m[:, s]
        nonzero = [j for j in range(c, n_cols) if m[i, j] != 0]
        if not nonzero:
            continue
        s = nonzero[0]
        if s != c:
            m[:, [c, s]] = m[:, [s, c]]
        if m[i, c] < 0:
            m[:, c] = -m[:, c]
        p = m[i, c]
        for j in range(c):
            q = m[i, j] // p
            if q:
                m[:, j] = m[:, j] - q * m[:, c]
        pivots.append(i)
        c += 1
    columns = tuple(tuple(int(m[r, j]) for r in range(n_rows)) for j in range(c))
    return HermiteBasis(n_rows, columns, tuple(pivots))


def zero_lattice(n: int) -> HermiteBasis:
    return HermiteBasis(n, (), ())


def full_lattice(n: int) -> HermiteBasis:
    return hnf(identity(n))


def lattice_coordinates(hb: HermiteBasis, vectors: np.ndarray, integral: bool = True) -> np.ndarray:
    """Coordinates c with basis @ c == vectors, by triangular solve on pivot rows.

    Raises:
        ValueError: if a vector is outside the span, or (integral=True) outside the lattice
    """
    basis = hb.basis
    k = vectors.shape[1]
    coords = zeros(hb.rank, k)
    for col in range(k):
        residual = [Fraction(x) for x in vectors[:, col]]
        for j, p in enumerate(hb.pivots):
            c = residual[p] / basis[p, j]
            if integral and c.denominator != 1:
                raise ValueError("Vector is not in the lattice")
            coords[j, col] = c.numerator if c.denominator == 1 else c
            if c:
                for r in range(p, hb.ambient_rank):
                    residual[r] -= c * basis[r, j]
        if any(x != 0 for x in residual):
            raise ValueError("Vector is not in the span of the lattice")
    return coords


def rational_coordinates(hb: HermiteBasis, vectors: np.ndarray) -> np.ndarray:
    return lattice_coordinates(hb, vectors, integral=False)


# Smith normal form

@dataclass(frozen=True, eq=False)
class SmithDecomposition:
    """u @ a @ v == s with u, v unimodular and s diagonal."""
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    invariants: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.invariants)


def _swap_rows(m: np.ndarray, i: int, j: int) -> None:
    if i != j:
        m[[i, j], :] = m[[j, i], :]


def _swap_cols(m: np.ndarray, i: int, j: int) -> None:
    if i != j:
        m[:, [i, j]] = m[:, [j, i]]


def snf(a: np.ndarray) -> SmithDecomposition:
    """Smith normal form with smallest-entry pivoting and explicit transforms."""
    s = int_matrix(a) if a.dtype != object else a.copy()
    rows, cols = s.shape
    u = identity(rows)
    v = identity(cols)
    invariants: List[int] = []
    for t in range(min(rows, cols)):
        candidates = [(abs(s[i, j]), i, j) for i in range(t, rows) for j in range(t, cols) if s[i, j] != 0]
        if not candidates:
            break
        _, pi, pj = min(candidates)
        _swap_rows(s, t, pi)
        _swap_rows(u, t, pi)
        _swap_cols(s, t, pj)
        _swap_cols(v, t, pj)
        while True:
            for i in range(t + 1, rows):
                q = s[i, t] // s[t, t]
                if q:
                    s[i, :] = s[i, :] - q * s[t, :]
                    u[i, :] = u[i, :] - q * u[t, :]
            for j in range(t + 1, cols):
                q = s[t, j] // s[t, t]
                if q:
                    s[:, j] = s[:, j] - q * s[:, t]
                    v[:, j] = v[:, j] - q * v[:, t]
            leftovers = [(abs(s[i, t]), 0, i) for i in range(t + 1, rows) if s[i, t] != 0]
            leftovers += [(abs(s[t, j]), 1, j) for j in range(t + 1, cols) if s[t, j] != 0]
            if leftovers:
                _, axis, idx = min(leftovers)
                if axis == 0:
                    _swap_rows(s, t, idx)
                    _swap_rows(u, t, idx)
                else:
                    _swap_cols(s, t, idx)
                    _swap_cols(v, t, idx)
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if s[i, j] % s[t, t] != 0), None)
            if bad is None:
                break
            # pull the offending row into the pivot row
            s[t, :] = s[t, :] + s[bad[0], :]
            u[t, :] = u[t, :] + u[bad[0], :]
        if s[t, t] < 0:
            s[t, :] = -s[t, :]
            u[t, :] = -u[t, :]
        invariants.append(int(s[t, t]))
    return SmithDecomposition(u, s, v, tuple(invariants))


def rank(a: np.ndarray) -> int:
    """Rank over Q by fraction-free elimination."""
    rows = [[int(x) for x in row] for row in a.tolist()] if a.size else []
    r = 0
    n_cols = a.shape[1]
    for col in range(n_cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        for i in range(r + 1, len(rows)):
            f = rows[i][col]
            if f:
                new = [p * x - f * y for x, y in zip(rows[i], rows[r])]
                g = reduce(math.gcd, new, 0)
                rows[i] = [x // g for x in new] if g > 1 else new
        r += 1
        if r == len(rows):
            break
    return r


def kernel_lattice(a: np.ndarray) -> HermiteBasis:
    """Lattice {x in Z^cols : a @ x == 0}."""
    d = snf(a)
    return hnf(d.v[:, d.rank:])


def kernel_basis(a: np.ndarray) -> np.ndarray:
    """HNF-canonical basis matrix of the integer kernel of a."""
    return kernel_lattice(a).basis


# Abelian groups

@dataclass(frozen=True)
class AbelianGroup:
    """Z^free_rank plus cyclic factors with orders d_1 | d_2 | ... (each > 1)."""
    free_rank: int
    torsion: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(t) for t in self.torsion))
        if self.free_rank < 0:
            raise ValueError(f"Negative free rank {self.free_rank}")
        for d in self.torsion:
            if d <= 1:
                raise ValueError(f"Invariant factor {d} must exceed 1")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise ValueError(f"Invariant factors {self.torsion} do not form a divisibility chain")

    @classmethod
    def from_orders(cls, free_rank: int, orders: Iterable[int]) -> "AbelianGroup":
        """Normalise Z^free_rank plus arbitrary cyclic orders into invariant factors."""
        orders = [int(o) for o in orders if int(o) != 1]
        if any(o <= 0 for o in orders):
            raise ValueError(f"Cyclic orders must be positive: {orders}")
        if not orders:
            return cls(free_rank, ())
        diag = zeros(len(orders), len(orders))
        for i, o in enumerate(orders):
            diag[i, i] = o
        invariants = snf(diag).invariants
        return cls(free_rank, tuple(d for d in invariants if d > 1))

    @classmethod
    def free(cls, n: int) -> "AbelianGroup":
        return cls(n, ())

    @property
    def rank(self) -> int:
        return self.free_rank

    def is_free(self) -> bool:
        return not self.torsion

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def torsion_part(self) -> "AbelianGroup":
        return AbelianGroup(0, self.torsion)

    def torsion_order(self) -> int:
        return math.prod(self.torsion)

    def direct_sum(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup.from_orders(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def elementary_divisors(self) -> List[int]:
        """Prime-power cyclic orders, sorted."""
        out = []
        for d in self.torsion:
            for p, e in factorint(d).items():
                out.append(int(p) ** int(e))
        return sorted(out)

    def to_dict(self) -> Dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    @classmethod
    def from_dict(cls, data: Dict) -> "AbelianGroup":
        return cls(int(data["free_rank"]), tuple(int(t) for t in data.get("torsion", [])))

    def __str__(self) -> str:
        if self.is_trivial():
            return "0"
        parts = []
        if self.free_rank == 1:
            parts.append("ℤ")
        elif self.free_rank > 1:
            parts.append(f"ℤ^{self.free_rank}")
        for d, group in itertools.groupby(self.torsion):
            k = len(list(group))
            parts.append(f"ℤ_{d}" if k == 1 else f"ℤ_{d}^{k}")
        return " ⊕ ".join(parts)


def cokernel(a: np.ndarray) -> AbelianGroup:
    """Z^rows / column span of a."""
    d = snf(a)
    return AbelianGroup(a.shape[0] - d.rank, tuple(x for x in d.invariants if x > 1))


# Sparse integer matrices

@dataclass(eq=False)
class SparseMatrix:
    """Integer matrix stored as {(row, col): value} with no explicit zeros."""
    rows: int
    cols: int
    entries: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def add(self, i: int, j: int, value: int) -> None:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"Entry ({i}, {j}) outside shape {self.shape}")
        new = self.entries.get((i, j), 0) + int(value)
        if new:
            self.entries[(i, j)] = new
        else:
            self.entries.pop((i, j), None)

    def add_block(self, row0: int, col0: int, block: np.ndarray, sign: int = 1) -> None:
        for (i, j), x in np.ndenumerate(block):
            if x:
                self.add(row0 + i, col0 + j, sign * x)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "SparseMatrix":
        out = cls(a.shape[0], a.shape[1])
        out.add_block(0, 0, a)
        return out

    def to_dense(self) -> np.ndarray:
        out = zeros(self.rows, self.cols)
        for (i, j), x in self.entries.items():
            out[i, j] = x
        return out

    def compose(self, other: "SparseMatrix") -> "SparseMatrix":
        """self @ other."""
        if self.cols != other.rows:
            raise ValueError(f"Shape mismatch {self.shape} x {other.shape}")
        by_row: Dict[int, List[Tuple[int, int]]] = {}
        for (k, j), y in other.entries.items():
            by_row.setdefault(k, []).append((j, y))
        out = SparseMatrix(self.rows, other.cols)
        for (i, k), x in self.entries.items():
            for j, y in by_row.get(k, ()):
                out.add(i, j, x * y)
        return out

    def is_zero(self) -> bool:
        return not self.entries


def smith_invariants(a) -> Tuple[int, Tuple[int, ...]]:
    """Rank and non-unit invariant factors of a dense or sparse integer matrix.

    Unit pivots are eliminated sparsely first; only the remaining block goes
    through the dense Smith form.
    """
    if isinstance(a, np.ndarray):
        a = SparseMatrix.from_dense(a)
    rows: Dict[int, Dict[int, int]] = {}
    cols: Dict[int, set] = {}
    for (i, j), x in a.entries.items():
        rows.setdefault(i, {})[j] = x
        cols.setdefault(j, set()).add(i)

    found = 0
    while True:
        best = None
        for i, row in rows.items():
            for j, x in row.items():
                if x == 1 or x == -1:
                    cost = (len(row) - 1) * (len(cols[j]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, i, j)
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, i, j = best
        pivot_row = rows.pop(i)
        v = pivot_row[j]
        for c in pivot_row:
            cols[c].discard(i)
        for k in list(cols[j]):
            row_k = rows[k]
            f = row_k[j] * v
            for c, y in pivot_row.items():
                new = row_k.get(c, 0) - f * y
                if new:
                    if c not in row_k:
                        cols[c].add(k)
                    row_k[c] = new
                elif c in row_k:
                    del row_k[c]
                    cols[c].discard(k)
            if not row_k:
                del rows[k]
        del cols[j]
        found += 1

    rest_rows = sorted(rows)
    rest_cols = sorted(c for c, members in cols.items() if members)
    if not rest_rows or not rest_cols:
        return found, ()
    row_pos = {r: n for n, r in enumerate(rest_rows)}
    col_pos = {c: n for n, c in enumerate(rest_cols)}
    dense = zeros(len(rest_rows), len(rest_cols))
    for r, row in rows.items():
        for c, x in row.items():
            dense[row_pos[r], col_pos[c]] = x
    invariants = snf(dense).invariants
    return found + len(invariants), tuple(x for x in invariants if x > 1)


def homology_group(dimension: int, incoming, outgoing) -> AbelianGroup:
    """ker(outgoing) / im(incoming) on a free module of the given dimension.

    incoming and outgoing may be None for a zero map.
    """
    in_rank, torsion = smith_invariants(incoming) if incoming is not None else (0, ())
    out_rank = smith_invariants(outgoing)[0] if outgoing is not None else 0
    return AbelianGroup.from_orders(dimension - in_rank - out_rank, torsion)


# Lattice operations

def _check_ambient(xs: Sequence[HermiteBasis]) -> int:
    ranks = {x.ambient_rank for x in xs}
    if len(ranks) > 1:
        raise ValueError(f"Ambient rank mismatch: {sorted(ranks)}")
    return ranks.pop()


def lattice_sum(xs: Sequence[HermiteBasis], ambient_rank: Optional[int] = None) -> HermiteBasis:
    if not xs:
        if ambient_rank is None:
            raise ValueError("Empty lattice sum needs an ambient rank")
        return zero_lattice(ambient_rank)
    n = _check_ambient(list(xs) + ([zero_lattice(ambient_rank)] if ambient_rank is not None else []))
    return hnf(hstack([x.basis for x in xs], n))


def lattice_intersection(x: HermiteBasis, y: HermiteBasis) -> HermiteBasis:
    n = _check_ambient([x, y])
    if x.rank == 0 or y.rank == 0:
        return zero_lattice(n)
    stacked = hstack([x.basis, -y.basis], n)
    k = kernel_basis(stacked)
    return hnf(matmul(x.basis, k[:x.rank, :]))


def saturate(x: HermiteBasis) -> HermiteBasis:
    """Z^N intersected with the rational span of x."""
    if x.rank == 0:
        return x
    normals = kernel_basis(x.basis.T.copy())
    return kernel_lattice(normals.T.copy())


def is_saturated(x: HermiteBasis) -> bool:
    return saturate(x) == x


def lattice_index(sub: HermiteBasis, sup: HermiteBasis) -> int:
    """Index [sup : sub] for sublattices of equal rank."""
    if sub.rank != sup.rank:
        raise ValueError("Index is infinite between lattices of different rank")
    coords = lattice_coordinates(sup, sub.basis)
    return abs(math.prod(snf(coords).invariants)) if sub.rank else 1


def solve_mod_lattice(a: np.ndarray, b: Sequence, l: Optional[HermiteBasis] = None
                      ) -> Optional[Tuple[np.ndarray, HermiteBasis]]:
    """Solve a @ x == b modulo the lattice l over integer unknowns x.

    Args:
        a: Rational matrix (rows x n)
        b: Rational vector of length rows
        l: Sublattice of Z^rows; None means the zero lattice (exact equation)

    Returns:
        (particular, homogeneous) where every solution is particular + h for
        h in homogeneous, or None when there is no integer solution
    """
    n_eq, n = a.shape
    if len(b) != n_eq:
        raise ValueError(f"Right-hand side of length {len(b)} for {n_eq} equations")
    if l is None:
        l = zero_lattice(n_eq)
    if l.ambient_rank != n_eq:
        raise ValueError("Modulus lattice lives in the wrong ambient rank")
    scale = denominator_lcm(itertools.chain(a.flat, b))
    system = zeros(n_eq, n + l.rank)
    for i in range(n_eq):
        for j in range(n):
            system[i, j] = int(Fraction(a[i, j]) * scale)
    lb = l.basis
    for i in range(n_eq):
        for j in range(l.rank):
            system[i, n + j] = -lb[i, j] * scale
    rhs = [int(Fraction(x) * scale) for x in b]

    d = snf(system)
    c = [sum(d.u[i, j] * rhs[j] for j in range(n_eq)) for i in range(n_eq)]
    y = [0] * system.shape[1]
    for i in range(n_eq):
        if i < d.rank:
            if c[i] % d.invariants[i] != 0:
                return None
            y[i] = c[i] // d.invariants[i]
        elif c[i] != 0:
            return None
    z = [sum(d.v[i, j] * y[j] for j in range(len(y))) for i in range(system.shape[1])]
    particular = rat_vector(z[:n])
    homogeneous = hnf(d.v[:n, d.rank:])
    return particular, homogeneous


# Group extensions

def _prime_exponents(orders: Iterable[int]) -> Dict[int, List[int]]:
    out: Dict[int, List[int]] = {}
    for o in orders:
        for p, e in factorint(o).items():
            out.setdefault(int(p), []).append(int(e))
    return {p: sorted(es) for p, es in out.items()}


def _extension_types(sub_exps: Tuple[int, ...], quot_exps: Tuple[int, ...], free_slots: int) -> set:
    """Exponent multisets of p-torsion in extensions of one prime block.

    Quotient factors may stay split, be partly absorbed by a free summand
    of the subgroup (consuming free_slots), or glue onto a subgroup factor.
    """
    memo = {}

    def walk(i: int, free_slots: int, remaining: Tuple[int, ...]) -> frozenset:
        state = (i, min(free_slots, len(quot_exps) - i), remaining)
        if state in memo:
            return memo[state]
        if i == len(quot_exps):
            result = frozenset([tuple(sorted(remaining))])
            memo[state] = result
            return result
        e = quot_exps[i]
        out = set()
        for rest in walk(i + 1, free_slots, remaining):
            out.add(tuple(sorted(rest + (e,))))
        if free_slots > 0:
            for smaller in range(e):
                for rest in walk(i + 1, free_slots - 1, remaining):
                    out.add(tuple(sorted(rest + ((smaller,) if smaller else ()))))
        for f in sorted(set(remaining)):
            idx = remaining.index(f)
            left = remaining[:idx] + remaining[idx + 1:]
            for k in range(min(e, f)):
                glued = tuple(x for x in (e + f - k, k) if x)
                for rest in walk(i + 1, free_slots, left):
                    out.add(tuple(sorted(rest + glued)))
        result = frozenset(out)
        memo[state] = result
        return result

    return set(walk(0, free_slots, tuple(sorted(sub_exps))))


def extension_candidates(sub: AbelianGroup, quotient: AbelianGroup) -> List[AbelianGroup]:
    """Isomorphism types E admitting 0 -> sub -> E -> quotient -> 0.

    The free quotient summand always splits off; torsion of the quotient
    either splits, shrinks into a free summand of sub, or glues onto a
    cyclic p-factor of sub.
    """
    free = sub.free_rank + quotient.free_rank
    if quotient.is_free():
        return [AbelianGroup(free, sub.torsion)]
    sub_p = _prime_exponents(sub.torsion)
    quot_p = _prime_exponents(quotient.torsion)
    per_prime = []
    for p in sorted(set(sub_p) | set(quot_p)):
        types = _extension_types(tuple(sub_p.get(p, [])), tuple(quot_p.get(p, [])), sub.free_rank)
        per_prime.append([[p ** e for e in exps] for exps in types])
    seen = set()
    out = []
    for combo in itertools.product(*per_prime):
        group = AbelianGroup.from_orders(free, [o for orders in combo for o in orders])
        if group not in seen:
            seen.add(group)
            out.append(group)
    return sorted(out, key=lambda g: (g.torsion_order(), g.torsion))


def quotient_types(torsion: AbelianGroup) -> List[AbelianGroup]:
    """All isomorphism types of quotients of a finite abelian group."""
    per_prime = []
    for p, exps in sorted(_prime_exponents(torsion.torsion).items()):
        ranges = [range(e + 1) for e in sorted(exps, reverse=True)]
        shapes = set()
        for shape in itertools.product(*ranges):
            if all(a >= b for a, b in zip(shape, shape[1:])):
                shapes.add(shape)
        per_prime.append([[p ** e for e in shape if e] for shape in shapes])
    seen = set()
    out = []
    for combo in itertools.product(*per_prime):
        group = AbelianGroup.from_orders(torsion.free_rank, [o for orders in combo for o in orders])
        if group not in seen:
            seen.add(group)
            out.append(group)
    return sorted(out, key=lambda g: (g.torsion_order(), g.torsion))
