"""
Cohomology of rational projection tilings via group homology of Γ.

Homological degree k corresponds to cohomological degree s = d - k.
Codimension 1 is closed form, codimension 2 reads everything off the maps
β_k: ⊕_α Λ_{k+1}Γ^α -> Λ_{k+1}Γ, and codimension 3 (nu = 2) assembles the
kernel/cokernel pieces of the φ', φ'' maps and the degree-0 extension.
"""

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Any, Dict, List, Optional

import numpy as np

from src.arrangement import Arrangement, counts
from src.exact_linalg import (
    AbelianGroup, block_diag, cokernel, extension_candidates, hnf, hstack,
    kernel_basis, kernel_lattice, lattice_coordinates, matmul, quotient_types,
    rank, zeros,
)
from src.exterior import exterior_power_map, generated_rank, relative_exterior_map
from src.utils import ConsistencyError, UnsupportedCodim


EXACT = "exact"
AMBIGUOUS = "ambiguous"

# Resolutions of H^3 extensions established outside this engine, keyed by scheme name.
RESOLUTIONS = {
    "danzer": (3, AbelianGroup(20), "resolved to ℤ^20 by a substitution-tiling computation; the extension is non-split"),
}
NOTES = {
    "dual_canonical_d6": (3, "at least one of the two extensions is non-trivial"),
}


def _jsonable(value):
    if isinstance(value, AbelianGroup):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class CohomologyResult:
    """Cohomology groups H^0..H^d with exactness status and diagnostics."""
    scheme: str
    dim: int
    method: str
    groups: Dict[int, AbelianGroup]
    status: Dict[int, str]
    candidates: Dict[int, List[AbelianGroup]] = field(default_factory=dict)
    annotations: Dict[int, str] = field(default_factory=dict)
    resolved: Dict[int, AbelianGroup] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    euler: Optional[int] = None

    def __post_init__(self):
        if self.euler is None:
            self.euler = self.alternating_rank_sum()

    def is_exact(self, s: int) -> bool:
        return self.status.get(s) == EXACT

    def free_rank(self, s: int) -> int:
        return self.groups[s].free_rank

    def candidate_set(self, s: int) -> List[AbelianGroup]:
        if self.is_exact(s):
            return [self.groups[s]]
        return list(self.candidates.get(s, []))

    def alternating_rank_sum(self) -> int:
        """Σ_k (-1)^k rank H^(d-k)."""
        return sum((-1) ** (self.dim - s) * g.free_rank for s, g in self.groups.items())

    def render(self, s: int) -> str:
        if self.is_exact(s):
            return str(self.groups[s])
        options = " | ".join(str(g) for g in self.candidate_set(s))
        if s in self.resolved:
            return f"{self.resolved[s]} (of {options})"
        return f"{{{options}}}"

    def table_row(self) -> Dict[str, str]:
        row = {"scheme": self.scheme}
        for s in range(self.dim, -1, -1):
            row[f"H^{s}"] = self.render(s)
        return row

    def to_dict(self) -> Dict:
        degrees = {}
        for s in range(self.dim + 1):
            g = self.groups[s]
            degrees[str(s)] = {
                "free_rank": g.free_rank,
                "torsion": list(g.torsion),
                "status": self.status[s],
                "candidates": [c.to_dict() for c in self.candidates.get(s, [])],
                "annotation": self.annotations.get(s, ""),
            }
            if s in self.resolved:
                degrees[str(s)]["resolved"] = self.resolved[s].to_dict()
        return {
            "scheme": self.scheme,
            "dim": self.dim,
            "method": self.method,
            "degrees": degrees,
            "diagnostics": _jsonable(self.diagnostics),
            "euler": self.euler,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CohomologyResult":
        groups, status, candidates, annotations, resolved = {}, {}, {}, {}, {}
        for key, entry in data["degrees"].items():
            s = int(key)
            groups[s] = AbelianGroup.from_dict(entry)
            status[s] = entry["status"]
            if entry.get("candidates"):
                candidates[s] = [AbelianGroup.from_dict(c) for c in entry["candidates"]]
            if entry.get("annotation"):
                annotations[s] = entry["annotation"]
            if "resolved" in entry:
                resolved[s] = AbelianGroup.from_dict(entry["resolved"])
        return cls(data["scheme"], data["dim"], data["method"], groups, status, candidates,
                   annotations, resolved, dict(data.get("diagnostics", {})), data.get("euler"))


@dataclass
class DiagramMaps:
    """Integer matrices of the maps feeding the codimension 2 and 3 pipelines."""
    beta: Dict[int, np.ndarray] = field(default_factory=dict)
    beta0_points: Optional[np.ndarray] = None
    phi_prime: Dict[int, np.ndarray] = field(default_factory=dict)
    gamma: Dict[int, np.ndarray] = field(default_factory=dict)
    beta_alpha: List[np.ndarray] = field(default_factory=list)
    iota: List[np.ndarray] = field(default_factory=list)
    j_alpha: List[np.ndarray] = field(default_factory=list)
    kernel_alpha: List[np.ndarray] = field(default_factory=list)
    kernel_gamma: Optional[Any] = None
    phi_double_prime: Optional[np.ndarray] = None


def wedge_stack(lattices, k: int, n: int) -> np.ndarray:
    """Horizontal concatenation of Λ_k of each inclusion into Λ_k Z^n."""
    if k > n:
        return zeros(0, 0)
    return hstack([exterior_power_map(l, k).matrix for l in lattices], comb(n, k))


def _incidence_matrix(targets: List[int], size: int) -> np.ndarray:
    m = zeros(size, len(targets))
    for j, t in enumerate(targets):
        m[t, j] = 1
    return m


def _free_kernel_rank(m: np.ndarray) -> int:
    return m.shape[1] - rank(m)


# Codimension 1

def codim1(arr: Arrangement, d: Optional[int] = None, name: str = "") -> CohomologyResult:
    """Closed-form cohomology of a codimension-one scheme."""
    if arr.codim != 1:
        raise UnsupportedCodim(f"codim1 pipeline needs codimension 1, got {arr.codim}")
    d = arr.ambient_rank - 1 if d is None else d
    l0 = len(arr.levels[0])
    groups = {}
    for k in range(d + 1):
        free = l0 + d if k == 0 else comb(d + 1, k + 1)
        groups[d - k] = AbelianGroup(free)
    return CohomologyResult(name or arr.name, d, "fhk", groups, {s: EXACT for s in groups})


# Codimension 2

def codim2_maps(arr: Arrangement) -> DiagramMaps:
    n = arr.ambient_rank
    alphas = [c.dir for c in arr.levels[1]]
    maps = DiagramMaps()
    for k in range(n):
        maps.beta[k] = wedge_stack(alphas, k + 1, n)
    l0 = len(arr.levels[0])
    blocks = []
    for i in range(len(alphas)):
        targets = [inc.target for inc in arr.incidences(1, i, 0)]
        if len(targets) < 2:
            continue
        diffs = zeros(l0, len(targets) - 1)
        for j in range(1, len(targets)):
            diffs[targets[j], j - 1] += 1
            diffs[targets[0], j - 1] -= 1
        blocks.append(diffs[1:, :])
    maps.beta0_points = hstack(blocks, max(l0 - 1, 0))
    return maps


def codim2(arr: Arrangement, maps: Optional[DiagramMaps] = None, name: str = "") -> CohomologyResult:
    """H^(d-k) = coker β_(k+1) ⊕ ker β_k, with the degree-0 kernel from the point data."""
    if arr.codim != 2:
        raise UnsupportedCodim(f"codim2 pipeline needs codimension 2, got {arr.codim}")
    maps = maps or codim2_maps(arr)
    n = arr.ambient_rank
    d = n - 2
    groups = {}
    for k in range(d + 1):
        coker = cokernel(maps.beta[k + 1])
        if k >= 1:
            kernel_rank = _free_kernel_rank(maps.beta[k])
        else:
            b0 = maps.beta[0]
            r0 = rank(b0)
            bp = maps.beta0_points
            rp = rank(bp)
            kernel_rank = (b0.shape[1] - r0) + (bp.shape[1] - rp) - (b0.shape[0] - r0) - (bp.shape[0] - rp)
        groups[d - k] = coker.direct_sum(AbelianGroup(kernel_rank))
    return CohomologyResult(name or arr.name, d, "fhk", groups, {s: EXACT for s in groups})


def codim2_rank_check(arr: Arrangement, maps: Optional[DiagramMaps], result: CohomologyResult) -> Dict:
    """Compare direct ranks with the closed-form rank and Euler formulas."""
    nu = arr.nu
    n = arr.ambient_rank
    d = result.dim
    alphas = [c.dir for c in arr.levels[1]]
    l1 = len(alphas)
    table = counts(arr)
    big_r = {k: generated_rank([exterior_power_map(a, k + 1) for a in alphas]) if k + 1 <= n else 0
             for k in range(d + 2)}
    euler = -table["L"][0] + table["sum_L0_alpha"]
    rows = []
    failures = []
    for k in range(d + 1):
        if k > 0:
            formula = comb(2 * nu, 2 + k) + l1 * comb(nu, 1 + k) - big_r[k] - big_r[k + 1]
        else:
            formula = (sum((-1) ** j * comb(2 * nu, 2 - j) for j in range(3))
                       + l1 * sum((-1) ** j * comb(nu, 1 - j) for j in range(2))
                       + euler - big_r[1])
        direct = result.free_rank(d - k)
        rows.append({"k": k, "degree": d - k, "direct": direct, "formula": formula})
        if direct != formula:
            failures.append(f"H^{d - k}: direct rank {direct} != formula {formula}")
    if result.alternating_rank_sum() != euler:
        failures.append(f"Euler characteristic {result.alternating_rank_sum()} != {euler}")
    return {"ok": not failures, "failures": failures, "rows": rows, "R": big_r, "euler": euler}


# Codimension 3

def codim3_maps(arr: Arrangement) -> DiagramMaps:
    n = arr.ambient_rank
    planes = arr.levels[2]
    lines = arr.levels[1]
    maps = DiagramMaps()
    for s in range(4):
        maps.phi_prime[s] = wedge_stack([c.dir for c in planes], s + 2, n)
    maps.gamma[0] = hstack([c.dir.basis for c in lines], n)
    maps.gamma[1] = wedge_stack([c.dir for c in lines], 2, n)
    for i, alpha in enumerate(planes):
        incs = arr.incidences(2, i, 1)
        cols = [relative_exterior_map(lines[inc.target].dir, alpha.dir, 2) for inc in incs]
        beta = hstack(cols, comb(alpha.dir.rank, 2))
        maps.beta_alpha.append(beta)
        maps.iota.append(exterior_power_map(alpha.dir, 2).matrix)
        maps.j_alpha.append(_incidence_matrix([inc.target for inc in incs], len(lines)))
        maps.kernel_alpha.append(kernel_basis(beta))
    maps.kernel_gamma = kernel_lattice(maps.gamma[1])
    blocks = []
    for j_mat, k_mat in zip(maps.j_alpha, maps.kernel_alpha):
        if k_mat.shape[1]:
            blocks.append(lattice_coordinates(maps.kernel_gamma, matmul(j_mat, k_mat)))
    maps.phi_double_prime = hstack(blocks, maps.kernel_gamma.rank)
    return maps


def check_diagram(maps: DiagramMaps) -> List[str]:
    """ι^α ∘ β^α = γ_1 ∘ j^α for every plane class; returns violations."""
    failures = []
    for i, (iota, beta, j_mat) in enumerate(zip(maps.iota, maps.beta_alpha, maps.j_alpha)):
        left = matmul(iota, beta)
        right = matmul(maps.gamma[1], j_mat)
        if left.shape != right.shape or not (left == right).all():
            failures.append(f"square for plane class {i} does not commute")
    return failures


def _ker_phi0_prime(maps: DiagramMaps, n: int) -> AbelianGroup:
    """ker(⊕_α coker β^α_1 -> coker γ_1) as a finitely generated group."""
    f = maps.phi_prime[0]
    width = f.shape[1]
    stacked = hstack([f, -maps.gamma[1]], comb(n, 2))
    kernel = kernel_basis(stacked)
    preimage = hnf(kernel[:width, :])
    relations = block_diag(maps.beta_alpha)
    if relations.shape[0] != width:
        relations = zeros(width, 0)
    coords = lattice_coordinates(preimage, relations) if relations.shape[1] else zeros(preimage.rank, 0)
    return cokernel(coords)


def codim3(arr: Arrangement, maps: Optional[DiagramMaps] = None, name: str = "",
           coker_alpha: Optional[AbelianGroup] = None) -> CohomologyResult:
    """Codimension 3, nu = 2: exact H^0..H^2 and the H^3 extension candidates.

    When coker φ′₁ carries torsion, im Δ₁ is pinned by coker α_3 = coker φ′₁ / im Δ₁
    from the torus arrangement route (computed here unless given).
    """
    if arr.codim != 3 or arr.nu != 2:
        raise UnsupportedCodim(f"codim3 pipeline needs codimension 3 with nu = 2, got codim {arr.codim}, nu {arr.nu}")
    name = name or arr.name
    maps = maps or codim3_maps(arr)
    n = arr.ambient_rank
    d = 3
    table = counts(arr)
    l_theta = table["L_theta"]
    planes, lines = arr.levels[2], arr.levels[1]

    phi2 = maps.phi_prime[2]
    phi1 = maps.phi_prime[1]
    phi1pp = maps.phi_double_prime

    h0 = AbelianGroup(1)
    h1 = cokernel(maps.phi_prime[3]).direct_sum(AbelianGroup(_free_kernel_rank(phi2)))
    h2 = cokernel(phi2).direct_sum(AbelianGroup(_free_kernel_rank(phi1) + _free_kernel_rank(phi1pp)))

    coker_phi1p = cokernel(phi1)
    coker_phi1pp = cokernel(phi1pp)
    t1p = coker_phi1p.torsion_part()
    t1pp = coker_phi1pp.torsion_part()
    t0p = _ker_phi0_prime(maps, n).torsion_part()

    l0_theta = [l_theta.get((1, t), {}).get(0, 0) for t in range(len(lines))]
    ker_phi0_rank = 0
    for i, alpha in enumerate(planes):
        incs = arr.incidences(2, i, 1)
        l0_alpha = l_theta.get((2, i), {}).get(0, 0)
        ker_beta0 = sum(1 + l0_theta[inc.target] for inc in incs) - (3 + l0_alpha)
        ker_phi0_rank += (comb(4, 2) - rank(maps.beta_alpha[i])) + ker_beta0
    ker_gamma0 = sum(1 + x for x in l0_theta) - (5 + table["L"][0])
    ker_phi0_rank -= (comb(n, 2) - rank(maps.gamma[1])) + ker_gamma0
    ker_phi0 = AbelianGroup(ker_phi0_rank, t0p.torsion)

    delta_image, delta_candidates, coker_alpha3 = None, [], None
    if t1p.is_trivial():
        subs = [coker_phi1p]
        delta_image, delta_candidates = AbelianGroup(0), [AbelianGroup(0)]
        delta = "Δ₁ = 0 (coker φ′₁ is torsion free)"
    else:
        if coker_alpha is None:
            from src.torus_mv import coker_alpha as torus_coker_alpha
            coker_alpha = torus_coker_alpha(arr, 3)
        coker_alpha3 = coker_alpha
        if coker_alpha3 is None:
            subs = [AbelianGroup.from_orders(coker_phi1p.free_rank, q.torsion) for q in quotient_types(t1p)]
            delta_candidates = quotient_types(t1p)
            delta = f"im Δ₁ undetermined inside {t1p}; all quotients of coker φ′₁ enumerated"
        else:
            quotient = coker_alpha3.torsion_part()
            if coker_alpha3.free_rank != coker_phi1p.free_rank or quotient not in quotient_types(t1p):
                raise ConsistencyError(f"coker α_3 = {coker_alpha3} is not a quotient of coker φ′₁ = {coker_phi1p}")
            subs = [coker_alpha3]
            delta_candidates = [k for k in quotient_types(t1p) if t1p in extension_candidates(k, quotient)]
            if len(delta_candidates) == 1:
                delta_image = delta_candidates[0]
            delta = f"im Δ₁ ≅ {' or '.join(str(k) for k in delta_candidates)} inside {t1p}, from coker α_3 = {coker_alpha3}"
    coker_phi1 = []
    for sub in subs:
        for c in extension_candidates(sub, coker_phi1pp):
            if c not in coker_phi1:
                coker_phi1.append(c)
    h3_candidates = []
    for c in coker_phi1:
        for e in extension_candidates(c, ker_phi0):
            if e not in h3_candidates:
                h3_candidates.append(e)
    h3_candidates.sort(key=lambda g: (g.torsion_order(), g.torsion))

    groups = {0: h0, 1: h1, 2: h2}
    status = {0: EXACT, 1: EXACT, 2: EXACT}
    candidates = {}
    if len(h3_candidates) == 1:
        groups[3] = h3_candidates[0]
        status[3] = EXACT
    else:
        groups[3] = AbelianGroup(h3_candidates[0].free_rank)
        status[3] = AMBIGUOUS
        candidates[3] = h3_candidates

    annotations, resolved = {}, {}
    if name in RESOLUTIONS:
        degree, value, text = RESOLUTIONS[name]
        if value in h3_candidates:
            resolved[degree] = value
            annotations[degree] = text
    if name in NOTES:
        degree, text = NOTES[name]
        annotations[degree] = f"{text}; extension quotient ker φ₀ = {ker_phi0}"

    diagnostics = {
        "t1_prime": t1p,
        "t1_double_prime": t1pp,
        "t0_prime": t0p,
        "delta": delta,
        "delta_image": delta_image,
        "delta_image_candidates": [str(k) for k in delta_candidates],
        "coker_alpha3": coker_alpha3,
        "coker_phi1_prime": coker_phi1p,
        "coker_phi1_double_prime": coker_phi1pp,
        "coker_phi1_candidates": [str(c) for c in coker_phi1],
        "ker_phi0": ker_phi0,
        "extension_quotient": str(ker_phi0),
    }
    return CohomologyResult(name, d, "fhk", groups, status, candidates, annotations, resolved, diagnostics)


def codim3_rank_check(arr: Arrangement, maps: Optional[DiagramMaps], result: CohomologyResult) -> Dict:
    """Rational ranks against the closed-form formulas with rk Δ_s = 0."""
    maps = maps or codim3_maps(arr)
    table = counts(arr)
    l = table["L"]
    l2, l1 = l[2], l[1]
    s_l1_alpha = table["sum_L1_alpha"]
    euler = l[0] - table["sum_L0_alpha"] + table["sum_sum_L0_theta"] - table["sum_L0_theta"]

    def phi_pp_rank(s: int) -> int:
        return rank(maps.phi_double_prime) if s == 1 else 0

    big_r = {}
    for s in range(1, 5):
        planes = [exterior_power_map(c.dir, s + 2) for c in arr.levels[2]] if s + 2 <= 6 else []
        beta_rank = sum(rank(b) for b in maps.beta_alpha) if s == 1 else 0
        lines = [exterior_power_map(c.dir, s + 2) for c in arr.levels[1]] if s + 2 <= 6 else []
        big_r[s] = generated_rank(planes) + beta_rank + phi_pp_rank(s) + generated_rank(lines)
    rows, failures = [], []
    for s in range(4):
        if s > 0:
            formula = (comb(6, s + 3) + l2 * comb(4, s + 2) + s_l1_alpha * comb(2, s + 1)
                       + l1 * comb(2, s + 2) - big_r[s] - big_r[s + 1])
        else:
            formula = 10 + 3 * l2 + s_l1_alpha + euler - big_r[1]
        direct = result.free_rank(3 - s)
        rows.append({"s": s, "degree": 3 - s, "direct": direct, "formula": formula})
        if direct != formula:
            failures.append(f"H^{3 - s}: direct rank {direct} != formula {formula}")
    if result.alternating_rank_sum() != euler:
        failures.append(f"Euler characteristic {result.alternating_rank_sum()} != {euler}")
    return {"ok": not failures, "failures": failures, "rows": rows, "R": big_r, "euler": euler}


# Checks and K-theory

def low_degree_check(result: CohomologyResult, n: int, nu: int) -> Dict:
    """H^s must be free of rank C(N, s) for s < nu - 1."""
    failures = []
    for s in range(min(nu - 1, result.dim + 1)):
        expected = AbelianGroup(comb(n, s))
        if not result.is_exact(s) or result.groups[s] != expected:
            failures.append(f"H^{s} = {result.render(s)}, expected {expected}")
    return {"ok": not failures, "failures": failures}


def torsion_bounds_check(result: CohomologyResult, nu: int, codim: int) -> Dict:
    """No torsion where the structure theorems forbid it."""
    d = result.dim
    if codim == 1:
        free_degrees = range(d + 1)
    elif codim == 2:
        free_degrees = [d - k for k in range(d + 1) if 2 * k >= d]
    else:
        free_degrees = [d - k for k in range(d + 1) if k >= 2 * (nu - 1)]
    failures = []
    for s in free_degrees:
        if any(not g.is_free() for g in result.candidate_set(s)) and result.is_exact(s):
            failures.append(f"H^{s} = {result.render(s)} has torsion")
    return {"ok": not failures, "failures": failures, "free_degrees": sorted(free_degrees)}


@dataclass
class KTheory:
    k0: AbelianGroup
    k1: AbelianGroup
    k0_candidates: List[AbelianGroup] = field(default_factory=list)
    k1_candidates: List[AbelianGroup] = field(default_factory=list)
    k0_resolved: Optional[AbelianGroup] = None
    k1_resolved: Optional[AbelianGroup] = None
    annotation: str = ""

    def render(self, which: int) -> str:
        value, options, resolved = ((self.k0, self.k0_candidates, self.k0_resolved) if which == 0
                                    else (self.k1, self.k1_candidates, self.k1_resolved))
        if not options:
            return str(value)
        text = " | ".join(str(g) for g in options)
        return f"{resolved} (of {text})" if resolved else f"{{{text}}}"


def k_theory(result: CohomologyResult, d: Optional[int] = None) -> KTheory:
    """K^0 = ⊕ H^even, K^1 = ⊕ H^odd; every ambiguous degree propagates into its parity."""
    d = result.dim if d is None else d
    if d > 3:
        raise UnsupportedCodim(f"K-theory assembly is limited to dimension ≤ 3, got {d}")
    parts = {0: [], 1: []}
    for s in range(d + 1):
        parts[s % 2].append(s)
    out = {}
    notes = list(result.annotations.values())
    for parity, degrees in parts.items():
        fixed = AbelianGroup(0)
        open_degrees = []
        for s in degrees:
            if result.is_exact(s):
                fixed = fixed.direct_sum(result.groups[s])
            else:
                open_degrees.append(s)
        if not open_degrees:
            out[parity] = (fixed, [], None)
            continue
        options = []
        for combo in itertools.product(*(result.candidate_set(s) for s in open_degrees)):
            total = fixed
            for g in combo:
                total = total.direct_sum(g)
            if total not in options:
                options.append(total)
        options.sort(key=lambda g: (g.torsion_order(), g.torsion))
        resolved = None
        if all(s in result.resolved for s in open_degrees):
            resolved = fixed
            for s in open_degrees:
                resolved = resolved.direct_sum(result.resolved[s])
        out[parity] = (AbelianGroup(options[0].free_rank), options, resolved)
        notes.append(f"K^{parity} open through " + ", ".join(f"H^{s}" for s in open_degrees))
    annotation = "; ".join(notes)
    return KTheory(out[0][0], out[1][0], out[0][1], out[1][1], out[0][2], out[1][2], annotation)


def fhk_cohomology(arr: Arrangement, name: str = "") -> CohomologyResult:
    """Dispatch to the pipeline matching the codimension."""
    if arr.codim == 1:
        return codim1(arr, name=name)
    if arr.codim == 2:
        return codim2(arr, name=name)
    if arr.codim == 3:
        return codim3(arr, name=name)
    raise UnsupportedCodim(f"No cohomology pipeline for codimension {arr.codim}")


def rank_check(arr: Arrangement, result: CohomologyResult) -> Dict:
    if arr.codim == 2:
        return codim2_rank_check(arr, None, result)
    if arr.codim == 3:
        return codim3_rank_check(arr, None, result)
    return {"ok": True, "failures": [], "rows": []}
