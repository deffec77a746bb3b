"""
Torus arrangement route.

The union 𝔸 of the subtori T^X = V_X / Γ^X inside 𝕋 = R^N / Z^N is the
colimit of the inclusion poset of classes, so H_*(𝔸) comes from the
Mayer-Vietoris spectral sequence with E¹_{p,q} = ⊕ Λ_q Γ^(min σ) over chains
σ of p+1 classes. H^(N-r)(Ω) ≅ H_r(𝕋, 𝔸) then sits in

    0 -> coker α_r -> H^(N-r)(Ω) -> ker α_(r-1) -> 0

with α_r: H_r(𝔸) -> Λ_r Z^N.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.arrangement import Arrangement
from src.cohomology import AMBIGUOUS, EXACT, NOTES, RESOLUTIONS, CohomologyResult
from src.exact_linalg import (
    AbelianGroup, SparseMatrix, extension_candidates, hnf, homology_group, hstack,
    identity, quotient_types, smith_invariants, zeros,
)
from src.exterior import WedgeIndex, exterior_power_map, relative_exterior_map, wedge_with_vector
from src.utils import ConsistencyError, RouteDisagreement, UnsupportedCodim, print_ts


Element = Tuple[int, int]
Chain = Tuple[Element, ...]


@dataclass
class MVPage:
    """E¹ page: chains per column, block layout per entry and the d¹ maps.

    d1[(p, q)] maps E¹_{p,q} to E¹_{p-1,q}.
    """
    scheme: str
    ambient_rank: int
    codim: int
    nu: int
    ranks: Dict[Element, int]
    chains: Dict[int, List[Chain]]
    blocks: Dict[Tuple[int, int], Dict[Chain, Tuple[int, int]]] = field(default_factory=dict)
    d1: Dict[Tuple[int, int], SparseMatrix] = field(default_factory=dict)

    @property
    def columns(self) -> range:
        return range(len(self.chains))

    @property
    def rows(self) -> range:
        return range(max(self.ranks.values(), default=0) + 1)

    def dim(self, p: int, q: int) -> int:
        return sum(size for _, size in self.blocks.get((p, q), {}).values())

    def basis(self, p: int, q: int) -> List[Tuple[Chain, Tuple[int, ...]]]:
        """Labels (chain, wedge subset) in matrix order."""
        out = []
        for chain in self.chains.get(p, []):
            out.extend((chain, s) for s in WedgeIndex(self.ranks[chain[-1]], q).subsets)
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** (p + q) * self.dim(p, q) for p in self.columns for q in self.rows)

    def to_dict(self, verbose: bool = False) -> Dict:
        out = {
            "scheme": self.scheme,
            "ranks": {f"{p},{q}": self.dim(p, q) for p in self.columns for q in self.rows},
            "chains": {str(p): len(c) for p, c in self.chains.items()},
        }
        if verbose:
            out["d1"] = {
                f"{p},{q}": {"shape": list(m.shape), "entries": [[i, j, v] for (i, j), v in sorted(m.entries.items())]}
                for (p, q), m in sorted(self.d1.items())
            }
        return out


@dataclass
class ArrangementHomology:
    """H_n(𝔸) per degree, with E² and the filtration bookkeeping."""
    groups: Dict[int, AbelianGroup]
    status: Dict[int, str]
    candidates: Dict[int, List[AbelianGroup]] = field(default_factory=dict)
    e2: Dict[Tuple[int, int], AbelianGroup] = field(default_factory=dict)
    e_infinity: Dict[Tuple[int, int], AbelianGroup] = field(default_factory=dict)
    d2_rank: int = 0
    notes: List[str] = field(default_factory=list)

    def rank(self, n: int) -> int:
        g = self.groups.get(n)
        return g.free_rank if g is not None else 0

    def candidate_set(self, n: int) -> List[AbelianGroup]:
        if n not in self.groups:
            return [AbelianGroup(0)]
        if self.status[n] == EXACT:
            return [self.groups[n]]
        return list(self.candidates[n])

    def higher_filtration_trivial(self, n: int) -> bool:
        """True when H_n(𝔸) is entirely carried by single tori (E^∞_{p,n-p} = 0 for p >= 1)."""
        return all(g.is_trivial() for (p, q), g in self.e_infinity.items() if p >= 1 and p + q == n)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * g.free_rank for n, g in self.groups.items())


@dataclass
class AlphaData:
    """Image, kernel and cokernel data of α_r: H_r(𝔸) -> Λ_r Z^N."""
    image_rank: Dict[int, int]
    image_torsion: Dict[int, AbelianGroup]
    s: Dict[int, int]
    f: Dict[int, int]
    cokernel: Dict[int, List[AbelianGroup]]
    kernel: Dict[int, List[AbelianGroup]]
    image_exact: List[int] = field(default_factory=list)

    def torsion(self, r: int) -> AbelianGroup:
        """Torsion of Λ_r Z^N / ⟨Λ_r Γ^X⟩, an upper bound for the torsion of coker α_r."""
        return self.image_torsion[r]

    def to_dict(self) -> Dict:
        return {
            "image_rank": {str(r): v for r, v in self.image_rank.items()},
            "s": {str(r): v for r, v in self.s.items()},
            "f": {str(r): v for r, v in self.f.items()},
            "T": {str(r): str(g) for r, g in self.image_torsion.items()},
            "coker_alpha": {str(r): [str(g) for g in gs] for r, gs in self.cokernel.items()},
            "ker_alpha": {str(r): [str(g) for g in gs] for r, gs in self.kernel.items()},
            "coker_exact": list(self.image_exact),
        }


def _check_supported(arr: Arrangement) -> None:
    if arr.codim > 3 or (arr.codim == 3 and arr.nu != 2):
        raise UnsupportedCodim(
            f"Torus arrangement route covers codimension ≤ 2 and codimension 3 with nu = 2, "
            f"got codim {arr.codim}, nu {arr.nu}")


def _elements(arr: Arrangement) -> List[Element]:
    return [(k, i) for k in range(len(arr.levels) - 1, -1, -1) for i in range(len(arr.levels[k]))]


def _chains(arr: Arrangement) -> Dict[int, List[Chain]]:
    below: Dict[Element, List[Element]] = {}
    for k, i in _elements(arr):
        below[(k, i)] = [(r, inc.target) for r in range(k - 1, -1, -1) for inc in arr.incidences(k, i, r)]
    chains = {0: [(x,) for x in _elements(arr)]}
    p = 0
    while True:
        longer = [c + (y,) for c in chains[p] for y in below[c[-1]]]
        if not longer:
            break
        p += 1
        chains[p] = longer
    return chains


def build_e1(arr: Arrangement, verbose: bool = False) -> MVPage:
    """First page of the Mayer-Vietoris spectral sequence for H_*(𝔸).

    Face i of a chain with p+1 entries carries the sign (-1)^(p-i). Dropping
    the last entry maps through Λ_q of the stabilizer inclusion; any other
    face keeps the minimum and maps by the identity.

    Raises:
        UnsupportedCodim: outside codimension ≤ 2 and codimension 3 with nu = 2
        ConsistencyError: if d¹ ∘ d¹ != 0
    """
    _check_supported(arr)
    ranks = {(k, i): arr.levels[k][i].dir.rank for k, i in _elements(arr)}
    page = MVPage(arr.name, arr.ambient_rank, arr.codim, arr.nu, ranks, _chains(arr))
    for p in page.columns:
        for q in page.rows:
            layout, start = {}, 0
            for chain in page.chains[p]:
                size = comb(ranks[chain[-1]], q) if q <= ranks[chain[-1]] else 0
                layout[chain] = (start, size)
                start += size
            page.blocks[(p, q)] = layout

    inclusions: Dict[Tuple[Element, Element, int], np.ndarray] = {}

    def inclusion(sub: Element, sup: Element, q: int) -> np.ndarray:
        key = (sub, sup, q)
        if key not in inclusions:
            inclusions[key] = relative_exterior_map(arr.levels[sub[0]][sub[1]].dir,
                                                    arr.levels[sup[0]][sup[1]].dir, q)
        return inclusions[key]

    for p in page.columns:
        if p == 0:
            continue
        for q in page.rows:
            source, target = page.blocks[(p, q)], page.blocks[(p - 1, q)]
            d = SparseMatrix(page.dim(p - 1, q), page.dim(p, q))
            for chain, (col, size) in source.items():
                if not size:
                    continue
                for i in range(p + 1):
                    face = chain[:i] + chain[i + 1:]
                    sign = (-1) ** (p - i)
                    if face not in target:
                        raise ConsistencyError(f"Chain {chain} of {arr.name} has a face {face} outside the poset")
                    row = target[face][0]
                    block = inclusion(chain[p], chain[p - 1], q) if i == p else identity(size)
                    d.add_block(row, col, block, sign)
            page.d1[(p, q)] = d

    for (p, q), d in page.d1.items():
        if (p - 1, q) in page.d1 and not page.d1[(p - 1, q)].compose(d).is_zero():
            raise ConsistencyError(f"d¹ ∘ d¹ != 0 at E¹_{p},{q} of {arr.name}")
    if verbose:
        print_ts(f"📊 {arr.name}: E¹ page " + ", ".join(
            f"E¹_{p},{q}={page.dim(p, q)}" for p in page.columns for q in page.rows if page.dim(p, q)))
    return page


def d1_12(arr: Arrangement, page: Optional[MVPage] = None) -> np.ndarray:
    """d¹_{1,2}: ⊕_α ⊕_{θ in I_1^α} Λ_2 Γ^θ -> (⊕_α Λ_2 Γ^α) ⊕ (⊕_θ Λ_2 Γ^θ) ⊕ ...

    +Λ_2 of the inclusion into the α block and -identity into the θ block.
    """
    page = page or build_e1(arr)
    d = page.d1.get((1, 2))
    if d is None:
        return zeros(page.dim(0, 2), 0)
    return d.to_dense()


def homology_of_A(page: MVPage) -> ArrangementHomology:
    """H_n(𝔸) from E² (which is E^∞ up to d²_{2,0}).

    In codimension 3 the only possible d² is d²_{2,0}: E²_{2,0} -> E²_{0,1}; its
    rank is fixed by H_1(𝔸) ≅ Z^N. Homology of 𝔸 in degrees 0, 1, 3 and 4 is
    torsion free there, which also settles filtration extensions.

    Raises:
        ConsistencyError: on a violated rank bound or torsion where none can occur
    """
    e2 = {}
    for p in page.columns:
        for q in page.rows:
            e2[(p, q)] = homology_group(page.dim(p, q), page.d1.get((p + 1, q)), page.d1.get((p, q)))
    e_inf = dict(e2)
    notes = []
    d2_rank = 0
    if page.codim == 3 and (2, 0) in e2 and e2[(2, 0)].free_rank:
        d2_rank = e2[(0, 1)].free_rank + e2[(1, 0)].free_rank - page.ambient_rank
        if not 0 <= d2_rank <= min(e2[(2, 0)].free_rank, e2[(0, 1)].free_rank):
            raise ConsistencyError(
                f"rank d²_2,0 = {d2_rank} is impossible for E²_2,0 = {e2[(2, 0)]}, E²_0,1 = {e2[(0, 1)]}")
        e_inf[(0, 1)] = AbelianGroup(e2[(0, 1)].free_rank - d2_rank)
        e_inf[(2, 0)] = AbelianGroup(e2[(2, 0)].free_rank - d2_rank)
        notes.append(f"rank d²_2,0 = {d2_rank} from H_1(𝔸) ≅ Z^{page.ambient_rank}")

    groups, status, candidates = {}, {}, {}
    torsion_free = {0, 1, 3, 4} if page.codim == 3 else set()
    for n in page.rows:
        options = [e_inf.get((0, n), AbelianGroup(0))]
        for p in page.columns:
            if p == 0 or n - p < 0:
                continue
            piece = e_inf.get((p, n - p), AbelianGroup(0))
            if piece.is_trivial():
                continue
            extended = []
            for sub in options:
                for g in extension_candidates(sub, piece):
                    if g not in extended:
                        extended.append(g)
            options = extended
        if n in torsion_free:
            free = [g for g in options if g.is_free()]
            if not free:
                raise ConsistencyError(f"H_{n}(𝔸) of {page.scheme} would carry torsion: {options}")
            if len(options) > 1:
                notes.append(f"H_{n}(𝔸) extension settled by torsion freeness")
            options = free
        groups[n] = options[0] if len(options) == 1 else AbelianGroup(options[0].free_rank)
        status[n] = EXACT if len(options) == 1 else AMBIGUOUS
        if len(options) > 1:
            candidates[n] = options
    return ArrangementHomology(groups, status, candidates, e2, e_inf, d2_rank, notes)


def page_audit(page: MVPage, homology: ArrangementHomology) -> Dict:
    """The Euler characteristic of E¹ equals that of H_*(𝔸)."""
    expected = page.euler_characteristic()
    found = homology.euler_characteristic()
    failures = [] if expected == found else [f"Euler characteristic of E¹ is {expected}, of H_*(𝔸) {found}"]
    return {"ok": not failures, "failures": failures, "euler": expected}


def _image_lattices(arr: Arrangement, r: int) -> np.ndarray:
    n = arr.ambient_rank
    maps = [exterior_power_map(c.dir, r).matrix for level in arr.levels for c in level if c.dir.rank >= r]
    return hstack(maps, comb(n, r))


def _incidence_shift(arr: Arrangement, sup: Element, sub: Element) -> List[int]:
    """Integral γ with A_sub ⊂ A_sup + γ, read off the incidence record."""
    x = arr.levels[sub[0]][sub[1]]
    inc = next((inc for inc in arr.incidences(sup[0], sup[1], sub[0]) if inc.target == sub[1]), None)
    if inc is None:
        raise ConsistencyError(f"No incidence of {sub} in {sup} for {arr.name}")
    shift = [Fraction(o) - p for o, p in zip(x.offset, inc.point)]
    if any(g.denominator != 1 for g in shift):
        raise ConsistencyError(f"Incidence of {sub} in {sup} moves by a non-integral vector {shift}")
    return [int(g) for g in shift]


def _cycle_lifts(arr: Arrangement, page: MVPage, r: int) -> np.ndarray:
    """Λ_r Z^N image of a lift of each basis element of E¹_{1,r-1}.

    The cylinder over ω in Λ_(r-1) Γ^x for a chain (Θ, x) closes up in 𝕋
    along the incidence shift γ and contributes γ ∧ ω.
    """
    n = arr.ambient_rank
    labels = page.basis(1, r - 1)
    out = zeros(comb(n, r), len(labels))
    wedges, shifts = {}, {}
    for col, (chain, subset) in enumerate(labels):
        sup, sub = chain
        if sub not in wedges:
            cls = arr.levels[sub[0]][sub[1]]
            wedges[sub] = (exterior_power_map(cls.dir, r - 1).matrix, WedgeIndex(cls.dir.rank, r - 1).positions)
        if chain not in shifts:
            shifts[chain] = _incidence_shift(arr, sup, sub)
        matrix, positions = wedges[sub]
        omega = list(matrix[:, positions[subset]])
        out[:, col] = np.array(wedge_with_vector(shifts[chain], omega, r - 1), dtype=object)
    return out


def alpha_image(arr: Arrangement, r: int, page: Optional[MVPage] = None) -> Optional[np.ndarray]:
    """Generators of im α_r in Λ_r Z^N.

    Exact when H_r(𝔸) is filtered by the first two columns only, i.e.
    E¹_{p,r-p} = 0 for p >= 2; returns None otherwise. Lifts of d¹-cycles
    are the columns of the HNF of [d¹; lifts] without a pivot in the d¹ rows.
    """
    page = page or build_e1(arr)
    if any(page.dim(p, r - p) for p in page.columns if p >= 2 and r - p >= 0):
        return None
    n = arr.ambient_rank
    blocks = [_image_lattices(arr, r)]
    d = page.d1.get((1, r - 1)) if r >= 1 else None
    if d is not None and d.cols:
        stacked = np.concatenate([d.to_dense(), _cycle_lifts(arr, page, r)], axis=0)
        h = hnf(stacked)
        keep = [j for j, row in enumerate(h.pivots) if row >= d.rows]
        if keep:
            blocks.append(h.basis[d.rows:, keep])
    return hstack(blocks, comb(n, r))


def coker_alpha(arr: Arrangement, r: int, page: Optional[MVPage] = None) -> Optional[AbelianGroup]:
    """Λ_r Z^N / im α_r, or None when alpha_image cannot pin the image."""
    gens = alpha_image(arr, r, page)
    if gens is None:
        return None
    rk, torsion = smith_invariants(gens)
    return AbelianGroup.from_orders(comb(arr.ambient_rank, r) - rk, torsion)


def alpha_assembly(arr: Arrangement, page: Optional[MVPage] = None,
                   homology: Optional[ArrangementHomology] = None,
                   name: str = "") -> Tuple[AlphaData, CohomologyResult]:
    """H^(N-r)(Ω) for r = n..N from coker α_r and ker α_(r-1).

    Over Q the image of α_r is generated by the Λ_r Γ^X of all classes X; over Z
    it can be larger by a subgroup of the torsion T_r of that quotient, which
    only happens when H_r(𝔸) has classes beyond single tori. Those classes are
    lifted through alpha_image where possible; otherwise every quotient of T_r
    stays a candidate.
    """
    name = name or arr.name
    page = page or build_e1(arr)
    homology = homology or homology_of_A(page)
    n_amb, n = arr.ambient_rank, arr.codim
    d = n_amb - n

    image_rank, image_torsion, s, f, coker, kernel = {}, {}, {}, {}, {}, {}
    image_exact = []
    for r in range(n_amb + 1):
        rk, torsion = smith_invariants(_image_lattices(arr, r))
        image_rank[r] = rk
        image_torsion[r] = AbelianGroup.from_orders(0, torsion)
        s[r] = comb(n_amb, r) - rk
        f[r] = homology.rank(r) - rk
        if f[r] < 0:
            raise ConsistencyError(f"rank H_{r}(𝔸) = {homology.rank(r)} is below the image rank {rk}")
        exact = None
        if not (image_torsion[r].is_trivial() or homology.higher_filtration_trivial(r)):
            exact = coker_alpha(arr, r, page)
        if exact is not None:
            if exact.free_rank != s[r] or exact.torsion_part() not in quotient_types(image_torsion[r]):
                raise ConsistencyError(f"coker α_{r} = {exact} does not fit Z^{s[r]} + a quotient of {image_torsion[r]}")
            coker[r] = [exact]
            image_exact.append(r)
        elif image_torsion[r].is_trivial() or homology.higher_filtration_trivial(r):
            coker[r] = [AbelianGroup(s[r], image_torsion[r].torsion)]
        else:
            coker[r] = [AbelianGroup(s[r], q.torsion) for q in quotient_types(image_torsion[r])]
        kernel[r] = []
        for g in homology.candidate_set(r):
            k = AbelianGroup(f[r], g.torsion)
            if k not in kernel[r]:
                kernel[r].append(k)
    alpha = AlphaData(image_rank, image_torsion, s, f, coker, kernel, image_exact)

    groups, status, candidates = {}, {}, {}
    for deg in range(d + 1):
        r = n_amb - deg
        options = []
        for sub in coker[r]:
            for quotient in kernel[r - 1]:
                for g in extension_candidates(sub, quotient):
                    if g not in options:
                        options.append(g)
        options.sort(key=lambda g: (g.torsion_order(), g.torsion))
        if len(options) == 1:
            groups[deg], status[deg] = options[0], EXACT
        else:
            groups[deg], status[deg] = AbelianGroup(options[0].free_rank), AMBIGUOUS
            candidates[deg] = options

    annotations, resolved = {}, {}
    if name in RESOLUTIONS:
        degree, value, text = RESOLUTIONS[name]
        if value in candidates.get(degree, []):
            resolved[degree] = value
            annotations[degree] = text
    if name in NOTES:
        degree, text = NOTES[name]
        annotations[degree] = text
    diagnostics = {
        "alpha": alpha.to_dict(),
        "homology_of_A": {str(k): str(g) for k, g in homology.groups.items()},
        "notes": list(homology.notes),
    }
    result = CohomologyResult(name, d, "mv", groups, status, candidates, annotations, resolved, diagnostics)
    return alpha, result


def bookkeeping_check(alpha: AlphaData, result: CohomologyResult, ambient_rank: int) -> Dict:
    """rank H^s(Ω) = f_(N-s-1) + s_(N-s) in every degree."""
    failures = []
    for deg in range(result.dim + 1):
        r = ambient_rank - deg
        expected = alpha.f.get(r - 1, 0) + alpha.s[r]
        if result.free_rank(deg) != expected:
            failures.append(f"H^{deg}: rank {result.free_rank(deg)} != f_{r - 1} + s_{r} = {expected}")
    return {"ok": not failures, "failures": failures}


def mv_cohomology(arr: Arrangement, name: str = "", verbose: bool = False) -> CohomologyResult:
    """Run the whole torus arrangement route on a closed arrangement."""
    page = build_e1(arr, verbose=verbose)
    homology = homology_of_A(page)
    audit = page_audit(page, homology)
    if not audit["ok"]:
        raise ConsistencyError("; ".join(audit["failures"]))
    alpha, result = alpha_assembly(arr, page, homology, name)
    check = bookkeeping_check(alpha, result, arr.ambient_rank)
    if not check["ok"]:
        raise ConsistencyError("; ".join(check["failures"]))
    if verbose:
        print_ts(f"📊 {result.scheme}: H_*(𝔸) = " + ", ".join(
            f"H_{k}={g}" for k, g in sorted(homology.groups.items())))
    return result


def route_crosscheck(fhk: CohomologyResult, mv: CohomologyResult) -> Dict:
    """Compare the two routes degree by degree.

    Raises:
        RouteDisagreement: on different free ranks, different torsion where both
            routes are exact, or disjoint candidate sets
    """
    if fhk.dim != mv.dim:
        raise RouteDisagreement(f"Routes disagree on the dimension: {fhk.dim} vs {mv.dim}")
    degrees = {}
    for s in range(fhk.dim + 1):
        left, right = fhk.candidate_set(s), mv.candidate_set(s)
        if fhk.free_rank(s) != mv.free_rank(s):
            raise RouteDisagreement(f"H^{s}: free rank {fhk.free_rank(s)} (fhk) vs {mv.free_rank(s)} (mv)")
        if fhk.is_exact(s) and mv.is_exact(s) and fhk.groups[s] != mv.groups[s]:
            raise RouteDisagreement(f"H^{s}: {fhk.groups[s]} (fhk) vs {mv.groups[s]} (mv)")
        common = [g for g in left if g in right]
        if not common:
            raise RouteDisagreement(
                f"H^{s}: no common candidate between {[str(g) for g in left]} and {[str(g) for g in right]}")
        degrees[s] = {
            "fhk": [str(g) for g in left],
            "mv": [str(g) for g in right],
            "common": [str(g) for g in common],
            "agreed": len(common) == 1,
        }
    return {"ok": True, "scheme": fhk.scheme, "degrees": degrees,
            "ambiguous": [s for s, entry in degrees.items() if not entry["agreed"]]}


def merge_routes(fhk: CohomologyResult, mv: CohomologyResult, report: Optional[Dict] = None) -> CohomologyResult:
    """One result whose candidate sets are the intersections of both routes."""
    report = report or route_crosscheck(fhk, mv)
    groups, status, candidates = {}, {}, {}
    for s in range(fhk.dim + 1):
        common = [g for g in fhk.candidate_set(s) if g in mv.candidate_set(s)]
        if len(common) == 1:
            groups[s], status[s] = common[0], EXACT
        else:
            groups[s], status[s] = AbelianGroup(common[0].free_rank), AMBIGUOUS
            candidates[s] = common
    annotations = {**mv.annotations, **fhk.annotations}
    resolved = {s: g for s, g in {**mv.resolved, **fhk.resolved}.items() if g in candidates.get(s, [])}
    diagnostics = {"fhk": fhk.diagnostics, "mv": mv.diagnostics, "crosscheck": report["degrees"]}
    return CohomologyResult(fhk.scheme, fhk.dim, "both", groups, status, candidates, annotations, resolved, diagnostics)
