from functools import lru_cache
from math import comb

import pytest

from src.arrangement import Arrangement, close_arrangement
from src.catalog import builtin_scheme
from src.cohomology import AMBIGUOUS, EXACT, CohomologyResult, fhk_cohomology
from src.exact_linalg import AbelianGroup, quotient_types
from src.scheme import SchemeSpec, SingularFamily, load_scheme
from src.torus_mv import (
    alpha_assembly, alpha_image, bookkeeping_check, build_e1, coker_alpha, d1_12, homology_of_A,
    merge_routes, mv_cohomology, page_audit, route_crosscheck,
)
from src.utils import BUILTIN_SCHEME_DIR, RouteDisagreement, UnsupportedCodim


Z = AbelianGroup


def unit(i, n=6):
    return [int(j == i) for j in range(n)]


def plane_scheme(name, planes):
    """Codimension-3 scheme in Z^6 from (coordinate axes, offset) pairs."""
    families = tuple(
        SingularFamily.create(f"p{k}", [unit(i) for i in axes], offset, 6)
        for k, (axes, offset) in enumerate(planes)
    )
    return SchemeSpec(name, 6, 3, families)


@lru_cache(maxsize=None)
def arrangement(name):
    return close_arrangement(builtin_scheme(name))


def test_single_torus():
    arr = close_arrangement(plane_scheme("one", [((0, 1, 2, 3), [0] * 6)]))
    page = build_e1(arr)
    assert list(page.columns) == [0]
    for q in range(5):
        assert page.dim(0, q) == comb(4, q)

    homology = homology_of_A(page)
    assert homology.groups == {q: Z(comb(4, q)) for q in range(5)}

    alpha, result = alpha_assembly(arr, page, homology)
    assert result.groups == {3: Z(16), 2: Z(14), 1: Z(6), 0: Z(1)}
    assert bookkeeping_check(alpha, result, 6)["ok"]


def test_disjoint_tori():
    half = [0, 0, 0, 0, "1/2", 0]
    arr = close_arrangement(plane_scheme("two", [((0, 1, 2, 3), [0] * 6), ((0, 1, 2, 3), half)]))
    homology = homology_of_A(build_e1(arr))
    assert homology.groups[0] == Z(2)
    assert homology.groups[4] == Z(2)

    alpha, result = alpha_assembly(arr, homology=homology)
    assert alpha.f[0] == 1
    assert result.free_rank(3) == 16 + 6


def test_tori_glued_along_a_subtorus():
    arr = close_arrangement(plane_scheme("glued", [((0, 1, 2, 3), [0] * 6), ((0, 1, 4, 5), [0] * 6)]))
    assert [len(level) for level in arr.levels] == [0, 1, 2]

    page = build_e1(arr)
    assert len(page.chains[1]) == 2
    homology = homology_of_A(page)
    assert homology.groups == {q: Z(2 * comb(4, q) - comb(2, q)) for q in range(5)}
    assert all(homology.status[q] == EXACT for q in range(5))
    assert page_audit(page, homology)["ok"]


def test_d1_12_block_signs():
    arr = close_arrangement(plane_scheme("glued", [((0, 1, 2, 3), [0] * 6), ((0, 1, 4, 5), [0] * 6)]))
    d = d1_12(arr)
    assert d.shape == (13, 2)
    # Λ_2 of the shared line lattice hits the first wedge of each plane block,
    # and the identity enters the line block with a minus sign
    expected = {(0, 0): 1, (12, 0): -1, (6, 1): 1, (12, 1): -1}
    for i in range(13):
        for j in range(2):
            assert d[i, j] == expected.get((i, j), 0)


def test_cycle_through_two_crossings_fills_the_image():
    """Circles of slope 0 and 2 in T^2 meet twice; the loop through both points lifts to e_1."""
    families = (
        SingularFamily.create("h", [[1, 0]], ["0", "0"], 2),
        SingularFamily.create("d", [[1, 2]], ["0", "0"], 2),
    )
    arr = close_arrangement(SchemeSpec("crossing", 2, 2, families))
    assert len(arr.levels[0]) == 2
    page = build_e1(arr)
    homology = homology_of_A(page)
    assert homology.groups[1] == Z(3)

    alpha, _ = alpha_assembly(arr, page, homology)
    assert alpha.image_torsion[1] == Z(0, (2,))
    assert alpha_image(arr, 1, page).shape[0] == 2
    assert coker_alpha(arr, 1, page) == Z(0)
    assert alpha.cokernel[1] == [Z(0)]
    assert alpha.to_dict()["coker_exact"] == [1]


def test_coker_alpha_matches_free_rank():
    arr = close_arrangement(load_scheme(BUILTIN_SCHEME_DIR / "toy_square.json"))
    page = build_e1(arr)
    alpha, _ = alpha_assembly(arr, page)
    for r in range(5):
        exact = coker_alpha(arr, r, page)
        if exact is not None:
            assert exact.free_rank == alpha.s[r]
            assert exact.torsion_part() in quotient_types(alpha.image_torsion[r])


def test_toy_square_routes_agree():
    arr = close_arrangement(load_scheme(BUILTIN_SCHEME_DIR / "toy_square.json"))
    homology = homology_of_A(build_e1(arr))
    assert homology.groups == {0: Z(1), 1: Z(4), 2: Z(2)}

    mv = mv_cohomology(arr)
    assert mv.method == "mv"
    assert mv.groups == {2: Z(4), 1: Z(4), 0: Z(1)}
    report = route_crosscheck(fhk_cohomology(arr), mv)
    assert report["ok"]
    assert report["ambiguous"] == []


@pytest.mark.parametrize("name", ["penrose", "ttt", "ammann_beenker_coloured"])
def test_dihedral_routes_agree(name):
    arr = arrangement(name)
    fhk = fhk_cohomology(arr, name)
    mv = mv_cohomology(arr, name)
    report = route_crosscheck(fhk, mv)
    assert all(entry["agreed"] for entry in report["degrees"].values())

    merged = merge_routes(fhk, mv, report)
    assert merged.method == "both"
    assert merged.groups == fhk.groups


def test_unsupported_codimension():
    with pytest.raises(UnsupportedCodim):
        build_e1(Arrangement(9, 3, 3, [[], [], []]))
    with pytest.raises(UnsupportedCodim):
        build_e1(Arrangement(8, 2, 4, [[], [], [], []]))


def fake(groups, status=None, candidates=None):
    status = status or {s: EXACT for s in groups}
    return CohomologyResult("fake", max(groups), "fhk", groups, status, candidates or {})


def test_crosscheck_rejects_disagreement():
    base = fake({0: Z(1), 1: Z(5), 2: Z(8)})
    with pytest.raises(RouteDisagreement, match="free rank"):
        route_crosscheck(base, fake({0: Z(1), 1: Z(5), 2: Z(9)}))
    with pytest.raises(RouteDisagreement, match="fhk"):
        route_crosscheck(base, fake({0: Z(1), 1: Z(5), 2: Z(8, (2,))}))
    with pytest.raises(RouteDisagreement, match="dimension"):
        route_crosscheck(base, fake({0: Z(1), 1: Z(5)}))


def test_crosscheck_intersects_candidates():
    both = {0: EXACT, 1: AMBIGUOUS}
    left = fake({0: Z(1), 1: Z(3)}, both, {1: [Z(3), Z(3, (2,))]})
    right = fake({0: Z(1), 1: Z(3)}, both, {1: [Z(3, (2,)), Z(3, (4,))]})
    report = route_crosscheck(left, right)
    assert report["degrees"][1]["common"] == ["ℤ^3 ⊕ ℤ_2"]

    merged = merge_routes(left, right, report)
    assert merged.is_exact(1)
    assert merged.groups[1] == Z(3, (2,))

    with pytest.raises(RouteDisagreement, match="no common candidate"):
        route_crosscheck(left, fake({0: Z(1), 1: Z(3)}, both, {1: [Z(3, (4,)), Z(3, (8,))]}))


@pytest.mark.slow
def test_danzer_page():
    arr = arrangement("danzer")
    page = build_e1(arr)
    assert page.dim(0, 4) == len(arr.levels[2])

    homology = homology_of_A(page)
    assert homology.groups[0] == Z(1)
    assert homology.groups[1] == Z(6)
    for n in (0, 1, 3, 4):
        assert homology.candidate_set(n)[0].is_free()
    assert page_audit(page, homology)["ok"]


@pytest.mark.slow
def test_danzer_routes_agree():
    arr = arrangement("danzer")
    fhk = fhk_cohomology(arr, "danzer")
    mv = mv_cohomology(arr, "danzer")
    assert mv.groups[2] == Z(16)
    assert mv.groups[1] == Z(7)

    report = route_crosscheck(fhk, mv)
    assert report["degrees"][3]["common"] == ["ℤ^20", "ℤ^20 ⊕ ℤ_2"]
    assert report["ambiguous"] == [3]
    merged = merge_routes(fhk, mv, report)
    assert merged.resolved[3] == Z(20)


@pytest.mark.slow
def test_ammann_kramer_mv():
    mv = mv_cohomology(arrangement("ammann_kramer"), "ammann_kramer")
    assert mv.groups[1] == Z(12)
    assert mv.groups[2] == Z(72, (2,))
