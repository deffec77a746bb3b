import json
from fractions import Fraction
from functools import lru_cache

import pytest

from src.arrangement import close_arrangement, counts
from src.catalog import builtin_scheme, generalized_penrose
from src.cohomology import (
    AMBIGUOUS, EXACT, CohomologyResult, check_diagram, codim2_maps, codim2_rank_check,
    codim3_maps, fhk_cohomology, k_theory, low_degree_check, rank_check, torsion_bounds_check,
)
from src.exact_linalg import AbelianGroup, extension_candidates
from src.exterior import exterior_power_map, generated_rank
from src.scheme import load_scheme
from src.utils import BUILTIN_SCHEME_DIR, UnsupportedCodim


Z = AbelianGroup


@lru_cache(maxsize=None)
def arrangement(name):
    return close_arrangement(builtin_scheme(name))


@lru_cache(maxsize=None)
def cohomology(name):
    return fhk_cohomology(arrangement(name), name)


TABLE_1 = [
    ("ammann_beenker", Z(9), Z(5)),
    ("ammann_beenker_coloured", Z(14, (2,)), Z(5)),
    ("ammann_beenker_decorated", Z(23), Z(8)),
    ("penrose", Z(8), Z(5)),
    ("generalized_penrose", Z(34), Z(10)),
    ("ttt", Z(24, (5, 5)), Z(5)),
    ("socolar", Z(28), Z(7)),
    ("socolar_decorated", Z(59), Z(12)),
]


@pytest.mark.parametrize("name,h2,h1", TABLE_1)
def test_dihedral_table(name, h2, h1):
    result = cohomology(name)
    assert result.groups == {2: h2, 1: h1, 0: Z(1)}
    assert all(result.status[s] == EXACT for s in range(3))
    assert rank_check(arrangement(name), result)["ok"]
    assert torsion_bounds_check(result, 2, 2)["ok"]


def test_penrose_rank_formula():
    arr = arrangement("penrose")
    check = codim2_rank_check(arr, codim2_maps(arr), cohomology("penrose"))
    assert check["euler"] == 4
    # the five line lattices generate a rank-4 subgroup of Λ_2 Z^4
    assert check["R"][1] == 4
    assert generated_rank([exterior_power_map(c.dir, 2) for c in arr.levels[1]]) == 4


def test_generalized_penrose_is_gamma_independent():
    results = []
    for gamma in (Fraction(1, 3), Fraction(2, 5)):
        arr = close_arrangement(generalized_penrose(gamma))
        results.append(fhk_cohomology(arr, "generalized_penrose").groups)
    assert results[0] == results[1]


def test_heptagonal_b_torsion():
    result = cohomology("heptagonal_b")
    assert result.dim == 4
    assert result.groups[4].torsion == (7, 7, 7, 7)
    assert result.groups[3].torsion == (7, 7, 7)
    assert result.groups[1] == Z(6)
    assert result.groups[0] == Z(1)
    assert low_degree_check(result, 6, 3)["ok"]
    assert rank_check(arrangement("heptagonal_b"), result)["ok"]


def test_heptagonal_a_is_torsion_free():
    result = cohomology("heptagonal_a")
    assert result.dim == 4
    assert result.groups[0] == Z(1)
    assert result.groups[1] == Z(6)
    assert all(result.is_exact(s) and result.groups[s].is_free() for s in range(5))
    assert low_degree_check(result, 6, 3)["ok"]
    assert torsion_bounds_check(result, 3, 2)["ok"]
    assert rank_check(arrangement("heptagonal_a"), result)["ok"]


def test_codim1_closed_form():
    arr = close_arrangement(load_scheme(BUILTIN_SCHEME_DIR / "fibonacci.json"))
    result = fhk_cohomology(arr, "fibonacci")
    assert result.groups == {1: Z(2), 0: Z(1)}
    assert rank_check(arr, result)["ok"]


def test_toy_square():
    arr = close_arrangement(load_scheme(BUILTIN_SCHEME_DIR / "toy_square.json"))
    result = fhk_cohomology(arr)
    assert result.scheme == "toy_square"
    assert result.groups == {2: Z(4), 1: Z(4), 0: Z(1)}


def test_low_degree_check_flags_wrong_groups():
    result = CohomologyResult("fake", 4, "fhk", {s: Z(1) for s in range(5)}, {s: EXACT for s in range(5)})
    check = low_degree_check(result, 6, 3)
    assert not check["ok"]
    assert check["failures"][0].startswith("H^1")


def test_k_theory_dihedral():
    k = k_theory(cohomology("penrose"))
    assert (k.k0, k.k1) == (Z(9), Z(5))
    assert k.render(0) == "ℤ^9"

    k = k_theory(cohomology("ammann_beenker"))
    assert (k.k0, k.k1) == (Z(10), Z(5))

    k = k_theory(cohomology("socolar"))
    assert (k.k0, k.k1) == (Z(29), Z(7))


def test_k_theory_needs_low_dimension():
    with pytest.raises(UnsupportedCodim):
        k_theory(cohomology("heptagonal_b"))


def test_result_serialization():
    result = cohomology("ttt")
    data = json.loads(json.dumps(result.to_dict(), ensure_ascii=False))
    assert data["degrees"]["2"] == {
        "free_rank": 24, "torsion": [5, 5], "status": EXACT, "candidates": [], "annotation": "",
    }
    restored = CohomologyResult.from_dict(data)
    assert restored.groups == result.groups
    assert restored.euler == result.euler
    assert result.table_row() == {"scheme": "ttt", "H^2": "ℤ^24 ⊕ ℤ_5^2", "H^1": "ℤ^5", "H^0": "ℤ"}


def test_ambiguous_rendering():
    result = CohomologyResult(
        "x", 3, "fhk", {0: Z(1), 1: Z(1), 2: Z(1), 3: Z(20)},
        {0: EXACT, 1: EXACT, 2: EXACT, 3: AMBIGUOUS}, {3: [Z(20), Z(20, (2,))]},
    )
    assert result.render(3) == "{ℤ^20 | ℤ^20 ⊕ ℤ_2}"
    assert result.candidate_set(3) == [Z(20), Z(20, (2,))]
    k = k_theory(result)
    assert k.k1_candidates == [Z(21), Z(21, (2,))]
    assert k.render(1) == "{ℤ^21 | ℤ^21 ⊕ ℤ_2}"


def test_k_theory_keeps_every_open_degree():
    result = CohomologyResult(
        "x", 2, "fhk", {0: Z(1), 1: Z(3), 2: Z(4)},
        {0: AMBIGUOUS, 1: EXACT, 2: AMBIGUOUS},
        {0: [Z(1), Z(1, (2,))], 2: [Z(4), Z(4, (3,))]},
        {0: "first", 2: "second"}, {2: Z(4, (3,))},
    )
    k = k_theory(result)
    assert k.k0 == Z(5)
    assert k.k0_candidates == [Z(5), Z(5, (2,)), Z(5, (3,)), Z(1, (2,)).direct_sum(Z(4, (3,)))]
    assert k.k0_resolved is None
    assert (k.k1, k.k1_candidates) == (Z(3), [])
    assert "K^0 open through H^0, H^2" in k.annotation
    assert "first" in k.annotation and "second" in k.annotation

    result.resolved[0] = Z(1)
    assert k_theory(result).k0_resolved == Z(5, (3,))


TABLE_3 = [
    ("danzer", Z(7), Z(16), 20, (Z(0), Z(0, (2,)), Z(0))),
    ("ammann_kramer", Z(12), Z(72, (2,)), 181, (Z(0), Z(0, (2,)), Z(0))),
    ("dual_canonical_d6", Z(12), Z(102, (2, 2, 2, 2, 4)), 331,
     (Z(0, (2,) * 6), Z(0, (2,) * 7), Z(0, (2,) * 15))),
]


@pytest.mark.slow
@pytest.mark.parametrize("name,h1,h2,h3_rank,diagnostics", TABLE_3)
def test_icosahedral_table(name, h1, h2, h3_rank, diagnostics):
    result = cohomology(name)
    assert result.groups[0] == Z(1)
    assert result.groups[1] == h1
    assert result.groups[2] == h2
    assert result.free_rank(3) == h3_rank
    assert all(result.is_exact(s) for s in range(3))
    found = tuple(result.diagnostics[k] for k in ("t1_prime", "t1_double_prime", "t0_prime"))
    assert found == diagnostics
    assert rank_check(arrangement(name), result)["ok"]


@pytest.mark.slow
def test_danzer_dichotomy():
    result = cohomology("danzer")
    assert result.status[3] == AMBIGUOUS
    assert result.candidates[3] == [Z(20), Z(20, (2,))]
    assert result.resolved[3] == Z(20)
    assert "non-split" in result.annotations[3]
    assert result.render(3) == "ℤ^20 (of ℤ^20 | ℤ^20 ⊕ ℤ_2)"


@pytest.mark.slow
def test_danzer_k_theory():
    k = k_theory(cohomology("danzer"))
    assert k.k0 == Z(17)
    assert k.k1 == Z(27)
    assert k.k1_resolved == Z(27)
    assert k.k1_candidates == [Z(27), Z(27, (2,))]
    assert "non-split" in k.annotation


@pytest.mark.slow
def test_dual_canonical_extension_quotient():
    result = cohomology("dual_canonical_d6")
    assert result.diagnostics["ker_phi0"] == Z(328, (2,) * 15)
    assert "ℤ^328 ⊕ ℤ_2^15" in result.annotations[3]


@pytest.mark.slow
def test_danzer_diagram_commutes():
    assert check_diagram(codim3_maps(arrangement("danzer"))) == []


@pytest.mark.slow
def test_canonical_d6_from_both_plane_sets():
    """W5 and W3 planes together: their Λ_4 images span rank 9, so H^1 = Z^(6 + 16 - 9)."""
    arr = arrangement("canonical_d6")
    result = cohomology("canonical_d6")
    assert counts(arr)["L"][2] == 16
    assert result.groups[0] == Z(1)
    assert result.groups[1] == Z(13)
    assert all(result.is_exact(s) for s in range(3))
    assert low_degree_check(result, 6, 2)["ok"]
    assert torsion_bounds_check(result, 2, 3)["ok"]
    assert rank_check(arr, result)["ok"]


@pytest.mark.slow
def test_dual_canonical_delta_from_coker_alpha():
    result = cohomology("dual_canonical_d6")
    found = result.diagnostics
    # coker α_3 is free, so Δ_1 hits all of coker φ′_1's torsion
    assert found["coker_alpha3"].is_free()
    assert found["delta_image"] == Z(0, (2,) * 6)
    assert found["delta_image_candidates"] == [str(Z(0, (2,) * 6))]

    expected = []
    for c in extension_candidates(Z(found["coker_phi1_prime"].free_rank), found["coker_phi1_double_prime"]):
        for e in extension_candidates(c, found["ker_phi0"]):
            if e not in expected:
                expected.append(e)
    expected.sort(key=lambda g: (g.torsion_order(), g.torsion))
    assert result.candidate_set(3) == expected
    assert result.free_rank(3) == 331


@pytest.mark.parametrize("name,prefix,span", [
    ("danzer", "", 5),
    ("canonical_d6", "w5", 5),
    ("canonical_d6", "w3", 9),
    ("canonical_d6", "", 9),
    ("ammann_kramer", "", 9),
])
def test_plane_wedge_spans(name, prefix, span):
    families = [f for f in builtin_scheme(name).families if f.label.startswith(prefix)]
    assert generated_rank([exterior_power_map(f.direction, 4) for f in families]) == span
