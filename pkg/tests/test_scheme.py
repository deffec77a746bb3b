import json
from fractions import Fraction

import pytest

from src.catalog import (
    CATALOG, builtin_scheme, dihedral_rotation, generalized_penrose, icosahedral_generators,
    icosahedral_half_turn, icosahedral_lattices, icosahedral_rotation, icosahedral_signs,
    lattice_vector, rotation_order, scheme_names, shipped_scheme_path,
)
from src.exact_linalg import identity, int_matrix, lattice_index, matmul
from src.scheme import (
    SchemeSpec, SingularFamily, canonical_offset, fixed_sublattice, is_symmetry,
    is_translation_invariant, load_scheme, restrict_to_sublattice, save_scheme,
    scheme_from_dict, validate_rationality,
)
from src.utils import BUILTIN_SCHEME_DIR, SchemeError, parse_rational


def toy(name):
    return load_scheme(BUILTIN_SCHEME_DIR / f"{name}.json")


def test_load_toy_schemes():
    grid = toy("toy_grid")
    assert grid.ambient_rank == 2
    assert grid.codim == 2
    assert grid.nu == 1
    assert [f.label for f in grid.families] == ["h", "v"]

    shifted = toy("toy_shifted")
    assert shifted.families[0].offset == (Fraction(0), Fraction(1, 3))


def test_offsets_are_canonical():
    fam = SingularFamily.create("h", [[1, 0]], ["5/2", "7/3"], 2)
    assert fam.offset == (Fraction(0), Fraction(1, 3))
    assert canonical_offset(fam.direction, [Fraction(3), Fraction(-2, 3)]) == (Fraction(0), Fraction(1, 3))


@pytest.mark.parametrize("data,message", [
    ({"name": "x", "rank": 2, "codim": 2, "families": [], "extra": 1}, "Unknown scheme keys"),
    ({"name": "x", "rank": 2, "families": []}, "Missing scheme keys"),
    ({"name": "x", "rank": 2, "codim": 2,
      "families": [{"label": "h", "direction": [[1, 0]], "offset": [0.5, 0]}]}, "strings or integers"),
    ({"name": "x", "rank": 2, "codim": 2,
      "families": [{"label": "h", "direction": [[1.5, 0]], "offset": ["0", "0"]}]}, "integers"),
    ({"name": "x", "rank": 2, "codim": 2,
      "families": [{"label": "h", "direction": [[2, 0]], "offset": ["0", "0"]}]}, "not saturated"),
    ({"name": "x", "rank": 2, "codim": 2,
      "families": [{"label": "h", "direction": [[1, 0]], "offset": ["0"]}]}, "offset has length"),
    ({"name": "x", "rank": 3, "codim": 2, "families": []}, "not an integer"),
])
def test_scheme_from_dict_rejects(data, message):
    with pytest.raises(SchemeError, match=message):
        scheme_from_dict(data)


def test_duplicate_families_rejected():
    data = {"name": "x", "rank": 2, "codim": 2, "families": [
        {"label": "a", "direction": [[1, 0]], "offset": ["0", "0"]},
        {"label": "b", "direction": [[1, 0]], "offset": ["0", "1"]},
    ]}
    with pytest.raises(SchemeError, match="duplicate"):
        scheme_from_dict(data)


def test_load_scheme_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(SchemeError, match="Malformed"):
        load_scheme(broken)
    with pytest.raises(SchemeError, match="Cannot read"):
        load_scheme(tmp_path / "missing.json")


def test_save_and_load(tmp_path):
    scheme = toy("toy_shifted")
    path = tmp_path / "out" / "shifted.json"
    save_scheme(scheme, path)

    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["families"][0]["offset"] == ["0", "1/3"]
    assert load_scheme(path).family_keys() == scheme.family_keys()


def test_catalog_names():
    names = scheme_names()
    assert len(names) >= 14
    for name in ("penrose", "ttt", "ammann_beenker", "socolar", "heptagonal_b", "danzer",
                 "ammann_kramer", "canonical_d6", "dual_canonical_d6", "generalized_penrose"):
        assert name in names
    with pytest.raises(SchemeError, match="Unknown scheme"):
        builtin_scheme("no_such_scheme")


@pytest.mark.parametrize("name,rank,codim,families", [
    ("penrose", 4, 2, 5),
    ("ttt", 4, 2, 5),
    ("ammann_beenker", 4, 2, 4),
    ("ammann_beenker_decorated", 4, 2, 8),
    ("socolar", 4, 2, 6),
    ("socolar_decorated", 4, 2, 12),
    ("generalized_penrose", 4, 2, 10),
    ("heptagonal_b", 6, 2, 7),
    ("danzer", 6, 3, 6),
    ("ammann_kramer", 6, 3, 15),
    ("dual_canonical_d6", 6, 3, 15),
    ("canonical_d6", 6, 3, 16),
])
def test_catalog_shapes(name, rank, codim, families):
    scheme = builtin_scheme(name)
    assert scheme.ambient_rank == rank
    assert scheme.codim == codim
    assert len(scheme.families) == families
    assert all(f.direction.rank == scheme.family_rank for f in scheme.families)


def test_rotation_orders():
    assert rotation_order(dihedral_rotation(10)) == 10
    assert rotation_order(dihedral_rotation(8)) == 8
    assert rotation_order(dihedral_rotation(12)) == 12
    assert rotation_order(icosahedral_rotation()) == 5


def test_dihedral_symmetry():
    penrose = builtin_scheme("penrose")
    c = dihedral_rotation(10)
    assert is_symmetry(penrose, c)
    assert is_symmetry(builtin_scheme("ttt"), c)
    assert is_symmetry(builtin_scheme("ammann_beenker"), dihedral_rotation(8))


def test_ttt_is_penrose_over_a_sublattice():
    """Multiplication by 1 + ζ has index 5 and turns even mirrors into odd ones."""
    basis = identity(4) + dihedral_rotation(10)
    restricted = restrict_to_sublattice(builtin_scheme("penrose"), basis, "ttt")
    assert restricted.family_keys() == builtin_scheme("ttt").family_keys()


def test_restriction_splits_families():
    basis = int_matrix([[2, 0], [0, 1]])
    restricted = restrict_to_sublattice(toy("toy_grid"), basis)
    labels = sorted(f.label for f in restricted.families)
    # the vertical family meets two cosets of the index-2 sublattice
    assert labels == ["h", "v/0", "v/1"]


def test_translation_invariance():
    grid = toy("toy_grid")
    assert is_translation_invariant(grid, (1, 0))
    assert is_translation_invariant(grid, (0, -3))
    assert not is_translation_invariant(grid, ("1/2", "0"))


def test_generalized_penrose_gamma():
    with pytest.raises(SchemeError, match="integral"):
        generalized_penrose(Fraction(2))
    assert generalized_penrose(Fraction(2, 5)).family_keys() != generalized_penrose(Fraction(1, 3)).family_keys()


def test_gamma_from_environment(monkeypatch):
    monkeypatch.setenv("PROJCOH_GAMMA", "2/5")
    assert generalized_penrose().family_keys() == generalized_penrose(Fraction(2, 5)).family_keys()


def test_user_scheme_directory(tmp_path, monkeypatch):
    save_scheme(toy("toy_grid"), tmp_path / "penrose.json")
    monkeypatch.setenv("PROJCOH_SCHEME_DIR", str(tmp_path))
    assert builtin_scheme("penrose").ambient_rank == 2

    save_scheme(toy("toy_slope"), tmp_path / "my_slope.json")
    assert "my_slope" in scheme_names()


def test_ammann_beenker_file_matches_catalog():
    assert toy("ammann_beenker").family_keys() == builtin_scheme("ammann_beenker").family_keys()


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_shipped_catalog_files(name):
    shipped = load_scheme(shipped_scheme_path(name))
    derived = builtin_scheme(name)
    assert (shipped.name, shipped.ambient_rank, shipped.codim) == (derived.name, derived.ambient_rank, derived.codim)
    assert [f.label for f in shipped.families] == [f.label for f in derived.families]
    assert [f.class_key for f in shipped.families] == [f.class_key for f in derived.families]


def test_shipped_examples_by_name():
    assert builtin_scheme("toy_grid").family_keys() == toy("toy_grid").family_keys()
    assert "toy_grid" not in scheme_names()


def test_fixed_sublattice():
    swap = int_matrix([[0, 1], [1, 0]])
    assert fixed_sublattice(swap).columns == ((1, 1),)
    with pytest.raises(ValueError):
        fixed_sublattice(int_matrix([[1, 0]]))


def test_validate_rationality():
    report = validate_rationality(toy("toy_shifted"))
    assert report["ok"]
    assert report["finite"]
    assert report["counts"] == {"L0": 3, "L1": 3}

    bad = SchemeSpec("bad", 4, 2, (SingularFamily.create("p", [[1, 0, 0, 0]], [0] * 4, 4),))
    report = validate_rationality(bad)
    assert not report["ok"]
    assert "dimension" in report["failures"][0]


def test_validate_rationality_reports_bad_intersections():
    # planes meeting in a line: direction rank 1 is not divisible by nu = 2
    families = (
        SingularFamily.create("a", [[1, 0, 0, 0], [0, 1, 0, 0]], [0] * 4, 4),
        SingularFamily.create("b", [[1, 0, 0, 0], [0, 0, 1, 0]], [0] * 4, 4),
    )
    report = validate_rationality(SchemeSpec("planes", 4, 2, families))
    assert not report["ok"]
    assert report["failures"][0].startswith("rationality")


@pytest.mark.parametrize("text,value", [("2/5", Fraction(2, 5)), ("-1/3", Fraction(-1, 3)), ("7", Fraction(7)), (3, Fraction(3))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text,message", [
    ("1.5", "integer or p/q"),
    ("1e3", "integer or p/q"),
    ("2/4", "lowest terms"),
    ("3/-4", "positive denominator"),
    ("1/0", "positive denominator"),
    (0.5, "strings or integers"),
])
def test_parse_rational_rejects(text, message):
    with pytest.raises(SchemeError, match=message):
        parse_rational(text)


def test_offsets_must_be_reduced():
    data = {"name": "x", "rank": 2, "codim": 2,
            "families": [{"label": "h", "direction": [[1, 0]], "offset": ["0", "2/6"]}]}
    with pytest.raises(SchemeError, match="lowest terms"):
        scheme_from_dict(data)


def test_icosahedral_generators_preserve_signs():
    s = icosahedral_signs()
    for m in (icosahedral_rotation(), icosahedral_half_turn()):
        assert (matmul(matmul(m, s), m.T) == s).all()
    assert rotation_order(icosahedral_half_turn()) == 2


@pytest.mark.parametrize("name,lattice", [
    ("danzer", "F"), ("canonical_d6", "F"), ("dual_canonical_d6", "F"), ("ammann_kramer", "P"),
])
def test_icosahedral_symmetry(name, lattice):
    scheme = builtin_scheme(name)
    for m in icosahedral_generators(lattice):
        assert is_symmetry(scheme, m)


def test_icosahedral_lattice_indices():
    lattices = icosahedral_lattices()
    assert lattice_index(lattices["F"], lattices["P"]) == 2
    assert lattice_index(lattices["P"], lattices["I"]) == 2


def test_icosahedral_translation_symmetry():
    half = [Fraction(1, 2)] * 6
    e0 = [1, 0, 0, 0, 0, 0]
    # both plane sets are invariant under the I-lattice
    assert is_translation_invariant(builtin_scheme("ammann_kramer"), half)
    assert is_translation_invariant(builtin_scheme("dual_canonical_d6"), lattice_vector("F", half))
    assert is_translation_invariant(builtin_scheme("dual_canonical_d6"), lattice_vector("F", e0))
    assert not is_translation_invariant(builtin_scheme("danzer"), lattice_vector("F", e0))
    assert lattice_vector("F", e0) == [Fraction(1, 2), 0, 0, 0, 0, 0]


def test_icosahedral_schemes_need_f_or_p():
    with pytest.raises(SchemeError, match="F- or P-lattice"):
        icosahedral_generators("I")


def test_heptagonal_b_is_heptagonal_a_over_a_sublattice():
    """1 + ζ has norm 7 in Z[ζ_14] and turns even mirrors into odd ones."""
    basis = identity(6) + dihedral_rotation(14)
    restricted = restrict_to_sublattice(builtin_scheme("heptagonal_a"), basis, "heptagonal_b")
    assert restricted.family_keys() == builtin_scheme("heptagonal_b").family_keys()
