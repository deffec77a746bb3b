import itertools
from fractions import Fraction

import pytest

from src.arrangement import (
    AffineClass, Arrangement, arrangement_to_dict, close_arrangement, counts, intersect_classes,
)
from src.catalog import builtin_scheme
from src.exact_linalg import frac_part, hnf, int_matrix
from src.scheme import load_scheme
from src.utils import BUILTIN_SCHEME_DIR, DepthExceeded, RationalityError


def toy(name):
    return load_scheme(BUILTIN_SCHEME_DIR / f"{name}.json")


def brute_force_points(scheme, box=3):
    """Intersection points of planar line families, found by scanning translates."""
    points = set()
    for a, b in itertools.combinations(scheme.families, 2):
        (da,), (db,) = a.direction.columns, b.direction.columns
        det = da[0] * (-db[1]) - da[1] * (-db[0])
        if det == 0:
            continue
        for gx, gy in itertools.product(range(-box, box + 1), repeat=2):
            rx = b.offset[0] + gx - a.offset[0]
            ry = b.offset[1] + gy - a.offset[1]
            s = Fraction(rx * (-db[1]) - ry * (-db[0]), det)
            point = (a.offset[0] + s * da[0], a.offset[1] + s * da[1])
            points.add(tuple(frac_part(x) for x in point))
    return points


@pytest.mark.parametrize("name,expected", [
    ("toy_grid", 1),
    ("toy_slope", 2),
    ("toy_shifted", 3),
])
def test_planar_points_match_brute_force(name, expected):
    scheme = toy(name)
    arr = close_arrangement(scheme)
    found = {cls.offset for cls in arr.levels[0]}

    assert len(found) == expected
    assert found == brute_force_points(scheme)
    assert counts(arr)["L"] == [expected, len(scheme.families)]


def test_toy_slope_points():
    arr = close_arrangement(toy("toy_slope"))
    assert {cls.offset for cls in arr.levels[0]} == {(Fraction(0), Fraction(0)), (Fraction(1, 2), Fraction(0))}
    table = counts(arr)
    assert table["L_theta"][(1, 0)] == {0: 2}
    assert table["L_theta"][(1, 1)] == {0: 2}
    assert table["sum_L0_alpha"] == 4


def test_intersection_multiplicities():
    scheme = toy("toy_slope")
    h, s = (AffineClass.create(f.direction, f.offset, scheme.nu) for f in scheme.families)
    found = intersect_classes(h, s)

    assert len(found) == 2
    assert all(mult == 1 for _, mult in found)
    assert all(cls.dir.rank == 0 for cls, _ in found)


def test_parallel_classes_do_not_meet():
    scheme = toy("toy_grid")
    h = AffineClass.create(scheme.families[0].direction, scheme.families[0].offset, 1)
    shifted = AffineClass.create(scheme.families[0].direction, (0, Fraction(1, 2)), 1)
    assert intersect_classes(h, shifted) == []


def test_toy_square():
    arr = close_arrangement(toy("toy_square"))
    assert counts(arr)["L"] == [1, 2]
    for i in range(2):
        incs = arr.incidences(1, i, 0)
        assert [inc.target for inc in incs] == [0]
        assert incs[0].relative_dir.ambient_rank == 2
        assert incs[0].relative_dir.rank == 0


def test_penrose_arrangement():
    arr = close_arrangement(builtin_scheme("penrose"))
    table = counts(arr)
    assert table["L"] == [1, 5]
    assert table["sum_L0_alpha"] == 5


def test_incidence_relative_data():
    arr = close_arrangement(builtin_scheme("penrose"))
    point = arr.levels[0][0]
    for i, line in enumerate(arr.levels[1]):
        (inc,) = arr.incidences(1, i, 0)
        assert inc.point == point.offset
        assert inc.relative_offset == (Fraction(0), Fraction(0))
        assert line.contains_direction(point)


def test_depth_limit():
    with pytest.raises(DepthExceeded):
        close_arrangement(toy("toy_grid"), max_depth=1)
    assert counts(close_arrangement(toy("toy_grid"), max_depth=2))["L"] == [1, 2]


def test_rank_law_violation():
    a = AffineClass.create(hnf(int_matrix([[1, 0], [0, 1], [0, 0], [0, 0]])), [0] * 4, 2)
    b = AffineClass.create(hnf(int_matrix([[1, 0], [0, 0], [0, 1], [0, 0]])), [0] * 4, 2)
    with pytest.raises(RationalityError):
        intersect_classes(a, b)
    with pytest.raises(RationalityError):
        AffineClass.create(hnf(int_matrix([[1], [0], [0], [0]])), [0] * 4, 2)


def test_index_of():
    arr = close_arrangement(toy("toy_shifted"))
    for r, level in enumerate(arr.levels):
        for i, cls in enumerate(level):
            assert arr.index_of(cls) == (r, i)
    stranger = AffineClass.create(hnf(int_matrix([[0], [0]])), (Fraction(1, 5), 0), 1)
    with pytest.raises(KeyError):
        arr.index_of(stranger)


def test_arrangement_to_dict():
    data = arrangement_to_dict(close_arrangement(toy("toy_shifted")))
    assert data["counts"]["L"] == [3, 3]
    assert data["codim"] == 2
    assert len(data["levels"][0]) == 3
    assert all(entry["stabilizer_rank"] == 1 for entry in data["levels"][1])
    assert set(data["counts"]["L_theta"]) == {"1:0", "1:1", "1:2"}


def test_empty_arrangement():
    arr = Arrangement(6, 2, 3, [[], [], []])
    assert arr.top == 2
    assert arr.incidences(2, 0, 1) == []
