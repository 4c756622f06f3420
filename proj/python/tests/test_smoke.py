from fractions import Fraction

import pytest

import mtrace


def naive_ap(a, b, p):
    points = 1
    for x in range(p):
        rhs = (x * x * x + a * x + b) % p
        points += sum(1 for y in range(p) if (y * y - rhs) % p == 0)
    return p + 1 - points


def test_expression_round_trip():
    e = mtrace.canonical("27*(t+1)*(t+9)^3/t^3")
    assert mtrace.canonical(e) == e
    assert Fraction(mtrace.evaluate(e, "1")) == 27 * 2 * 10**3


def test_substitution_identity():
    j31 = "27*(t+1)*(t+9)^3/t^3"
    j124 = "(27*t^2+1)*(243*t^2+1)^3/t^2"
    assert mtrace.identity_check(mtrace.compose(j31, "1/(27*t^2)"), j124)
    assert not mtrace.identity_check(mtrace.compose(j31, "-1/(27*t^2)"), j124)


def test_parse_error_is_reported():
    with pytest.raises(ValueError):
        mtrace.canonical("t+*2")


@pytest.mark.parametrize("a,b", [(1, 1), (-3, 5), (7, -2)])
def test_ap_matches_point_count(a, b):
    for p in (5, 7, 11, 13, 17, 19, 23):
        disc = -16 * (4 * a**3 + 27 * b**2)
        if disc % p == 0:
            continue
        assert mtrace.ap(str(a), str(b), p) == naive_ap(a, b, p)


def test_borel_group():
    b = mtrace.Group([[[1, 1], [0, 1]], [[2, 0], [0, 1]], [[1, 0], [0, 2]]], 5)
    assert b.order == 5 * 4 * 4
    assert b.gl2_level == 5
    # X_0(5) has genus 0, index 6 and two cusps.
    g = b.genus()
    assert g["genus"] == 0 and g["index"] == 6 and g["cusps"] == 2


def test_catalog_group_missing_trace():
    g = mtrace.catalog_group("3,1,1")
    assert g.missing_traces(3) == [1]
    assert g.genus()["genus"] == 0
    assert sum(g.trace_fibers(3)) == g.order


def test_golden_level6_sequence():
    c = mtrace.census_long(["0", "0", "0", "-15876", "-777924"], 6, 150)
    assert len(c["sequence"]) == 32
    assert c["missing"] == [3]


def test_euler_factor():
    assert Fraction(mtrace.euler_factor(2, 0)) == Fraction(4, 3)
    total = sum(mtrace.gl2_trace_count(5, r) for r in range(5))
    assert total == (25 - 1) * (25 - 5)
