import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horofarey.farey import (
    FareyPoint,
    count_estimate,
    farey_count_asymptotic,
    farey_count_exact,
    farey_fractions,
    generate_farey,
    is_primitive,
    iter_farey_blocks,
    write_farey_csv,
)


def brute_force_count(d, Q):
    total = 0
    for q in range(1, Q + 1):
        if d == 2:
            total += sum(1 for p in range(q) if math.gcd(p, q) == 1)
        else:
            ranges = [range(q)] * (d - 1)
            import itertools
            total += sum(1 for p in itertools.product(*ranges) if math.gcd(*p, q) == 1)
    return total


def test_small_farey_set_d2():
    fs = generate_farey(2, 3)
    got = sorted((pt.p[0], pt.q) for pt in fs.points)
    assert got == [(0, 1), (1, 2), (1, 3), (2, 3)]
    assert len(fs) == farey_count_exact(2, 3) == 4


def test_farey_point_validation():
    with pytest.raises(ValueError):
        FareyPoint((2, 4), 6)  # gcd 2
    with pytest.raises(ValueError):
        FareyPoint((3,), 3)  # numerator out of [0, q)
    with pytest.raises(ValueError):
        FareyPoint((0,), 0)
    pt = FareyPoint((1, 2), 3)
    assert pt.dim == 3
    assert np.allclose(pt.r, [1 / 3, 2 / 3])


def test_is_primitive():
    assert is_primitive([3, 5])
    assert not is_primitive([2, 4])
    assert is_primitive([0, 1])
    with pytest.raises(ValueError):
        is_primitive([0, 0])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(1, 25))
def test_exact_count_matches_brute_force(d, Q):
    assert farey_count_exact(d, Q) == brute_force_count(d, Q)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(2, 25),
       st.floats(0.0, 0.9, allow_nan=False))
def test_enumeration_matches_count_with_theta(d, Q, theta):
    n = sum(len(P) for _, P in iter_farey_blocks(d, Q, theta))
    assert n == count_estimate(d, Q, theta)


def test_theta_restricts_denominator_range():
    for q, P in iter_farey_blocks(2, 10, theta=0.55):
        assert 5 < q <= 10
        assert P.shape[1] == 1


def test_enumerated_points_are_primitive_and_in_unit_box():
    r, q = farey_fractions(3, 12)
    assert np.all(r >= 0.0) and np.all(r < 1.0)
    assert r.shape[0] == farey_count_exact(3, 12)
    fs = generate_farey(3, 12)
    assert len(fs) == r.shape[0]  # FareyPoint validates primitivity on build


def test_noninteger_q_truncates():
    assert count_estimate(2, 3.7) == farey_count_exact(2, 3)
    r1, _ = farey_fractions(2, 3.7)
    r2, _ = farey_fractions(2, 3)
    assert np.array_equal(r1, r2)


def test_asymptotic_ratio_approaches_one():
    Q = 2000
    ratio = farey_count_exact(2, Q) / farey_count_asymptotic(2, Q)
    assert abs(ratio - 1.0) < 0.005
    # explicit constant: Q^2 * 3 / pi^2
    assert abs(farey_count_asymptotic(2, Q) - Q ** 2 * 3.0 / math.pi ** 2) < 1e-6 * Q ** 2


def test_point_cap_guard():
    with pytest.raises(ResourceWarning):
        generate_farey(2, 100, cap=10)
    with pytest.raises(ResourceWarning):
        farey_fractions(8, 100)


def test_csv_dump(tmp_path):
    path = tmp_path / "farey.csv"
    n = write_farey_csv(path, 2, 4)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "q,p1"
    assert n == len(lines) - 1 == farey_count_exact(2, 4)
    assert "3,2" in lines


def test_argument_validation():
    with pytest.raises(ValueError):
        farey_count_exact(2, 0)
    with pytest.raises(ValueError):
        list(iter_farey_blocks(2, 5, theta=1.0))
    with pytest.raises(ValueError):
        list(iter_farey_blocks(9, 5))
