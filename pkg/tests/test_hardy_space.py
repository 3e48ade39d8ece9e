import math

import numpy as np
import pytest

from shadowlab import hardy_space as hs
from shadowlab.errors import InvalidParameter, OutsideDisk


def _random_poly(rng, degree=10):
    return hs.TaylorPoly(rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1))


def test_kernel_reproduces_point_values(rng):
    f = _random_poly(rng)
    for w in (0.3, -0.5 + 0.2j, 0.9j):
        k = hs.kernel(w, 40)
        assert hs.h2_inner(f, k.poly) == pytest.approx(f(w), abs=1e-12)


def test_kernel_norm_and_truncation_gap():
    k = hs.kernel(0.5, 30)
    assert hs.h2_norm(k.poly) ** 2 + k.truncation_gap == pytest.approx(k.exact_norm_sq)
    assert k.exact_norm_sq == pytest.approx(4 / 3)


def test_kernel_outside_disk():
    with pytest.raises(OutsideDisk):
        hs.kernel(1.0, 10)


def test_poly_arith():
    f = hs.poly(1, 1)
    g = hs.poly(1, -1, 0)
    assert np.allclose(hs.poly_arith(f, g).coeffs, [2, 0, 0])
    assert np.allclose(hs.poly_arith(f, op='scale', lam=2j).coeffs, [2j, 2j])
    assert np.allclose(hs.poly_arith(f, g, op='truncated_multiply').coeffs, [1, 0, -1])
    with pytest.raises(InvalidParameter):
        hs.poly_arith(f, op='add')


def test_hp_norms_of_one_plus_z():
    f = hs.poly(1, 1)
    assert hs.hp_norm(f, 2) == pytest.approx(math.sqrt(2))
    assert hs.hp_norm(f, 2) == pytest.approx(hs.h2_norm(f))
    assert hs.hp_norm(f, math.inf) == pytest.approx(2)
    assert hs.hp_norm(f, 1) == pytest.approx(4 / math.pi, rel=1e-5)


def test_hp_norm_rejects_small_p():
    with pytest.raises(InvalidParameter):
        hs.hp_norm(hs.poly(1), 0.5)


def test_hp_norm_is_monotone_in_p(rng):
    f = _random_poly(rng, degree=12)
    norms = [hs.hp_norm(f, p) for p in (1, 1.5, 2, 3, 4, 8, math.inf)]
    assert all(lo <= hi + 1e-12 for lo, hi in zip(norms, norms[1:]))


@pytest.mark.parametrize('p', [2, 4, 6])
def test_hp_norm_settles_by_512_points(rng, p):
    f = _random_poly(rng, degree=64)
    assert abs(hs.hp_norm(f, p, 1024) - hs.hp_norm(f, p, 512)) < 1e-8 * hs.hp_norm(f, p, 1024)


def test_hp_norm_settles_for_zero_free_polynomial():
    f = hs.TaylorPoly(np.array([math.comb(8, k) / 2 ** k for k in range(9)], dtype=complex))
    for p in (1, 3):
        assert abs(hs.hp_norm(f, p, 1024) - hs.hp_norm(f, p, 512)) < 1e-8


@pytest.mark.parametrize('p', [1, 2, 4])
def test_pointwise_bound_holds(rng, p):
    for _ in range(10):
        f = _random_poly(rng)
        for z in 0.95 * np.sqrt(rng.uniform(size=5)) * np.exp(2j * np.pi * rng.uniform(size=5)):
            assert hs.pointwise_bound_margin(f, z, p) >= -1e-9


def test_binomial_series_coefficients():
    f = hs.binomial_series(0.5, 3)
    assert np.allclose(f.coeffs, [1, 0.5, 0.375, 0.3125])
    assert f(0.5) == pytest.approx((1 - 0.5) ** -0.5, rel=0.1)
    with pytest.raises(InvalidParameter):
        hs.binomial_series(0, 3)


def test_membership():
    assert hs.f_s_membership(0.25, 2)
    assert not hs.f_s_membership(0.75, 2)
    assert hs.f_s_membership(0.75, 1)
    assert not hs.f_s_membership(0.1, math.inf)


def test_partial_norms_converge_below_half():
    rows = hs.partial_norms_sq(0.25, [10000, 100, 1000])
    assert [N for N, _ in rows] == [100, 1000, 10000]
    values = [value for _, value in rows]
    assert values[0] < values[1] < values[2] < 1.180341
    assert values[2] - values[1] < values[1] - values[0]
    assert (values[2] - values[1]) / values[2] < 5e-3
    assert 1.180341 - values[2] < 3e-3


def test_partial_norms_diverge_above_half():
    rows = dict(hs.partial_norms_sq(0.75, [100, 10000]))
    assert rows[100] == pytest.approx(13.1072, rel=1e-3)
    assert rows[10000] == pytest.approx(132.9233, rel=1e-3)
    assert rows[10000] / rows[100] > 10


def test_export_rows():
    f = hs.poly(1, 2j)
    assert hs.to_json(f) == [[1.0, 0.0], [0.0, 2.0]]
    assert hs.to_csv_rows(f) == [(0, 1.0, 0.0), (1, 0.0, 2.0)]
