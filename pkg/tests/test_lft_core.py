import cmath

import numpy as np
import pytest

from conftest import random_automorphism
from shadowlab import lft_core as lft
from shadowlab.errors import DegenerateCoefficients, IdentityMap, InvalidParameter, NotSelfMap, PoleEvaluation


def test_make_moebius_normalizes_determinant():
    phi = lft.make_moebius(2, 1, 1, 3)
    a, b, c, d = phi.coefficients
    assert a * d - b * c == pytest.approx(1)


def test_degenerate_coefficients_rejected():
    with pytest.raises(DegenerateCoefficients):
        lft.make_moebius(1, 2, 2, 4)


def test_evaluate_on_extended_plane():
    phi = lft.make_moebius(1, 0, 1, -2)
    assert lft.is_infinite(lft.evaluate(phi, 2))
    assert lft.evaluate(phi, lft.INFINITY) == pytest.approx(1)
    assert phi(1) == pytest.approx(-1)


def test_compose_and_inverse():
    phi = lft.canonical_ha(0.3)
    psi = lft.canonical_hna1(0.6)
    z = 0.2 + 0.1j
    assert lft.compose(phi, psi)(z) == pytest.approx(phi(psi(z)))
    assert lft.is_identity(lft.compose(phi, lft.inverse(phi)))
    assert lft.same_map(lft.compose_and_iterate(phi, 3), lft.compose(phi, lft.compose(phi, phi)))


def test_json_round_trip():
    phi = lft.canonical_lox(0.3 + 0.4j, 0.2 - 0.1j)
    assert lft.same_map(lft.from_json(lft.to_json(phi)), phi)


@pytest.mark.parametrize('tag', [lft.EA, lft.HA, lft.HNA_I, lft.HNA_II, lft.LOX, lft.PA, lft.PNA])
def test_canonical_symbols_classify_to_their_family(canonical_symbols, tag):
    assert lft.classify(canonical_symbols[tag]).tag == tag


def test_identity_is_its_own_class():
    assert lft.classify(lft.IDENTITY_MAP).tag == lft.IDENTITY
    with pytest.raises(IdentityMap):
        lft.fixed_points(lft.IDENTITY_MAP)
    with pytest.raises(IdentityMap):
        lft.canonical_form(lft.IDENTITY_MAP)


def test_not_self_map():
    with pytest.raises(NotSelfMap):
        lft.classify(lft.make_moebius(2, 0, 0, 1))
    ok, message = lft.validate_self_map(lft.make_moebius(1, 0, 2, 1))
    assert not ok
    assert 'pole' in message


def test_parabolic_example_is_non_automorphism():
    phi = lft.make_moebius(0, 2, -2, 4)
    fps = lft.fixed_points(phi)
    assert fps.multiplicity == 2
    assert fps.points[0] == pytest.approx(1)
    assert lft.classify(phi).tag == lft.PNA


def test_is_automorphism(canonical_symbols):
    automorphisms = {tag for tag, phi in canonical_symbols.items() if lft.is_automorphism(phi)}
    assert automorphisms == {lft.EA, lft.HA, lft.PA}


def test_ha_fixed_points_and_multiplier():
    phi = lft.canonical_ha(0.5)
    points = sorted(lft.fixed_points(phi).points, key=lambda p: p.real)
    assert points[0] == pytest.approx(-1)
    assert points[1] == pytest.approx(1)
    cls = lft.classify(phi)
    assert cls.attracting_point == pytest.approx(1)
    assert cls.multiplier == pytest.approx(1 / 3)


def test_elliptic_multiplier_is_rotation():
    omega = cmath.exp(0.7j)
    cls = lft.classify(lft.canonical_ea(omega))
    assert cls.tag == lft.EA
    assert cls.multiplier == pytest.approx(omega)
    assert cls.attracting_point == pytest.approx(0)


def test_classification_invariant_under_conjugation(canonical_symbols, rng):
    for tag, phi in canonical_symbols.items():
        for _ in range(5):
            sigma = random_automorphism(rng)
            assert lft.classify(lft.conjugate(phi, sigma)).tag == tag


@pytest.mark.parametrize('tag,params', [
    (lft.HA, {'r': 0.4}),
    (lft.HNA_I, {'r': 0.3}),
    (lft.HNA_II, {'r': 0.7}),
])
def test_canonical_form_recovers_hyperbolic_parameter(tag, params, rng):
    phi = lft.family_shape(tag, params)
    for _ in range(3):
        conjugated = lft.conjugate(phi, random_automorphism(rng))
        form = lft.canonical_form(conjugated)
        assert form.tag == tag
        assert form.params['r'] == pytest.approx(params['r'], abs=1e-8)
        assert lft.same_map(form.canonical, phi, tol=1e-7)


def test_canonical_form_elliptic_and_loxodromic(rng):
    omega = cmath.exp(1.3j)
    form = lft.canonical_form(lft.conjugate(lft.canonical_ea(omega), random_automorphism(rng)))
    assert form.params['omega'] == pytest.approx(omega, abs=1e-9)

    form = lft.canonical_form(lft.conjugate(lft.canonical_lox(0.4 + 0.2j, 0.3), random_automorphism(rng)))
    assert form.tag == lft.LOX
    assert form.params['a'] == pytest.approx(0.4 + 0.2j, abs=1e-9)
    rebuilt = lft.family_shape(lft.LOX, form.params)
    assert lft.same_map(rebuilt, form.canonical, tol=1e-7)


def test_canonical_form_parabolic_under_rotation():
    a = 1 + 1j
    sigma = lft.disk_automorphism(0, cmath.exp(0.9j))
    form = lft.canonical_form(lft.conjugate(lft.canonical_parabolic(a), sigma))
    assert form.tag == lft.PNA
    assert form.params['a'] == pytest.approx(a, abs=1e-8)


@pytest.mark.parametrize('a', [1, 2, 1j, 1 + 1j])
def test_parabolic_closed_form_matches_composition(a, rng):
    phi = lft.canonical_parabolic(a)
    radius = 0.9 * np.sqrt(rng.uniform(size=20))
    points = radius * np.exp(2j * np.pi * rng.uniform(size=20))
    for n in (1, 2, 5, 17, 33, 64):
        closed = lft.parabolic_iterate_closed_form(a, n)
        composed = lft.iterate(phi, n)
        for z in points:
            assert abs(closed(z) - composed(z)) <= 1e-10


def test_parabolic_third_iterate_at_origin():
    assert lft.parabolic_iterate_closed_form(2, 3)(0) == pytest.approx(0.75, abs=1e-12)


def test_parabolic_closed_form_rejects_left_half_plane():
    with pytest.raises(InvalidParameter):
        lft.parabolic_iterate_closed_form(-1, 2)


@pytest.mark.parametrize('a', [1, 2, 2j, 0.5 + 3j])
def test_parabolic_origin_gap(a):
    for n in range(1, 200):
        gap, lower = lft.parabolic_origin_gap(a, n)
        value = lft.parabolic_iterate_closed_form(a, n)(0)
        assert gap == pytest.approx(1 - abs(value) ** 2, rel=1e-9)
        assert lower <= gap


def test_cayley_conjugate_of_parabolic_is_translation():
    a = 0.5 + 2j
    translate = lft.cayley_conjugate(lft.canonical_parabolic(a))
    for w in (1, 2 + 1j, 0.3 - 4j):
        assert translate(w) == pytest.approx(w + a)


def test_cayley_pair_and_pole():
    z = 0.3 + 0.4j
    assert lft.cayley_pair(lft.cayley_pair(z), 'inverse') == pytest.approx(z)
    with pytest.raises(PoleEvaluation):
        lft.cayley(1)
    with pytest.raises(InvalidParameter):
        lft.cayley_pair(z, 'sideways')


def test_derivative_at_pole_raises():
    with pytest.raises(PoleEvaluation):
        lft.derivative_at(lft.make_moebius(1, 0, 1, -2), 2)
