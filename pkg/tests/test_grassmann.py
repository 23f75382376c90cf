import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from supercurves.grassmann import (ETA1, ETA2, THETA_M, THETA_P, GrassmannDomainError,
                                   GrassmannElement as G, gr_bilinear_extend, gr_einsum,
                                   gr_extract, gr_integral, gr_mul)
from supercurves.worldsheet import ConformalFactor, TorusGrid, Worldsheet

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def elements(n):
    return st.lists(cplx, min_size=1 << n, max_size=1 << n).map(lambda c: G(np.array(c), n))


def homogeneous(n, parity):
    def build(c):
        c = np.array(c)
        for m in range(1 << n):
            if bin(m).count("1") % 2 != parity:
                c[m] = 0
        return G(c, n)
    return st.lists(cplx, min_size=1 << n, max_size=1 << n).map(build)


def e(k, n=2):
    return G.generator(k, n)


def test_eta_product_is_monomial():
    p = e(0) * e(1)
    assert p.extract([0, 1]) == 1
    assert (e(1) * e(0)).extract([0, 1]) == -1


def test_nilpotent_generator():
    assert np.all((e(0) * e(0)).coeffs == 0)


def test_even_product_example():
    a = G.scalar(1, 2) + G.monomial([0, 1], 2, 2)
    b = G.scalar(3, 2) + G.monomial([0, 1], 1, 2)
    c = a * b
    assert c.extract([]) == 3 and c.extract([0, 1]) == 7
    assert c.extract([0]) == 0


def test_extract_examples():
    a = G.scalar(3, 2) + G.monomial([0, 1], 7, 2)
    assert gr_extract(a, [0, 1]) == 7
    assert gr_extract(a, []) == 3
    assert gr_extract(e(0), [0, 1]) == 0


def test_mismatched_generators():
    with pytest.raises(GrassmannDomainError):
        gr_mul(G.scalar(1, 2), G.scalar(1, 4))
    with pytest.raises(GrassmannDomainError):
        G.scalar(1, 3)


def test_four_generator_order_signs():
    # theta- theta+ = -theta+ theta-, and eta1 theta+ eta2 = -theta+ eta1 eta2
    t = G.monomial([THETA_M, THETA_P], 1, 4)
    assert t.extract([THETA_P, THETA_M]) == -1
    m = G.generator(ETA1, 4) * G.generator(THETA_P, 4) * G.generator(ETA2, 4)
    assert m.extract([THETA_P, ETA1, ETA2]) == -1


def test_berezin_double_derivative():
    # d_theta+ d_theta- (theta+ theta-) = -1 with d_theta- applied first
    x = G.monomial([THETA_P, THETA_M], 1, 4)
    assert x.deriv(THETA_M).deriv(THETA_P).extract([]) == -1


@given(elements(4), elements(4), elements(4))
def test_associative(a, b, c):
    scale = np.prod([np.max(np.abs(x.coeffs), initial=0) for x in (a, b, c)])
    assert ((a * b) * c).allclose(a * (b * c), rtol=0, atol=1e-12 * scale)


@given(elements(4), elements(4), elements(4))
def test_distributive(a, b, c):
    scale = np.max(np.abs(a.coeffs), initial=0) * (np.max(np.abs(b.coeffs), initial=0) + np.max(np.abs(c.coeffs), initial=0))
    assert (a * (b + c)).allclose(a * b + a * c, rtol=0, atol=1e-12 * scale)


@given(st.sampled_from([2, 4]).flatmap(
    lambda n: st.tuples(st.integers(0, 1), st.integers(0, 1)).flatmap(
        lambda p: st.tuples(homogeneous(n, p[0]), homogeneous(n, p[1]), st.just(p)))))
def test_graded_commutativity(args):
    a, b, (pa, pb) = args
    sign = -1 if pa * pb else 1
    scale = np.max(np.abs(a.coeffs), initial=0) * np.max(np.abs(b.coeffs), initial=0)
    assert (a * b).allclose(sign * (b * a), rtol=0, atol=1e-13 * scale)


@given(homogeneous(4, 1))
def test_odd_squares_to_zero(a):
    assert np.max(np.abs((a * a).coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(a.coeffs)) ** 2)


@given(homogeneous(2, 1), homogeneous(2, 1), homogeneous(2, 1))
def test_three_odd_in_two_generators_vanish(a, b, c):
    assert np.all((a * b * c).coeffs == 0)


@given(homogeneous(4, 0), homogeneous(4, 1))
def test_parity_of_product(a, b):
    p = (a * b).parity(tol=1e-12)
    assert p in ("odd", "even")  # zero product reports even
    if np.any(np.abs((a * b).coeffs) > 1e-12):
        assert p == "odd"


def test_parity_mixed():
    assert (G.scalar(1, 2) + e(0)).parity() == "mixed"


def test_unit():
    a = G(np.arange(16) + 1j, 4)
    assert (G.scalar(1, 4) * a).allclose(a) and (a * G.scalar(1, 4)).allclose(a)


def test_bilinear_extend_examples(rng):
    B = rng.normal(size=(3, 3))
    v, w = rng.normal(size=3), rng.normal(size=3)
    x = G.monomial([0], v, 2)
    y = G.monomial([1], w, 2)
    r = gr_bilinear_extend(B, x, y)
    assert np.isclose(r.extract([0, 1]), v @ B @ w)
    body = gr_bilinear_extend(B, G.scalar(v, 2), G.scalar(w, 2))
    assert np.isclose(body.extract([]), v @ B @ w)
    assert np.all(gr_bilinear_extend(B, x, G.monomial([0], w, 2)).coeffs == 0)


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6),
       st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_bilinear_extend_body_is_B(v, w):
    B = np.array([[1.0, 2.0, 0.5], [0.0, -1.0, 3.0], [1.0, 1.0, 1.0]])
    v, w = np.array(v[:3]) + 1j * np.array(v[3:]), np.array(w[:3])
    r = gr_bilinear_extend(B, G.scalar(v, 4), G.scalar(w, 4))
    assert np.isclose(r.extract([]), v @ B @ w)


def test_bilinear_callable_matches_matrix(rng):
    B = rng.normal(size=(2, 2))
    x = G(rng.normal(size=(4, 2)), 2)
    y = G(rng.normal(size=(4, 2)), 2)
    a = gr_bilinear_extend(B, x, y)
    b = gr_bilinear_extend(lambda u, v: u @ B @ v, x, y)
    assert a.allclose(b)


def test_gr_einsum_matches_bilinear(rng):
    x = G(rng.normal(size=(4, 5, 2)), 2)
    y = G(rng.normal(size=(4, 5, 2)), 2)
    a = gr_einsum("...i,...i->...", x, y)
    b = gr_bilinear_extend(np.eye(2), x, y)
    assert a.allclose(b)


def _sheet(n=32, P=(1.0, 2.0)):
    return Worldsheet(TorusGrid(n, n, *P))


def test_integral_constant():
    sh = _sheet(16, (1.0, 1.0))
    f = G.monomial([0, 1], np.full((16, 16), 2.5), 2)
    r = gr_integral(f, sh)
    assert np.isclose(r.extract([0, 1]), 2.5) and r.extract([]) == 0


def test_integral_sin_squared():
    sh = _sheet(32, (1.0, 2.0))
    s, _ = sh.grid.coords()
    f = G.monomial([0, 1], np.sin(2 * np.pi * s) ** 2, 2)
    r = gr_integral(f, sh)
    assert abs(r.extract([0, 1]) - sh.grid.area / 2) < 1e-13
    assert r.extract([]) == 0


@given(st.integers(0, 2 ** 31 - 1))
def test_extract_commutes_with_integral(seed):
    r = np.random.default_rng(seed)
    sh = Worldsheet(TorusGrid(8, 8), ConformalFactor(1.0, 0.3))
    f = G(r.normal(size=(16, 8, 8)) + 1j * r.normal(size=(16, 8, 8)), 4)
    for measure in ("dsdt", "dvol"):
        I = gr_integral(f, sh, measure)
        for sub in ([], [0, 1], [1, 2, 3]):
            assert np.isclose(I.extract(sub), sh.integrate(f.extract(sub), measure), rtol=1e-14)


def test_json_roundtrip():
    a = G.monomial([2, 0], 1 + 2j, 4) + G.scalar(-3, 4)
    d = a.to_json()
    assert [m["gens"] for m in d["monomials"]] == [[], [0, 2]]
    json.dumps(d)
    assert G.from_json(d).allclose(a)
