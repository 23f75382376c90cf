import numpy as np
import pytest
from hypothesis import given, strategies as st

from supercurves import fields as fl
from supercurves.fields import MapField, SuperField
from supercurves.suite import (conjugate_map, identity_map, linear_map, random_map,
                               random_periodic, random_superfield)
from supercurves.target import FlatTorus, PerturbedR4, RoundSphereChart
from supercurves.worldsheet import ConformalFactor

from conftest import ALL_TARGETS, sheet


def test_dbar_examples():
    sh = sheet(16)
    t = FlatTorus(2)
    a, b = fl.dbar_J(identity_map(sh, t))
    assert np.max(np.abs(a)) == 0 and np.max(np.abs(b)) == 0
    a, b = fl.dbar_J(conjugate_map(sh, t))
    assert np.allclose(a, [1.0, 0.0]) and np.allclose(b, [0.0, -1.0])
    p, q = fl.partial_J(identity_map(sh, t))
    assert np.allclose(p, [1.0, 0.0]) and np.allclose(q, [0.0, 1.0])


@pytest.mark.parametrize("target", ALL_TARGETS, ids=lambda t: type(t).__name__ + str(t.dim))
def test_type_decomposition_sums_to_dphi(target, rng):
    phi = random_map(sheet(16), target, rng)
    (a_s, a_t), (b_s, b_t) = fl.dbar_J(phi), fl.partial_J(phi)
    assert np.allclose(a_s + b_s, phi.d("s"), atol=1e-13)
    assert np.allclose(a_t + b_t, phi.d("t"), atol=1e-13)


def test_hessian_symmetric_on_sphere(rng):
    phi = random_map(sheet(32), RoundSphereChart(), rng)
    assert np.max(np.abs(fl.hessian(phi, "s", "t") - fl.hessian(phi, "t", "s"))) < 1e-10


@pytest.mark.parametrize("target", [RoundSphereChart(), PerturbedR4(0.1)], ids=["sphere", "perturbed"])
def test_pullback_connection_metric_compatible(target, rng):
    sh = sheet(64)
    phi = random_map(sh, target, rng)
    u = random_periodic(sh, target.dim, rng, True, amp=1.0)
    v = random_periodic(sh, target.dim, rng, True, amp=1.0)
    g = phi.g()
    for a in ("s", "t"):
        rhs = fl._gdot(g, fl.pullback_nabla(phi, u, a), v) + fl._gdot(g, u, fl.pullback_nabla(phi, v, a))
        # chain rule, pointwise: d_a g(u, v) = (d_m g)(u, v) d_a phi^m + g(d_a u, v) + g(u, d_a v)
        chain = (np.einsum("...mij,...m,...i,...j->...", phi.dg(), phi.d(a), u, v)
                 + fl._gdot(g, sh.deriv(u, a), v) + fl._gdot(g, u, sh.deriv(v, a)))
        assert np.max(np.abs(chain - rhs)) < 1e-12 * np.max(np.abs(rhs))
        if not target.periodic:
            # g(phi) for a winding T^4 map needs more than 64^2 points to be resolved
            lhs = sh.deriv(fl._gdot(g, u, v), a)
            assert np.max(np.abs(lhs - rhs)) < 1e-8 * np.max(np.abs(lhs))


def test_integration_by_parts_on_sphere(rng):
    sh = sheet(32)
    phi = random_map(sh, RoundSphereChart(), rng)
    u = random_periodic(sh, 2, rng, True, amp=1.0)
    v = random_periodic(sh, 2, rng, True, amp=1.0)
    g = phi.g()
    a = sh.integrate(fl._gdot(g, fl.pullback_nabla(phi, u, "zbar"), v), "dsdt")
    b = sh.integrate(fl._gdot(g, u, fl.pullback_nabla(phi, v, "zbar")), "dsdt")
    assert abs(a + b) < 1e-10 * abs(a)


@pytest.mark.parametrize("target", [RoundSphereChart(), PerturbedR4(0.1), FlatTorus(4)],
                         ids=["sphere", "perturbed", "flat4"])
def test_tension_routes_agree(target, rng):
    sh = sheet(32, lam=ConformalFactor(1.2, 0.4, 1))
    phi = random_map(sh, target, rng)
    a, b = fl.tension(phi), fl.tension_trace(phi)
    assert np.max(np.abs(a - b)) < 1e-9 * np.max(np.abs(b))


def test_linear_maps_are_harmonic():
    sh = sheet(16)
    phi = linear_map(sh, FlatTorus(2), [2.0, 1.0], [-1.0, 3.0])
    assert np.max(np.abs(fl.tension(phi))) < 1e-12


def test_D_phi_flat_is_cauchy_riemann(rng):
    sh = sheet(16)
    phi = random_map(sh, FlatTorus(2), rng)
    xi = random_periodic(sh, 2, rng, True, amp=1.0)
    J = phi.J()
    s, t = fl.D_phi(phi, xi)
    expected = 0.5 * (sh.deriv(xi, "s") + fl._mv(J, sh.deriv(xi, "t")))
    assert np.allclose(s, expected, atol=1e-12)
    assert np.allclose(t, -fl._mv(J, s), atol=1e-12)


@pytest.mark.parametrize("target", ALL_TARGETS, ids=lambda t: type(t).__name__ + str(t.dim))
def test_D_phi_forms_agree(target, rng):
    P = random_superfield(sheet(16), target, rng)
    a, b = fl.D_phi(P.phi, P.xi), fl.D_phi_alt(P.phi, P.xi)
    scale = max(np.max(np.abs(x)) for x in (*a, *b))
    assert max(np.max(np.abs(a[i] - b[i])) for i in (0, 1)) < 1e-10 * scale


def test_D_phi_is_zeroth_order_in_conformal_factor(rng):
    # D_phi does not involve lambda
    target = RoundSphereChart()
    rng2 = np.random.default_rng(5)
    P1 = random_superfield(sheet(16), target, rng2)
    P2 = SuperField(P1.phi.on(sheet(16, lam=ConformalFactor(2.0, 0.5))), P1.psi1, P1.psi2, P1.xi)
    a, b = fl.D_phi(P1.phi, P1.xi), fl.D_phi(P2.phi, P2.xi)
    assert np.allclose(a[0], b[0]) and np.allclose(a[1], b[1])


@pytest.mark.parametrize("P_s", [1.0, 2.0])
def test_dirac_plane_wave(P_s):
    sh = sheet(16, P=(P_s, 1.0))
    phi = MapField(sh, FlatTorus(2))
    s, _ = sh.grid.coords()
    v = np.array([1.0, 0.5j])
    psi = np.exp(2j * np.pi * s / P_s)[..., None] * v
    _, minus = fl.dirac(phi, psi, np.zeros_like(psi))
    assert np.allclose(minus, 2j * np.pi / P_s * psi, atol=1e-12)


def test_dirac_squared_is_laplacian(rng):
    sh = sheet(32)
    phi = MapField(sh, FlatTorus(2))
    psi = random_periodic(sh, 2, rng, True, amp=1.0)
    _, m = fl.dirac(phi, psi, np.zeros_like(psi))
    back, _ = fl.dirac(phi, np.zeros_like(psi), m)
    lap = sh.deriv(sh.deriv(psi, "s"), "s") + sh.deriv(sh.deriv(psi, "t"), "t")
    assert np.max(np.abs(back + lap)) < 1e-9 * np.max(np.abs(lap))


def test_induced_psi_type():
    sh = sheet(16)
    t = FlatTorus(2)
    zeta = np.full((16, 16), 0.7 - 0.2j)
    hol = identity_map(sh, t)
    psi = fl.induced_psi(hol, zeta)
    assert np.max(np.abs(fl.residual_10(hol, psi))) == 0
    assert np.max(np.abs(fl.D_phi(hol, psi)[0])) < 1e-14
    anti = conjugate_map(sh, t)
    assert np.max(np.abs(fl.residual_10(anti, fl.induced_psi(anti, zeta)))) > 0.5


@given(st.integers(0, 2 ** 31 - 1))
def test_projection_idempotent(seed):
    r = np.random.default_rng(seed)
    sh = sheet(8)
    phi = random_map(sh, PerturbedR4(0.1), r)
    v = random_periodic(sh, 4, r, True, amp=1.0)
    p = fl.project_10(phi, v)
    assert np.allclose(fl.project_10(phi, p), p, atol=1e-12)
    assert np.max(np.abs(fl.residual_10(phi, p))) < 1e-12


def test_residuals_of_random_fields_nonzero(rng):
    P = random_superfield(sheet(16), PerturbedR4(0.1), rng)
    res = fl.supercurve_residuals(P)
    assert min(res.values()) > 1e-6
    loc = fl.holo_local_residuals(P)
    assert set(loc) == set(fl.LOCAL_OVER_DEFINITION)


def test_local_residuals_proportional_flat(rng):
    P = random_superfield(sheet(16), FlatTorus(4), rng, project=True)
    dfn, loc = fl.supercurve_residual_fields(P), fl.holo_local_residual_fields(P)
    for k, c in fl.LOCAL_OVER_DEFINITION.items():
        assert np.allclose(loc[k], c * dfn[k], atol=1e-12 * max(1.0, np.max(np.abs(loc[k]))))


def test_nijenhuis_contraction_matches_tensor(rng, perturbed):
    P = random_superfield(sheet(8), perturbed, rng, project=True)
    lhs = fl.nijenhuis_contraction(P.phi, P.psi1, P.psi2)
    N = perturbed.nijenhuis(P.phi.values, P.psi1, P.psi2)
    assert np.allclose(lhs.extract([0, 1]), -0.5j * N, atol=1e-9 * np.max(np.abs(N)))
    assert np.max(np.abs(lhs.body)) == 0


def test_superfield_shape_checked():
    sh = sheet(8)
    phi = MapField(sh, FlatTorus(2))
    with pytest.raises(ValueError):
        SuperField(phi, np.zeros((8, 8, 2)), np.zeros((8, 8, 3)), np.zeros((8, 8, 2)))
