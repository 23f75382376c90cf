"""Action functionals, the superspace Lagrangian and the identities relating them."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import conventions as cv
from .fields import (MapField, SuperField, _gamma, _gdot, _mv, dbar_J, dirac, pullback_nabla,
                     tension)
from .grassmann import (ETA1, ETA2, ETA1_2, ETA2_2, THETA_M, THETA_P, GrassmannElement,
                        eta_pair, gr_bilinear_extend, gr_einsum, gr_integral, mask)

ETA12_4 = mask([ETA1, ETA2])   # eta1 eta2 slot in the 4-generator algebra
ETA12_2 = mask([ETA1_2, ETA2_2])


@dataclass
class GrassmannAction:
    """Even Grassmann number: body + soul * eta1 eta2."""
    body: float
    soul: complex
    body_imag: float = 0.0     # diagnostic only; a nonzero value signals a bug

    def __add__(self, other: "GrassmannAction"):
        return GrassmannAction(self.body + other.body, self.soul + other.soul,
                               self.body_imag + other.body_imag)

    def __sub__(self, other: "GrassmannAction"):
        return GrassmannAction(self.body - other.body, self.soul - other.soul,
                               self.body_imag - other.body_imag)

    def scaled(self, c: float):
        return GrassmannAction(c * self.body, c * self.soul, c * self.body_imag)

    @classmethod
    def from_complex(cls, body: complex, soul: complex):
        return cls(float(np.real(body)), complex(soul), float(np.imag(body)))

    def to_dict(self) -> dict:
        return {"body": self.body, "soul": {"re": self.soul.real, "im": self.soul.imag}}

    def abs_max(self) -> float:
        return max(abs(self.body), abs(self.soul))


# ---------------------------------------------------------------------------
# classical pieces

def energy_density(phi: MapField):
    """|dphi|^2_{h,g} * lambda = |phi_s|^2_g + |phi_t|^2_g (lambda cancels)."""
    g = phi.g()
    return _gdot(g, phi.d("s"), phi.d("s")).real + _gdot(g, phi.d("t"), phi.d("t")).real


def harmonic_action(phi: MapField) -> float:
    return float(0.5 * phi.sheet.integrate(energy_density(phi), "dsdt"))


def pullback_omega_integral(phi: MapField) -> float:
    """Quadrature of omega_ij(phi) d_s phi^i d_t phi^j over the torus."""
    dens = _gdot(phi.omega(), phi.d("s"), phi.d("t")).real
    return float(phi.sheet.integrate(dens, "dsdt"))


def pullback_omega_topological(phi: MapField) -> Optional[float]:
    g = phi.sheet.grid
    return phi.target.topological_omega(phi.slope_s, phi.slope_t, g.P_s, g.P_t)


def dbar_energy(phi: MapField) -> float:
    """int |dbar_J phi|^2 dvol = int (|a|^2 + |J a|^2) ds dt."""
    a, b = dbar_J(phi)
    g = phi.g()
    return float(phi.sheet.integrate(_gdot(g, a, a).real + _gdot(g, b, b).real, "dsdt"))


def relative_defect(lhs, rhs_terms) -> float:
    """|lhs - sum(rhs)| / max magnitude of all terms (0 if everything vanishes)."""
    vals = [np.asarray(lhs, complex)] + [np.asarray(r, complex) for r in rhs_terms]
    scale = max(float(np.max(np.abs(v))) for v in vals)
    d = float(np.max(np.abs(vals[0] - sum(vals[1:]))))
    return 0.0 if scale == 0 else d / scale


def _report(check, lhs, rhs_terms, defect, tolerance, sheet, **extra):
    grid = sheet.grid
    out = {"check": check, "lhs": lhs, "rhs_terms": rhs_terms, "defect": defect,
           "tolerance": tolerance, "pass": bool(defect <= tolerance),
           "grid": [grid.n_s, grid.n_t], "scheme": grid.scheme}
    out.update(extra)
    return out


def verify_classical_identity(phi: MapField, tolerance: float = 1e-9) -> dict:
    """1/2 int |dphi|^2 = int phi*omega + int |dbar_J phi|^2, evaluated independently.

    The phi*omega term uses the exact topological value when the winding
    determines it; the quadrature value is reported alongside.
    """
    lhs = harmonic_action(phi)
    quad = pullback_omega_integral(phi)
    topo = pullback_omega_topological(phi)
    w = quad if topo is None else topo
    dbar = dbar_energy(phi)
    return _report("classical_identity", lhs, [w, dbar], relative_defect(lhs, [w, dbar]),
                   tolerance, phi.sheet, omega_quadrature=quad,
                   omega_source="quadrature" if topo is None else "topological")


# ---------------------------------------------------------------------------
# pairings and the Dirac term

def B_pairing(g, psi_eplus, psi_eminus, chi_eplus, chi_eminus):
    """B(psi, chi) = g(psi_e+, chi_e-) + g(psi_e-, chi_e+), complex-bilinear."""
    return _gdot(g, psi_eplus, chi_eminus) + _gdot(g, psi_eminus, chi_eplus)


def H_pairing(g, psi_eplus, psi_eminus, chi_eplus, chi_eminus):
    """Re[g(conj psi_e+, chi_e+) + g(conj psi_e-, chi_e-)]."""
    return (_gdot(g, np.conj(psi_eplus), chi_eplus)
            + _gdot(g, np.conj(psi_eminus), chi_eminus)).real


def dirac_term_grassmann(Phi: SuperField) -> GrassmannElement:
    """Pointwise B(psi, Dslash psi) for psi = eta1 psi1 + eta2 psi2 in S+ (2 generators)."""
    phi, sheet = Phi.phi, Phi.sheet
    pe = eta_pair(sheet.to_eplus(Phi.psi1), sheet.to_eplus(Phi.psi2))
    zero = GrassmannElement.zeros(2, pe.shape)
    # Dslash applied coefficient-wise: S- slot from psi_e+, S+ slot from psi_e- = 0
    d_minus = pe.map(lambda c: dirac(phi, c, np.zeros_like(c))[1])
    d_plus = zero.map(lambda c: dirac(phi, np.zeros_like(c), c)[0])
    g = phi.g()
    return gr_bilinear_extend(g, pe, d_minus) + gr_bilinear_extend(g, zero, d_plus)


def action_A1(Phi: SuperField, dirac_coeff: complex = cv.DIRAC_COEFF) -> GrassmannAction:
    phi, sheet = Phi.phi, Phi.sheet
    body = harmonic_action(phi)
    xi_term = -sheet.integrate(_gdot(phi.g(), Phi.xi, tension(phi)), "dvol")
    B = gr_integral(dirac_term_grassmann(Phi), sheet, "dvol")
    soul = xi_term + dirac_coeff * B.extract([ETA1_2, ETA2_2])
    return GrassmannAction(body, complex(soul))


def action_A2(phi: MapField, psi_eplus, psi_eminus=None) -> float:
    """int dvol (|dphi|^2 + (psi, Dslash psi)) with the Hermitian pairing."""
    if psi_eminus is None:
        psi_eminus = np.zeros_like(psi_eplus)
    dp, dm = dirac(phi, psi_eplus, psi_eminus)
    h = H_pairing(phi.g(), psi_eplus, psi_eminus, dp, dm)
    return float(phi.sheet.integrate(energy_density(phi), "dsdt")
                 + phi.sheet.integrate(h, "dvol"))


def action_A2_direct(phi: MapField, psi_eplus, psi_eminus=None) -> float:
    """Same functional by explicit real decomposition psi = a e + b (i e) per frame vector."""
    if psi_eminus is None:
        psi_eminus = np.zeros_like(psi_eplus)
    dp, dm = dirac(phi, psi_eplus, psi_eminus)
    g = phi.g()
    tot = 0.0
    for u, v in ((psi_eplus, dp), (psi_eminus, dm)):
        tot = tot + _gdot(g, u.real, v.real) + _gdot(g, u.imag, v.imag)
    lam = phi.sheet.lam_values
    dens = energy_density(phi) + lam * tot.real
    return float(np.sum(dens) * phi.sheet.grid.h_s * phi.sheet.grid.h_t)


# ---------------------------------------------------------------------------
# superspace route

def superfield_expansion(Phi: SuperField) -> GrassmannElement:
    """phi# = phi + theta+ (eta1 psi1 + eta2 psi2) + eta1 eta2 xi (4 generators)."""
    phi = Phi.phi
    F = GrassmannElement.scalar(phi.values, 4)
    F = F + GrassmannElement.monomial([THETA_P, ETA1], Phi.psi1, 4)
    F = F + GrassmannElement.monomial([THETA_P, ETA2], Phi.psi2, 4)
    F = F + GrassmannElement.monomial([ETA1, ETA2], Phi.xi, 4)
    return F


def nilpotent_part(F: GrassmannElement) -> GrassmannElement:
    c = F.coeffs.copy()
    c[0] = 0
    return GrassmannElement(c, F.n_gens)


def compose(F: GrassmannElement, f0, df) -> GrassmannElement:
    """f(phi#) = f(phi) + nu^m d_m f(phi), exact because nu^m nu^n = 0."""
    nu = nilpotent_part(F)
    out = np.zeros((F.coeffs.shape[0],) + np.shape(f0), complex)
    out[0] = f0
    for m in range(1, F.coeffs.shape[0]):
        if np.any(nu.coeffs[m]):
            out[m] = _contract_first(nu.coeffs[m], df)
    return GrassmannElement(out, F.n_gens)


def _contract_first(v, df):
    """v^a d_a f with df laid out as [..., a, *tensor]."""
    extra = df.ndim - v.ndim
    return np.sum(v.reshape(v.shape + (1,) * extra) * df, axis=v.ndim - 1)


def _dcoeffs(F: GrassmannElement, phi: MapField, direction: str) -> GrassmannElement:
    """Coefficient-wise worldsheet derivative; the body uses the exact map derivative."""
    c = np.empty_like(F.coeffs)
    c[0] = phi.d(direction)
    for m in range(1, c.shape[0]):
        c[m] = phi.sheet.deriv(F.coeffs[m], direction) if np.any(F.coeffs[m]) else 0
    return GrassmannElement(c, F.n_gens)


def super_derivatives(Phi: SuperField):
    """(D+ phi#, D- phi#) with D+ = d_theta+ + theta+ d_z, D- = d_theta- + theta- d_zbar."""
    F = superfield_expansion(Phi)
    tp = GrassmannElement.generator(THETA_P, 4)
    tm = GrassmannElement.generator(THETA_M, 4)
    X = F.deriv(THETA_P) + tp * _dcoeffs(F, Phi.phi, "z")
    Y = F.deriv(THETA_M) + tm * _dcoeffs(F, Phi.phi, "zbar")
    return F, X, Y


def _berezin_density(L: GrassmannElement):
    """d_theta+ d_theta- L (d_theta- applied first), an eta-only element."""
    return L.deriv(THETA_M).deriv(THETA_P)


def _integrate_theta(Phi: SuperField, L: GrassmannElement) -> GrassmannAction:
    dens = cv.LAGRANGIAN_MEASURE * _berezin_density(L).coeffs
    body = Phi.sheet.integrate(dens[0], "dsdt")
    soul = Phi.sheet.integrate(dens[ETA12_4], "dsdt")
    return GrassmannAction.from_complex(body, soul)


def lagrangian_integrand(Phi: SuperField) -> GrassmannElement:
    """g_Phi(dPhi(D+), dPhi(D-)) = g_ij(phi#) X^i Y^j as a grid of Grassmann numbers."""
    phi = Phi.phi
    F, X, Y = super_derivatives(Phi)
    G = compose(F, phi.g(), phi.dg())
    return gr_einsum("...j,...j->...", gr_einsum("...ij,...i->...j", G, X), Y)


def super_lagrangian(Phi: SuperField) -> GrassmannAction:
    return _integrate_theta(Phi, lagrangian_integrand(Phi))


def lagrangian_pieces(Phi: SuperField):
    """Integrands of L_dbar = 2 g(dbar X, dbar Y) and L_omega = -i omega(X, Y)."""
    phi = Phi.phi
    F, X, Y = super_derivatives(Phi)
    G = compose(F, phi.g(), phi.dg())
    W = compose(F, phi.omega(), _domega(phi))
    Jf = compose(F, phi.J(), phi.dJ())
    JX = gr_einsum("...ij,...j->...i", Jf, X)
    JY = gr_einsum("...ij,...j->...i", Jf, Y)
    dX = (X + JX * 1j) * 0.5
    dY = (Y - JY * 1j) * 0.5
    L_dbar = gr_einsum("...j,...j->...", gr_einsum("...ij,...i->...j", G, dX), dY) * 2.0
    L_om = gr_einsum("...j,...j->...", gr_einsum("...ij,...i->...j", W, X), Y) * (-1j)
    return L_dbar, L_om


def _domega(phi: MapField):
    t = phi.target
    if hasattr(t, "domega"):
        return t.domega(phi.values)
    if t.omega_constant:
        return np.zeros(phi.values.shape + (t.dim, t.dim))
    from .target import _fd4
    return _fd4(t.omega, np.asarray(phi.values, float), t.fd_step, t.dim)


def lagrangian_decompose(Phi: SuperField):
    L_dbar, L_om = lagrangian_pieces(Phi)
    return _integrate_theta(Phi, L_dbar), _integrate_theta(Phi, L_om)


def verify_super_identity(Phi: SuperField, tolerance: float = 1e-9) -> dict:
    """int L = int phi*omega + int L_dbar, with three independent evaluations."""
    lhs = super_lagrangian(Phi)
    L_dbar, L_om = lagrangian_decompose(Phi)
    topo = pullback_omega_topological(Phi.phi)
    w = pullback_omega_integral(Phi.phi) if topo is None else topo
    rhs = [GrassmannAction(w, 0j), L_dbar]
    lhs_v = np.array([lhs.body, lhs.soul])
    rhs_v = [np.array([r.body, r.soul]) for r in rhs]
    defect = relative_defect(lhs_v, rhs_v)
    return _report("super_identity", lhs.to_dict(), [r.to_dict() for r in rhs], defect,
                   tolerance, Phi.sheet, L_omega=L_om.to_dict(),
                   body_defect=abs(lhs.body - w - L_dbar.body),
                   soul_defect=abs(lhs.soul - L_dbar.soul))


def verify_lagrangian_a1(Phi: SuperField, tolerance: float = 1e-9) -> dict:
    lhs = super_lagrangian(Phi)
    rhs = action_A1(Phi)
    d_body = relative_defect(lhs.body, [rhs.body])
    d_soul = relative_defect(lhs.soul, [rhs.soul])
    return _report("lagrangian_a1", lhs.to_dict(), [rhs.to_dict()], max(d_body, d_soul),
                   tolerance, Phi.sheet, body_defect=d_body, soul_defect=d_soul)


def component_density(Phi: SuperField) -> GrassmannElement:
    """phi0(g)(d_z phi0, d_zbar phi0) - <psi_+, nabla_zbar psi_+> with phi0 = phi + eta1 eta2 xi.

    Built in the 2-generator algebra, independently of the superspace route.
    """
    phi = Phi.phi
    g, dg = phi.g(), phi.dg()
    n = 2
    e12 = lambda v: GrassmannElement.monomial([ETA1_2, ETA2_2], v, n)
    G0 = GrassmannElement.scalar(g, n) + e12(np.einsum("...m,...mij->...ij", Phi.xi, dg))
    pz = GrassmannElement.scalar(phi.d("z"), n) + e12(phi.sheet.deriv(Phi.xi, "z"))
    pzb = GrassmannElement.scalar(phi.d("zbar"), n) + e12(phi.sheet.deriv(Phi.xi, "zbar"))
    first = gr_einsum("...j,...j->...", gr_einsum("...ij,...i->...j", G0, pz), pzb)
    psi = eta_pair(Phi.psi1, Phi.psi2)
    npsi = psi.map(lambda c: pullback_nabla(phi, c, "zbar"))
    second = gr_bilinear_extend(g, psi, npsi)
    return first - second


def theta_coefficient(L: GrassmannElement) -> GrassmannElement:
    """Coefficient of theta+ theta- in L, returned in the 2-generator eta algebra."""
    out = np.zeros((4,) + L.shape, complex)
    base = mask([THETA_P, THETA_M])
    for m2 in range(4):
        out[m2] = L.coeffs[base | (m2 << 2)]
    return GrassmannElement(out, 2)


# ---------------------------------------------------------------------------
# Euler-Lagrange equations

def _riem(R, u, v, w):
    """R(u, v) w with R^p_qij w^q u^i v^j."""
    return np.einsum("...pqij,...q,...i,...j->...p", R, w, u, v)


def rough_laplacian(phi: MapField, xi):
    """lambda^{-1} sum_a nabla_a nabla_a xi (trace-Laplacian along phi)."""
    out = 0
    for a in ("s", "t"):
        out = out + pullback_nabla(phi, pullback_nabla(phi, xi, a), a)
    return out / phi.sheet.lam_values[..., None]


def el_xi_equation(Phi: SuperField):
    """nabla^2 xi + sum_a R(xi, e_a) e_a + 4 R(psi1_e, psi2_e) e_zbar.

    e_a = lambda^{-1/2} d_a phi, e_zbar = lambda^{-1/2} d_zbar phi and
    psi_je = lambda^{-1/4} psi_jtheta; the curvature is R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
    """
    phi = Phi.phi
    R = phi.curvature()
    lam = phi.sheet.lam_values[..., None]
    curv = sum(_riem(R, Phi.xi, phi.d(a), phi.d(a)) for a in ("s", "t")) / lam
    psi_term = 4 * _riem(R, Phi.psi1, Phi.psi2, phi.d("zbar")) / lam
    return rough_laplacian(phi, Phi.xi) + curv + psi_term


def el_residual_fields(Phi: SuperField) -> dict:
    phi = Phi.phi
    return {
        "tension": tension(phi),
        "dirac_psi1": pullback_nabla(phi, Phi.psi1, "zbar"),
        "dirac_psi2": pullback_nabla(phi, Phi.psi2, "zbar"),
        "xi_equation": el_xi_equation(Phi),
    }


def el_residuals(Phi: SuperField) -> dict:
    return {k: float(np.max(np.abs(v), initial=0.0)) for k, v in el_residual_fields(Phi).items()}


def el_pairing(Phi: SuperField, V: SuperField, dirac_coeff: complex = cv.DIRAC_COEFF) -> GrassmannAction:
    """First variation of A1 along V predicted from the EL residuals.

    V.phi.periodic = zeta (chart-addition), V.psi_j = gamma_j, V.xi = chi; with
    covariant variations chi~ = chi + Gamma(zeta, xi), gamma~ = gamma + Gamma(zeta, psi):

      body: -int g(zeta, tau) dvol
      soul: -int g(chi~, tau) dvol + 4 c int [g(gamma~1, nabla_zbar psi2) - g(gamma~2, nabla_zbar psi1)] dsdt
            - int g(zeta, E_xi) dvol

    where c = DIRAC_COEFF (so the middle term is -4 int [...] for c = -1).
    """
    phi, sheet = Phi.phi, Phi.sheet
    zeta = V.phi.periodic
    G, g = phi.gamma(), phi.g()
    res = el_residual_fields(Phi)
    tau = res["tension"]
    chi = V.xi + _gamma(G, zeta, Phi.xi)
    g1 = V.psi1 + _gamma(G, zeta, Phi.psi1)
    g2 = V.psi2 + _gamma(G, zeta, Phi.psi2)
    body = -sheet.integrate(_gdot(g, zeta, tau), "dvol")
    soul = (-sheet.integrate(_gdot(g, chi, tau), "dvol")
            + 4 * dirac_coeff * sheet.integrate(_gdot(g, g1, res["dirac_psi2"])
                                                - _gdot(g, g2, res["dirac_psi1"]), "dsdt")
            - sheet.integrate(_gdot(g, zeta, res["xi_equation"]), "dvol"))
    return GrassmannAction.from_complex(body, soul)


def directional_derivative(functional: str, Phi: SuperField, V: SuperField, eps: float = 1e-3):
    """Central difference (F(Phi + eps V) - F(Phi - eps V)) / 2 eps.

    Returns (GrassmannAction, report dict).  A warning is attached when the
    step is small enough that cancellation dominates.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    F = _functional(functional)
    fp, fm = F(Phi.varied(V, eps)), F(Phi.varied(V, -eps))
    val = (fp - fm).scaled(1 / (2 * eps))
    scale = max(fp.abs_max(), fm.abs_max(), 1e-300)
    roundoff = np.finfo(float).eps * scale / eps
    info = {"eps": eps, "roundoff_estimate": roundoff, "warning": None}
    if roundoff > 1e-6 * max(val.abs_max(), 1e-300) and roundoff > 1e-10:
        info["warning"] = f"step {eps:g} likely dominated by cancellation (roundoff ~{roundoff:.1e})"
        warnings.warn(info["warning"])
    return val, info


def _functional(name: str) -> Callable[[SuperField], GrassmannAction]:
    if name == "A1":
        return action_A1
    if name == "A":
        return lambda P: GrassmannAction(harmonic_action(P.phi), 0j)
    if name == "A2":
        return lambda P: GrassmannAction(action_A2(P.phi, P.sheet.to_eplus(P.psi1)), 0j)
    raise ValueError(f"unknown functional {name!r}")


# ---------------------------------------------------------------------------
# comparison of the spinor equations of A1 and A2

def compare_A1_A2(Phi: SuperField, tolerance: float = 1e-9) -> dict:
    """Compare nabla_zbar psi_1+ = 0 (A1) with nabla_zbar psi_1e+ = 0 (A2).

    nabla_zbar psi_+ = lambda^{1/4} nabla_zbar psi_e+ + d_zbar(lambda^{1/4}) psi_e+.
    """
    if np.any(Phi.psi2) or np.any(Phi.xi):
        raise ValueError("compare_A1_A2 needs psi2 = 0 and xi = 0")
    phi, sheet = Phi.phi, Phi.sheet
    pe = sheet.to_eplus(Phi.psi1)
    lam = sheet.lam_values[..., None]
    cond_a1 = pullback_nabla(phi, Phi.psi1, "zbar")
    cond_a2 = lam ** 0.25 * pullback_nabla(phi, pe, "zbar")
    defect_field = cond_a1 - cond_a2
    analytic = sheet.lam.dzbar_power(sheet.grid, 0.25)[..., None] * pe
    product_rule = float(np.max(np.abs(defect_field - analytic), initial=0.0))
    scale = max(float(np.max(np.abs(cond_a1), initial=0.0)),
                float(np.max(np.abs(cond_a2), initial=0.0)),
                float(np.max(np.abs(analytic), initial=0.0)))
    rel = 0.0 if scale == 0 else product_rule / scale
    return _report("a1_a2_comparison", float(np.max(np.abs(defect_field), initial=0.0)),
                   [float(np.max(np.abs(analytic), initial=0.0))], rel, tolerance, sheet,
                   lambda_constant=sheet.lam.is_constant,
                   conditions_coincide=bool(np.max(np.abs(defect_field), initial=0.0) <= 1e-12 * max(scale, 1.0)),
                   defect_max=float(np.max(np.abs(defect_field), initial=0.0)),
                   dirac_A2_max=float(np.max(np.abs(dirac(phi, pe, np.zeros_like(pe))[1]), initial=0.0)))


# ---------------------------------------------------------------------------
# calibration of the Dirac coupling

def calibrate_dirac_coefficient(n: int = 16) -> complex:
    """Solve for the Dirac prefactor making int L = A1 in the analytic flat case."""
    from .target import FlatTorus
    from .worldsheet import TorusGrid, Worldsheet
    sheet = Worldsheet(TorusGrid(n, n))
    phi = MapField(sheet, FlatTorus(2))
    s, _ = sheet.grid.coords()
    v, w = np.array([1.0, 0.3j]), np.array([0.2, 1.0])
    psi1 = np.exp(-2j * np.pi * s)[..., None] * v
    psi2 = np.exp(2j * np.pi * s)[..., None] * w
    Phi = SuperField(phi, psi1, psi2, np.zeros_like(psi1))
    lag = super_lagrangian(Phi).soul
    unit = action_A1(Phi, dirac_coeff=1.0).soul
    return lag / unit
