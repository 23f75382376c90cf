"""Fields along a map and the first-order operators acting on them.

One-forms on the worldsheet are returned as pairs (s-component, t-component).
Sections (xi, psi_theta) are complex arrays of shape (n_s, n_t, d).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .grassmann import GrassmannElement, eta_pair, gr_einsum
from .target import TargetChart
from .worldsheet import Worldsheet

OneForm = Tuple[np.ndarray, np.ndarray]


def _mv(A, v):
    """Pointwise matrix-vector product on the last axes."""
    return np.einsum("...ij,...j->...i", A, v)


def _gamma(G, u, v):
    """Gamma^k_lm u^l v^m."""
    return np.einsum("...klm,...l,...m->...k", G, u, v)


def _gdot(g, u, v):
    """Complex-bilinear g(u, v) pointwise."""
    return np.einsum("...ij,...i,...j->...", g, u, v)


class MapField:
    """phi: Sigma -> X as a periodic part plus a linear winding part.

    phi(s, t) = periodic(s, t) + slope_s * s + slope_t * t in chart coordinates.
    For torus targets the slopes are the winding per period divided by the
    period; derivatives of the linear part are exact.
    """

    def __init__(self, sheet: Worldsheet, target: TargetChart, periodic=None,
                 slope_s=None, slope_t=None):
        g = sheet.grid
        d = target.dim
        self.sheet = sheet
        self.target = target
        self.periodic = (np.zeros((g.n_s, g.n_t, d)) if periodic is None
                         else np.asarray(periodic, float))
        self.slope_s = np.zeros(d) if slope_s is None else np.asarray(slope_s, float)
        self.slope_t = np.zeros(d) if slope_t is None else np.asarray(slope_t, float)
        if self.periodic.shape != (g.n_s, g.n_t, d):
            raise ValueError(f"phi shape {self.periodic.shape} != {(g.n_s, g.n_t, d)}")
        self._cache = {}

    @property
    def values(self):
        s, t = self.sheet.grid.coords()
        return self.periodic + s[..., None] * self.slope_s + t[..., None] * self.slope_t

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def d(self, direction: str):
        """First derivative including the exact linear part."""
        def f():
            base = self.sheet.deriv(self.periodic, direction)
            lin = {"s": self.slope_s, "t": self.slope_t,
                   "z": 0.5 * (self.slope_s - 1j * self.slope_t),
                   "zbar": 0.5 * (self.slope_s + 1j * self.slope_t)}[direction]
            return base + lin
        return self._memo(("d", direction), f)

    def dd(self, a: str, b: str):
        """Second derivative d_a d_b phi (linear part drops out)."""
        return self._memo(("dd", a, b),
                          lambda: self.sheet.deriv(self.sheet.deriv(self.periodic, b), a))

    # target tensors along phi, cached
    def J(self):
        return self._memo("J", lambda: self.target.J(self.values))

    def g(self):
        return self._memo("g", lambda: self.target.g(self.values))

    def omega(self):
        return self._memo("omega", lambda: self.target.omega(self.values))

    def dJ(self):
        return self._memo("dJ", lambda: self.target.dJ(self.values))

    def dg(self):
        return self._memo("dg", lambda: self.target.dg(self.values))

    def gamma(self):
        return self._memo("gamma", lambda: self.target.christoffel(self.values))

    def curvature(self):
        return self._memo("R", lambda: self.target.curvature(self.values))

    def nijenhuis_tensor(self):
        return self._memo("N", lambda: self.target.nijenhuis_tensor(self.values))

    def shifted(self, dperiodic, scale: float = 1.0) -> "MapField":
        """Chart-addition variation phi + scale * dperiodic."""
        return MapField(self.sheet, self.target, self.periodic + scale * np.asarray(dperiodic),
                        self.slope_s, self.slope_t)

    def on(self, sheet: Worldsheet) -> "MapField":
        return MapField(sheet, self.target, self.periodic, self.slope_s, self.slope_t)


@dataclass
class SuperField:
    """Component tuple (phi, psi1, psi2, xi); psi_j are theta+-components psi_{j theta}."""
    phi: MapField
    psi1: np.ndarray
    psi2: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        shape = self.phi.periodic.shape
        for name in ("psi1", "psi2", "xi"):
            arr = np.asarray(getattr(self, name), complex)
            if arr.shape != shape:
                raise ValueError(f"{name} shape {arr.shape} != {shape}")
            setattr(self, name, arr)

    @classmethod
    def zero_soul(cls, phi: MapField) -> "SuperField":
        z = np.zeros(phi.periodic.shape, complex)
        return cls(phi, z, z.copy(), z.copy())

    @property
    def sheet(self):
        return self.phi.sheet

    @property
    def target(self):
        return self.phi.target

    def varied(self, V: "SuperField", eps: float) -> "SuperField":
        """Chart-addition update Phi + eps*V (V.phi carries the periodic variation zeta)."""
        return SuperField(self.phi.shifted(V.phi.periodic, eps), self.psi1 + eps * V.psi1,
                          self.psi2 + eps * V.psi2, self.xi + eps * V.xi)


# ---------------------------------------------------------------------------
# first-order operators

def dbar_J(phi: MapField) -> OneForm:
    a = 0.5 * (phi.d("s") + _mv(phi.J(), phi.d("t")))
    return a, -_mv(phi.J(), a)


def partial_J(phi: MapField) -> OneForm:
    b = 0.5 * (phi.d("s") - _mv(phi.J(), phi.d("t")))
    return b, _mv(phi.J(), b)


def pullback_nabla(phi: MapField, sigma, direction: str):
    """(nabla_a sigma)^k = d_a sigma^k + Gamma^k_lm(phi) d_a phi^l sigma^m."""
    return phi.sheet.deriv(sigma, direction) + _gamma(phi.gamma(), phi.d(direction), sigma)


def tension(phi: MapField):
    """tau = (4/lambda)(d_z d_zbar phi + Gamma(d_z phi, d_zbar phi))."""
    sheet = phi.sheet
    lap = sheet.deriv(sheet.deriv(phi.periodic, "zbar"), "z")
    t = lap + _gamma(phi.gamma(), phi.d("z"), phi.d("zbar"))
    return (4 / sheet.lam_values[..., None] * t).real


def tension_trace(phi: MapField):
    """Trace form: lambda^{-1}(sum_a d_a d_a phi + Gamma(d_a phi, d_a phi))."""
    G = phi.gamma()
    t = (phi.dd("s", "s") + phi.dd("t", "t")
         + _gamma(G, phi.d("s"), phi.d("s")) + _gamma(G, phi.d("t"), phi.d("t")))
    return t / phi.sheet.lam_values[..., None]


def hessian(phi: MapField, a: str, b: str):
    """nabla_a dphi[d_b] = d_a d_b phi + Gamma(d_a phi, d_b phi)."""
    return phi.dd(a, b) + _gamma(phi.gamma(), phi.d(a), phi.d(b))


def D_phi(phi: MapField, xi) -> OneForm:
    """1/2(nabla xi + J nabla xi o j) - 1/2 J (nabla_xi J) d_J phi.

    Complex xi gives the complex-linear extension D^C.
    """
    J = phi.J()
    ns, nt = pullback_nabla(phi, xi, "s"), pullback_nabla(phi, xi, "t")
    b_s, b_t = partial_J(phi)
    nJ = _nabla_J_along(phi, xi)
    s = 0.5 * (ns + _mv(J, nt)) - 0.5 * _mv(J, _mv(nJ, b_s))
    t = 0.5 * (nt - _mv(J, ns)) - 0.5 * _mv(J, _mv(nJ, b_t))
    return s, t


def _nabla_J_along(phi: MapField, v):
    """(nabla_v J)^i_k for a vector field v along phi (complex-linear in v)."""
    J, dJ, G = phi.J(), phi.dJ(), phi.gamma()
    t = dJ + np.einsum("...iml,...lk->...mik", G, J) - np.einsum("...il,...lmk->...mik", J, G)
    return np.einsum("...m,...mik->...ik", v, t)


def D_phi_alt(phi: MapField, xi) -> OneForm:
    """(nabla~ xi)^{0,1} + 1/4 N_J(xi, d_J phi), nabla~ = nabla - 1/2 J (nabla J)."""
    J = phi.J()
    out = []
    for a in ("s", "t"):
        nJa = _nabla_J_along(phi, phi.d(a))
        out.append(pullback_nabla(phi, xi, a) - 0.5 * _mv(J, _mv(nJa, xi)))
    ts, tt = out
    N = phi.nijenhuis_tensor()
    b_s, b_t = partial_J(phi)
    nij = lambda u: np.einsum("...pij,...i,...j->...p", N, xi, u)
    s = 0.5 * (ts + _mv(J, tt)) + 0.25 * nij(b_s)
    t = 0.5 * (tt - _mv(J, ts)) + 0.25 * nij(b_t)
    return s, t


def dirac(phi: MapField, psi_eplus, psi_eminus):
    """Twisted Dirac operator in e+/e- components: 2 lambda^{-1/2} (-nabla_z psi_e-, nabla_zbar psi_e+)."""
    f = 2 * phi.sheet.lam_values[..., None] ** -0.5
    return (-f * pullback_nabla(phi, psi_eminus, "z"),
            f * pullback_nabla(phi, psi_eplus, "zbar"))


def induced_psi(phi: MapField, zeta_minus):
    """psi_theta = zeta_- * dphi[d_z]."""
    z = np.asarray(zeta_minus)
    if z.ndim == 2:
        z = z[..., None]
    return z * phi.d("z")


def residual_10(phi: MapField, psi):
    """psi + i J psi, vanishing iff psi is of type (1,0)."""
    return psi + 1j * _mv(phi.J(), psi)


def project_10(phi: MapField, v):
    """(1,0)-part 1/2(v - i J v)."""
    return 0.5 * (v - 1j * _mv(phi.J(), v))


def _maxnorm(*arrs) -> float:
    return float(max(np.max(np.abs(a), initial=0.0) for a in arrs))


def supercurve_residuals(Phi: SuperField) -> dict:
    """Max-norms of the defining equations of a holomorphic supercurve."""
    phi = Phi.phi
    N = np.einsum("...pij,...i,...j->...p", phi.nijenhuis_tensor(), Phi.psi1, Phi.psi2)
    return {
        "nijenhuis": _maxnorm(N),
        "dbar_phi": _maxnorm(*dbar_J(phi)),
        "D_xi": _maxnorm(*D_phi(phi, Phi.xi)),
        "D_psi1": _maxnorm(*D_phi(phi, Phi.psi1)),
        "D_psi2": _maxnorm(*D_phi(phi, Phi.psi2)),
        "psi_10": _maxnorm(residual_10(phi, Phi.psi1), residual_10(phi, Phi.psi2)),
    }


def supercurve_residual_fields(Phi: SuperField) -> dict:
    """The residual fields themselves (s-components for one-forms)."""
    phi = Phi.phi
    return {
        "dbar_phi": dbar_J(phi)[0],
        "psi_10": np.concatenate([residual_10(phi, Phi.psi1), residual_10(phi, Phi.psi2)], -1),
        "nijenhuis": np.einsum("...pij,...i,...j->...p", phi.nijenhuis_tensor(), Phi.psi1, Phi.psi2),
        "D_psi": np.concatenate([D_phi(phi, Phi.psi1)[0], D_phi(phi, Phi.psi2)[0]], -1),
        "D_xi": D_phi(phi, Phi.xi)[0],
    }


def nijenhuis_contraction(phi: MapField, psi1, psi2) -> GrassmannElement:
    """psi^l psi^k d_l J^i_k with psi = eta1 psi1 + eta2 psi2, as a Grassmann vector."""
    psi = eta_pair(psi1, psi2)
    dJ = phi.dJ()
    inner = psi.map(lambda c: np.einsum("...k,...lik->...li", c, dJ))  # psi^k d_l J^i_k
    return gr_einsum("...l,...li->...i", psi, inner)


def holo_local_residual_fields(Phi: SuperField) -> dict:
    phi = Phi.phi
    J, dJ = phi.J(), phi.dJ()
    phi_t = phi.d("t")

    def first_order(v):
        vJ = np.einsum("...m,...mik->...ik", v, dJ)
        return phi.sheet.deriv(v, "s") + _mv(J, phi.sheet.deriv(v, "t")) + _mv(vJ, phi_t)

    contr = nijenhuis_contraction(phi, Phi.psi1, Phi.psi2)
    return {
        "dbar_phi": phi.d("s") + _mv(J, phi_t),
        "psi_10": np.concatenate([residual_10(phi, Phi.psi1), residual_10(phi, Phi.psi2)], -1),
        "nijenhuis": contr.extract([0, 1]),
        "D_psi": np.concatenate([first_order(Phi.psi1), first_order(Phi.psi2)], -1),
        "D_xi": first_order(Phi.xi),
    }


# factor c with local = c * definition, field by field
LOCAL_OVER_DEFINITION = {"dbar_phi": 2.0, "psi_10": 1.0, "nijenhuis": -0.5j,
                         "D_psi": 2.0, "D_xi": 2.0}


def holo_local_residuals(Phi: SuperField) -> dict:
    return {k: _maxnorm(v) for k, v in holo_local_residual_fields(Phi).items()}
