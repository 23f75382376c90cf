"""Chart-based almost-complex targets (X, omega, J, g_J).

All tensor fields are evaluated pointwise at arrays of chart points x with
shape (..., d).  Index layouts:

    J[..., i, k]          J^i_k
    omega[..., i, j]      omega_ij
    g[..., i, j]          g_ij = omega_ik J^k_j
    dJ[..., m, i, k]      d_m J^i_k
    dg[..., m, i, j]      d_m g_ij
    gamma[..., k, l, m]   Gamma^k_lm
    R[..., p, q, i, j]    R^p_qij, with R(d_i, d_j) d_q = R^p_qij d_p
    N[..., p, i, j]       N^p_ij
"""
from __future__ import annotations

import numpy as np


class InvalidTargetError(ValueError):
    pass


def standard_omega(dim: int):
    w = np.zeros((dim, dim))
    for a in range(0, dim, 2):
        w[a, a + 1], w[a + 1, a] = 1.0, -1.0
    return w


def standard_J(dim: int):
    j = np.zeros((dim, dim))
    for a in range(0, dim, 2):
        j[a + 1, a], j[a, a + 1] = 1.0, -1.0
    return j


def _fd4(fn, x, h, dim):
    """Fourth-order central differences of fn along each chart axis; axis m inserted after batch dims."""
    out = []
    for m in range(dim):
        e = np.zeros(dim)
        e[m] = h
        out.append((-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * h))
    return np.stack(out, axis=x.ndim - 1)


class TargetChart:
    """Base class.  Subclasses provide J and omega; everything else is derived.

    Derivatives default to 4th-order finite differences with step ``fd_step``;
    built-in targets override them with closed forms.
    """

    dim: int = 2
    fd_step: float = 1e-3
    periodic: bool = False        # coordinates live on R^d / Z^d
    omega_constant: bool = False

    # primitive fields --------------------------------------------------
    def J(self, x):
        raise NotImplementedError

    def omega(self, x):
        raise NotImplementedError

    # derived -----------------------------------------------------------
    def metric(self, x):
        return metric_from_omega_J(self.omega(x), self.J(x))

    def g(self, x):
        return self.metric(x)

    def dJ(self, x):
        return _fd4(self.J, np.asarray(x, float), self.fd_step, self.dim)

    def dg(self, x):
        return _fd4(self.g, np.asarray(x, float), self.fd_step, self.dim)

    def christoffel(self, x):
        return christoffel_from_metric(self.g(x), self.dg(x))

    def dchristoffel(self, x):
        """d_i Gamma^p_jq as [..., i, p, j, q]."""
        return _fd4(self.christoffel, np.asarray(x, float), self.fd_step, self.dim)

    def curvature(self, x):
        return curvature_from_christoffel(self.christoffel(x), self.dchristoffel(x))

    def nijenhuis_tensor(self, x):
        return nijenhuis_from_J(self.J(x), self.dJ(x))

    def nijenhuis(self, x, u, v):
        """N_J(u, v); complex u, v give the complex-bilinear extension."""
        return np.einsum("...pij,...i,...j->...p", self.nijenhuis_tensor(x), u, v)

    def nabla_J(self, x, v):
        """(nabla_v J)^i_k = v^m (d_m J^i_k + Gamma^i_ml J^l_k - J^i_l Gamma^l_mk)."""
        J, dJ, G = self.J(x), self.dJ(x), self.christoffel(x)
        t = dJ + np.einsum("...iml,...lk->...mik", G, J) - np.einsum("...il,...lmk->...mik", J, G)
        return np.einsum("...m,...mik->...ik", v, t)

    def topological_omega(self, slope_s, slope_t, P_s: float, P_t: float):
        """Exact value of the integral of phi*omega determined by the winding, or None."""
        slope_s, slope_t = np.asarray(slope_s), np.asarray(slope_t)
        if not np.any(slope_s) and not np.any(slope_t):
            return 0.0  # null-homotopic into a chart (or lifted periodic map): omega exact there
        if self.omega_constant:
            w = self.omega(np.zeros(self.dim))
            return float(slope_s @ w @ slope_t) * P_s * P_t
        return None

    def describe(self) -> dict:
        return {"kind": type(self).__name__, "dim": self.dim}


def metric_from_omega_J(omega, J, check: bool = True):
    g = np.einsum("...ik,...kj->...ij", omega, J)
    if check:
        sym = np.max(np.abs(g - np.swapaxes(g, -1, -2)), initial=0.0)
        scale = np.max(np.abs(g), initial=1.0)
        if sym > 1e-10 * scale:
            raise InvalidTargetError(f"omega(., J.) not symmetric (defect {sym:.2e})")
        if np.min(np.linalg.eigvalsh(0.5 * (g + np.swapaxes(g, -1, -2)))) <= 0:
            raise InvalidTargetError("omega(., J.) not positive definite")
    return g


def christoffel_from_metric(g, dg):
    """Levi-Civita symbols Gamma^k_lm = 1/2 g^ka (d_l g_ma + d_m g_la - d_a g_lm)."""
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise InvalidTargetError("singular metric") from exc
    # dg[..., m, i, j] = d_m g_ij
    t = (np.einsum("...lma->...lma", dg)            # d_l g_ma
         + np.einsum("...mla->...lma", dg)          # d_m g_la
         - np.einsum("...alm->...lma", dg))         # d_a g_lm
    return 0.5 * np.einsum("...ka,...lma->...klm", ginv, t)


def curvature_from_christoffel(G, dG):
    """R^p_qij = d_i G^p_jq - d_j G^p_iq + G^p_ia G^a_jq - G^p_ja G^a_iq."""
    r = np.einsum("...ipjq->...pqij", dG) - np.einsum("...jpiq->...pqij", dG)
    r = r + np.einsum("...pia,...ajq->...pqij", G, G) - np.einsum("...pja,...aiq->...pqij", G, G)
    return r


def nijenhuis_from_J(J, dJ):
    """N^p_ij = J^k_i d_k J^p_j - J^m_j d_m J^p_i + J^p_k d_j J^k_i - J^p_m d_i J^m_j."""
    return (np.einsum("...ki,...kpj->...pij", J, dJ)
            - np.einsum("...mj,...mpi->...pij", J, dJ)
            + np.einsum("...pk,...jki->...pij", J, dJ)
            - np.einsum("...pm,...imj->...pij", J, dJ))


def compatible_J_from_metric(omega, gprime):
    """omega-compatible J from a metric via polar decomposition.

    A is defined by omega(u, v) = g'(Au, v), i.e. A = -g'^{-1} omega, and
    J = A (-A^2)^{-1/2}.  Works pointwise on stacks of matrices.
    """
    omega, gprime = np.asarray(omega, float), np.asarray(gprime, float)
    w, V = np.linalg.eigh(gprime)
    if np.min(w) <= 0:
        raise InvalidTargetError("metric not positive definite")
    gh = np.einsum("...ij,...j,...kj->...ik", V, np.sqrt(w), V)
    gih = np.einsum("...ij,...j,...kj->...ik", V, 1 / np.sqrt(w), V)
    # At = g'^{1/2} A g'^{-1/2} = -g'^{-1/2} omega g'^{-1/2} is antisymmetric
    At = -gih @ omega @ gih
    mu, U = np.linalg.eigh(-At @ At)
    if np.min(mu) <= 1e-300:
        raise InvalidTargetError("degenerate A (omega not invertible)")
    Pinv = np.einsum("...ij,...j,...kj->...ik", U, 1 / np.sqrt(mu), U)
    return gih @ (At @ Pinv) @ gh


def polar_J_4d(omega, gprime):
    """Closed-form version of compatible_J_from_metric in dimension 4.

    With M = -A^2 having double eigenvalues a^2, b^2, one has
    M^{1/2} = (M + ab) / (a + b), ab = det(g')^{-1/2} (omega standard), and
    a + b = sqrt(tr M / 2 + 2 ab).  Only analytic operations are used, so the
    result accepts complex-perturbed input (complex-step differentiation).
    """
    ginv = np.linalg.inv(gprime)
    A = -ginv @ omega
    M = -A @ A
    ab = np.linalg.det(gprime) ** -0.5 * np.sqrt(np.linalg.det(omega))
    apb = np.sqrt(np.trace(M, axis1=-2, axis2=-1) / 2 + 2 * ab)
    eye = np.eye(4)
    return A @ np.linalg.inv(M + ab[..., None, None] * eye) * apb[..., None, None]


# ---------------------------------------------------------------------------
# built-in targets


class FlatTorus(TargetChart):
    """R^{2n}/Z^{2n} with the standard (omega, J, g)."""

    periodic = True
    omega_constant = True

    def __init__(self, dim: int = 2):
        if dim % 2 or dim < 2:
            raise InvalidTargetError("dimension must be even")
        self.dim = dim
        self._J = standard_J(dim)
        self._w = standard_omega(dim)

    def _const(self, x, a):
        x = np.asarray(x)
        return np.broadcast_to(a, x.shape[:-1] + a.shape)

    def J(self, x):
        return self._const(x, self._J)

    def omega(self, x):
        return self._const(x, self._w)

    def g(self, x):
        return self._const(x, np.eye(self.dim))

    metric = g

    def dJ(self, x):
        return self._const(x, np.zeros((self.dim,) * 3))

    def dg(self, x):
        return self.dJ(x)

    def christoffel(self, x):
        return self.dJ(x)

    def dchristoffel(self, x):
        return self._const(x, np.zeros((self.dim,) * 4))

    def curvature(self, x):
        return self.dchristoffel(x)

    def nijenhuis_tensor(self, x):
        return self.dJ(x)


class RoundSphereChart(TargetChart):
    """Unit round sphere in stereographic coordinates: g = c(x) I, c = 4/(1+|x|^2)^2."""

    dim = 2

    def _c(self, x):
        x = np.asarray(x)
        return 4.0 / (1 + np.sum(x * x, axis=-1)) ** 2

    def J(self, x):
        x = np.asarray(x)
        return np.broadcast_to(standard_J(2), x.shape[:-1] + (2, 2))

    def omega(self, x):
        return self._c(x)[..., None, None] * standard_omega(2)

    def g(self, x):
        return self._c(x)[..., None, None] * np.eye(2)

    metric = g

    def dJ(self, x):
        x = np.asarray(x)
        return np.zeros(x.shape[:-1] + (2, 2, 2))

    def dg(self, x):
        x = np.asarray(x)
        dc = -16 * x / (1 + np.sum(x * x, axis=-1))[..., None] ** 3
        return dc[..., :, None, None] * np.eye(2)

    def christoffel(self, x):
        x = np.asarray(x)
        d = np.eye(2)
        # T[k,i,j] = delta_ik x_j + delta_jk x_i - delta_ij x_k
        T = (np.einsum("ik,...j->...kij", d, x) + np.einsum("jk,...i->...kij", d, x)
             - np.einsum("ij,...k->...kij", d, x))
        return -2 * T / (1 + np.sum(x * x, axis=-1))[..., None, None, None]

    def curvature(self, x):
        # constant curvature +1: R^p_qij = delta^p_i g_jq - delta^p_j g_iq
        g = self.g(x)
        d = np.eye(2)
        return np.einsum("pi,...jq->...pqij", d, g) - np.einsum("pj,...iq->...pqij", d, g)

    def nijenhuis_tensor(self, x):
        x = np.asarray(x)
        return np.zeros(x.shape[:-1] + (2, 2, 2))


class PerturbedR4(TargetChart):
    """R^4 (periodic, i.e. T^4) with standard omega and J from a perturbed metric.

    g'(x) = I + eps_j * S(x), S symmetric with trigonometric entries of
    period 1.  J is the polar-decomposition J of (omega, g').  The compatible
    metric is g_J = omega(., J.) = g' (-A^2)^{1/2}.  First derivatives of J use
    complex-step differentiation of the closed-form polar map; second
    derivatives (needed for curvature) use central differences of those.
    """

    dim = 4
    periodic = True
    omega_constant = True
    cs_step = 1e-30

    def __init__(self, eps_j: float = 0.1, seed: int = 20240611):
        if not 0 <= eps_j < 0.2:
            raise InvalidTargetError("eps_j must lie in [0, 0.2) to keep g' positive definite")
        self.eps_j = eps_j
        rng = np.random.default_rng(seed)
        # S_ij = sum over two modes of a * cos(2 pi k.x + c), symmetrized
        self._k = rng.integers(-1, 2, size=(2, 4, 4, 4))
        self._k[:, :, :, 0] = np.where(np.all(self._k == 0, axis=-1), 1, self._k[:, :, :, 0])
        self._a = rng.uniform(-0.25, 0.25, size=(2, 4, 4))
        self._c = rng.uniform(0, 2 * np.pi, size=(2, 4, 4))
        self._w = standard_omega(4)

    def gprime(self, x):
        x = np.asarray(x)
        ph = 2 * np.pi * np.einsum("rijm,...m->...rij", self._k, x) + self._c
        B = np.sum(self._a * np.cos(ph), axis=-3)
        S = B + np.swapaxes(B, -1, -2)
        return np.eye(4) + self.eps_j * S

    def J(self, x):
        x = np.asarray(x)
        J = polar_J_4d(self._w, self.gprime(x))
        return J.real if np.isrealobj(x) else J

    def omega(self, x):
        x = np.asarray(x)
        return np.broadcast_to(self._w, x.shape[:-1] + (4, 4))

    def dJ(self, x):
        x = np.asarray(x, float)
        h = self.cs_step
        out = [self.J(x + 1j * h * e).imag / h for e in np.eye(4)]
        return np.stack(out, axis=x.ndim - 1)

    def dg(self, x):
        return np.einsum("ik,...mkj->...mij", self._w, self.dJ(x))

    def ddJ(self, x):
        """d_a d_m J^i_k as [..., a, m, i, k]."""
        return _fd4(self.dJ, np.asarray(x, float), self.fd_step, 4)

    def dchristoffel(self, x):
        return _fd4(self.christoffel, np.asarray(x, float), self.fd_step, 4)


def make_target(spec: dict) -> TargetChart:
    kind = spec.get("kind", "flat_torus")
    if kind == "flat_torus":
        return FlatTorus(int(spec.get("dim", 2)))
    if kind == "sphere":
        return RoundSphereChart()
    if kind == "perturbed_r4":
        return PerturbedR4(float(spec.get("eps_j", 0.1)))
    raise InvalidTargetError(f"unknown target kind {kind!r}")
