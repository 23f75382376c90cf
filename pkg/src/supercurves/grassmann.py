"""Finite complex Grassmann algebras with 2 or 4 generators.

Elements are stored densely: one coefficient slot per generator subset
(bitmask, bit k <-> generator k).  Coefficients may carry trailing array
dimensions, so a single element can stand for a whole grid of Grassmann
numbers or for a vector with Grassmann entries.

Canonical generator order for N=4 is theta+ < theta- < eta1 < eta2; for N=2
it is eta1 < eta2.  Every sign comes from sorting a product into this order.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

THETA_P, THETA_M, ETA1, ETA2 = 0, 1, 2, 3  # generator indices for N=4
ETA1_2, ETA2_2 = 0, 1                      # generator indices for N=2

EVEN, ODD, MIXED = "even", "odd", "mixed"


class GrassmannDomainError(ValueError):
    pass


def _popcount(m: int) -> int:
    return bin(m).count("1")


@lru_cache(maxsize=None)
def _mul_table(n: int):
    """Nonzero (I, J, I|J, sign) products for n generators."""
    rows = []
    for a in range(1 << n):
        for b in range(1 << n):
            if a & b:
                continue
            # each generator j of b must pass every generator i > j of a
            swaps = 0
            for j in range(n):
                if b >> j & 1:
                    swaps += _popcount(a >> (j + 1))
            rows.append((a, b, a | b, -1.0 if swaps & 1 else 1.0))
    return tuple(rows)


def mask(gens: Iterable[int]) -> int:
    m = 0
    for g in gens:
        if m >> g & 1:
            return -1  # repeated generator, monomial vanishes
        m |= 1 << g
    return m


def _sort_sign(gens: Sequence[int]) -> int:
    """Sign of the permutation sorting gens (assumed distinct)."""
    g = list(gens)
    inv = sum(1 for i in range(len(g)) for j in range(i + 1, len(g)) if g[i] > g[j])
    return -1 if inv & 1 else 1


class GrassmannElement:
    """Element of the Grassmann algebra on n_gens generators.

    coeffs has shape (2**n_gens, *shape); coeffs[m] multiplies the monomial
    whose generators are the set bits of m, written in ascending order.
    """

    __array_priority__ = 1000

    def __init__(self, coeffs, n_gens: int):
        if n_gens not in (2, 4):
            raise GrassmannDomainError(f"only 2 or 4 generators supported, got {n_gens}")
        c = np.asarray(coeffs, dtype=complex)
        if c.shape[0] != 1 << n_gens:
            raise GrassmannDomainError(
                f"coefficient array leading dim {c.shape[0]} != 2**{n_gens}")
        self.coeffs = c
        self.n_gens = n_gens

    # construction ------------------------------------------------------
    @classmethod
    def zeros(cls, n_gens: int, shape=()):
        return cls(np.zeros((1 << n_gens,) + tuple(shape), complex), n_gens)

    @classmethod
    def scalar(cls, value, n_gens: int):
        v = np.asarray(value, dtype=complex)
        c = np.zeros((1 << n_gens,) + v.shape, complex)
        c[0] = v
        return cls(c, n_gens)

    @classmethod
    def monomial(cls, gens: Sequence[int], value, n_gens: int):
        """value * g_{gens[0]} g_{gens[1]} ... in the given (possibly unsorted) order."""
        v = np.asarray(value, dtype=complex)
        c = np.zeros((1 << n_gens,) + v.shape, complex)
        if any(g < 0 or g >= n_gens for g in gens):
            raise GrassmannDomainError(f"generator index out of range in {gens}")
        m = mask(gens)
        if m >= 0:
            c[m] = _sort_sign(gens) * v
        return cls(c, n_gens)

    @classmethod
    def generator(cls, k: int, n_gens: int):
        return cls.monomial([k], 1.0, n_gens)

    # basic protocol ----------------------------------------------------
    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def copy(self):
        return GrassmannElement(self.coeffs.copy(), self.n_gens)

    def _check(self, other):
        if not isinstance(other, GrassmannElement):
            return GrassmannElement.scalar(other, self.n_gens)
        if other.n_gens != self.n_gens:
            raise GrassmannDomainError(
                f"mismatched generator sets: {self.n_gens} vs {other.n_gens}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return GrassmannElement(self.coeffs + other.coeffs, self.n_gens)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(-self.coeffs, self.n_gens)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return gr_mul(self, other)
        # ordinary (even, commuting) scalar or array factor
        return GrassmannElement(self.coeffs * np.asarray(other), self.n_gens)

    def __rmul__(self, other):
        if isinstance(other, GrassmannElement):
            return gr_mul(other, self)
        return GrassmannElement(np.asarray(other) * self.coeffs, self.n_gens)

    def __getitem__(self, idx):
        """Index the trailing array dimensions."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return GrassmannElement(self.coeffs[(slice(None),) + idx], self.n_gens)

    def __repr__(self):
        terms = []
        for m in range(1 << self.n_gens):
            if np.any(self.coeffs[m] != 0):
                gens = [k for k in range(self.n_gens) if m >> k & 1]
                terms.append(f"{gens}:{self.coeffs[m] if self.coeffs[m].ndim == 0 else '...'}")
        return f"GrassmannElement(n={self.n_gens}, {', '.join(terms) or '0'})"

    # algebra -----------------------------------------------------------
    def extract(self, subset: Iterable[int]):
        return gr_extract(self, subset)

    @property
    def body(self):
        return self.coeffs[0]

    def parity(self, tol: float = 0.0) -> str:
        even = odd = False
        for m in range(1 << self.n_gens):
            if np.any(np.abs(self.coeffs[m]) > tol):
                if _popcount(m) & 1:
                    odd = True
                else:
                    even = True
        if odd and even:
            return MIXED
        return ODD if odd else EVEN

    def deriv(self, k: int):
        """Left derivative with respect to generator k."""
        if not 0 <= k < self.n_gens:
            raise GrassmannDomainError(f"generator {k} out of range")
        out = np.zeros_like(self.coeffs)
        for m in range(1 << self.n_gens):
            if m >> k & 1:
                sign = -1.0 if _popcount(m & ((1 << k) - 1)) & 1 else 1.0
                out[m & ~(1 << k)] += sign * self.coeffs[m]
        return GrassmannElement(out, self.n_gens)

    def map(self, fn):
        """Apply a linear map coefficient-wise (fn acts on each coefficient array)."""
        return GrassmannElement(np.stack([fn(c) for c in self.coeffs]), self.n_gens)

    def allclose(self, other, rtol=1e-14, atol=0.0) -> bool:
        other = self._check(other)
        a, b = self.coeffs, other.coeffs
        scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), 1e-300)
        return bool(np.max(np.abs(a - b), initial=0.0) <= rtol * scale + atol)

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        if self.shape != ():
            raise GrassmannDomainError("only scalar-coefficient elements serialize")
        mons = []
        for m in range(1 << self.n_gens):
            c = complex(self.coeffs[m])
            if c != 0:
                mons.append({"gens": [k for k in range(self.n_gens) if m >> k & 1],
                             "re": c.real, "im": c.imag})
        return {"n_gens": self.n_gens, "monomials": mons}

    @classmethod
    def from_json(cls, data: dict, n_gens: int | None = None):
        n = data.get("n_gens", n_gens)
        if n is None:
            raise GrassmannDomainError("n_gens missing")
        out = cls.zeros(n)
        for mon in data["monomials"]:
            out = out + cls.monomial(mon["gens"], complex(mon["re"], mon["im"]), n)
        return out


def gr_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    if a.n_gens != b.n_gens:
        raise GrassmannDomainError(f"mismatched generator sets: {a.n_gens} vs {b.n_gens}")
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros((1 << a.n_gens,) + shape, complex)
    ca, cb = a.coeffs, b.coeffs
    for i, j, k, s in _mul_table(a.n_gens):
        out[k] += s * (ca[i] * cb[j])
    return GrassmannElement(out, a.n_gens)


def gr_einsum(subscripts: str, x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    """Grassmann product x*y with the trailing axes contracted by np.einsum."""
    if x.n_gens != y.n_gens:
        raise GrassmannDomainError("mismatched generator sets")
    shape = np.einsum(subscripts, x.coeffs[0], y.coeffs[0]).shape
    out = np.zeros((1 << x.n_gens,) + shape, complex)
    for i, j, k, s in _mul_table(x.n_gens):
        if np.any(x.coeffs[i]) and np.any(y.coeffs[j]):
            out[k] += s * np.einsum(subscripts, x.coeffs[i], y.coeffs[j])
    return GrassmannElement(out, x.n_gens)


def gr_extract(a: GrassmannElement, subset: Iterable[int]):
    m = mask(subset)
    if m < 0 or m >= 1 << a.n_gens:
        raise GrassmannDomainError(f"invalid generator subset {list(subset)}")
    c = a.coeffs[m]
    return complex(c) if c.ndim == 0 else c


def gr_bilinear_extend(B, x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    """Extend a complex-bilinear form B to Grassmann-valued vectors.

    x, y carry the vector index as their last trailing axis.  B is either a
    matrix broadcastable against (..., d, d) or a callable B(v, w) acting on
    the last axis.  B(eta^I v, eta^J w) = eta^I eta^J B(v, w).
    """
    if x.n_gens != y.n_gens:
        raise GrassmannDomainError("mismatched generator sets")
    if callable(B):
        form = B
    else:
        Bm = np.asarray(B)
        def form(v, w):
            return np.einsum("...i,...ij,...j->...", v, Bm, w)
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    out = np.zeros((1 << x.n_gens,) + shape, complex)
    for i, j, k, s in _mul_table(x.n_gens):
        if np.any(x.coeffs[i]) and np.any(y.coeffs[j]):
            out[k] += s * form(x.coeffs[i], y.coeffs[j])
    return GrassmannElement(out, x.n_gens)


def gr_integral(f: GrassmannElement, sheet, measure: str = "dsdt") -> GrassmannElement:
    """Coefficient-wise integral of a grid of Grassmann numbers.

    The first two trailing axes of f are the worldsheet grid axes; scalar
    integration is delegated to ``sheet.integrate``.
    """
    return GrassmannElement(
        np.stack([np.asarray(sheet.integrate(c, measure)) for c in f.coeffs]),
        f.n_gens)


def eta_pair(psi1, psi2, n_gens: int = 2) -> GrassmannElement:
    """eta1*psi1 + eta2*psi2 as an odd Grassmann element with array coefficients."""
    e1, e2 = (ETA1_2, ETA2_2) if n_gens == 2 else (ETA1, ETA2)
    return (GrassmannElement.monomial([e1], psi1, n_gens)
            + GrassmannElement.monomial([e2], psi2, n_gens))
