"""Verification checks, example construction, random fields and convergence studies.

Every check returns a report dict with the keys check, lhs, rhs_terms,
defect, tolerance, pass, grid, scheme (plus check-specific extras).
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import action as act
from . import fields as fl
from .config import ConfigError, RunConfig
from .fields import MapField, SuperField
from .target import FlatTorus, TargetChart
from .worldsheet import Worldsheet


class UnsupportedConfiguration(ValueError):
    pass


# ---------------------------------------------------------------------------
# random smooth fields

def random_periodic(sheet: Worldsheet, d: int, rng: np.random.Generator, complex_: bool = False,
                    amp: float = 0.1, kmax: int = 2):
    """Band-limited trigonometric polynomial, frequencies |k| <= kmax (<= n/4).

    The coefficients depend only on rng and kmax, so the same continuous field
    is sampled on every grid size.
    """
    g = sheet.grid
    kmax = min(kmax, g.n_s // 4, g.n_t // 4)
    s, t = g.coords()
    out = np.zeros((g.n_s, g.n_t, d), complex)
    for kx in range(-kmax, kmax + 1):
        for ky in range(-kmax, kmax + 1):
            c = rng.normal(size=d) + 1j * rng.normal(size=d)
            wave = np.exp(2j * np.pi * (kx * s / g.P_s + ky * t / g.P_t))
            out += math.exp(-(kx * kx + ky * ky) / 2) * c * wave[..., None]
    if not complex_:
        out = out.real
    return amp * out


def random_map(sheet: Worldsheet, target: TargetChart, rng, amp: float = 0.15, kmax: int = 2,
               winding: bool = True) -> MapField:
    d = target.dim
    per = random_periodic(sheet, d, rng, amp=amp, kmax=kmax)
    if target.periodic:
        base = rng.uniform(0, 1, size=d)
        ws = rng.integers(-1, 2, size=d) / sheet.grid.P_s if winding else np.zeros(d)
        wt = rng.integers(-1, 2, size=d) / sheet.grid.P_t if winding else np.zeros(d)
        return MapField(sheet, target, per + base, ws, wt)
    # single chart: keep |x| <= 3
    base = rng.uniform(-1, 1, size=d)
    phi = per + base
    r = np.max(np.linalg.norm(phi, axis=-1))
    if r > 2.5:
        phi = phi * (2.5 / r)
    return MapField(sheet, target, phi)


def random_superfield(sheet, target, rng, amp: float = 0.15, kmax: int = 2,
                      project: bool = False, constant_phi: bool = False) -> SuperField:
    if constant_phi:
        phi = MapField(sheet, target, np.broadcast_to(
            rng.uniform(-1, 1, size=target.dim), (sheet.grid.n_s, sheet.grid.n_t, target.dim)).copy())
    else:
        phi = random_map(sheet, target, rng, amp=amp, kmax=kmax)
    d = target.dim
    psi1 = random_periodic(sheet, d, rng, True, amp=1.0, kmax=kmax)
    psi2 = random_periodic(sheet, d, rng, True, amp=1.0, kmax=kmax)
    xi = random_periodic(sheet, d, rng, True, amp=1.0, kmax=kmax)
    if project:
        psi1, psi2 = fl.project_10(phi, psi1), fl.project_10(phi, psi2)
    return SuperField(phi, psi1, psi2, xi)


def random_variation(sheet, target, rng, amp: float = 0.1, kmax: int = 2) -> SuperField:
    d = target.dim
    zeta = random_periodic(sheet, d, rng, amp=amp, kmax=kmax)
    return SuperField(MapField(sheet, target, zeta),
                      random_periodic(sheet, d, rng, True, amp=1.0, kmax=kmax),
                      random_periodic(sheet, d, rng, True, amp=1.0, kmax=kmax),
                      random_periodic(sheet, d, rng, True, amp=1.0, kmax=kmax))


# ---------------------------------------------------------------------------
# hand-checkable maps and the construction

def linear_map(sheet, target, slope_s, slope_t) -> MapField:
    return MapField(sheet, target, None, slope_s, slope_t)


def identity_map(sheet, target) -> MapField:
    d = target.dim
    return linear_map(sheet, target, np.eye(d)[0], np.eye(d)[1])


def conjugate_map(sheet, target) -> MapField:
    d = target.dim
    return linear_map(sheet, target, np.eye(d)[0], -np.eye(d)[1])


def _complex_list(vals, n: int, what: str):
    out = np.zeros(n, complex)
    for k, v in enumerate(vals[:n]):
        if len(v) != 2:
            raise ConfigError(f"{what}: expected [re, im] pairs")
        out[k] = complex(v[0], v[1])
    return out


def construct_supercurve(cfg: RunConfig, sheet: Optional[Worldsheet] = None):
    """Linear holomorphic phi = a z, psi_j = zeta_j dphi[d_z], constant xi (flat torus only).

    Returns (SuperField, info dict).  Missing winding/xi entries are zero.
    """
    if cfg.target.kind != "flat_torus":
        raise UnsupportedConfiguration(
            f"construction needs a flat_torus target, got {cfg.target.kind!r}")
    target = cfg.make_target()
    sheet = sheet or cfg.make_sheet()
    n = target.dim // 2
    a = _complex_list(cfg.construction.winding, n, "winding")
    slope_s = np.zeros(target.dim)
    slope_t = np.zeros(target.dim)
    slope_s[0::2], slope_s[1::2] = a.real, a.imag      # d_s (a z) = a
    slope_t[0::2], slope_t[1::2] = -a.imag, a.real     # d_t (a z) = i a
    g = sheet.grid
    for sl, P in ((slope_s, g.P_s), (slope_t, g.P_t)):
        w = sl * P
        if np.max(np.abs(w - np.round(w))) > 1e-12:
            raise ConfigError(f"winding {list(w)} is not integral for the torus periods")
    phi = MapField(sheet, target, np.zeros((g.n_s, g.n_t, target.dim)), slope_s, slope_t)
    zetas = _complex_list(cfg.construction.zetas, 2, "zetas") * cfg.construction.psi_scale
    xi_c = _complex_list(cfg.construction.xi, target.dim, "xi")
    shape = (g.n_s, g.n_t, target.dim)
    Phi = SuperField(phi, fl.induced_psi(phi, np.full(shape[:2], zetas[0])),
                     fl.induced_psi(phi, np.full(shape[:2], zetas[1])),
                     np.broadcast_to(xi_c, shape).copy())
    info = {"degenerate": bool(not np.any(a)), "winding": [[z.real, z.imag] for z in a]}
    if info["degenerate"]:
        info["warning"] = "zero winding: constant map, psi vanish identically"
    return Phi, info


# ---------------------------------------------------------------------------
# checks

def _summary(name, reports, tolerance, sheet, **extra):
    worst = max(reports, key=lambda r: r["defect"])
    grid = sheet.grid
    out = {"check": name, "lhs": worst["lhs"], "rhs_terms": worst["rhs_terms"],
           "defect": worst["defect"], "tolerance": tolerance,
           "pass": all(r["pass"] for r in reports), "grid": [grid.n_s, grid.n_t],
           "scheme": grid.scheme, "cases": reports}
    out.update(extra)
    return out


def check_classical_identity(cfg: RunConfig, n_random: Optional[int] = None) -> dict:
    tol = cfg.tolerance("classical_identity")
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    reps = []
    if isinstance(target, FlatTorus) and cfg.grid.P_s == 1 and cfg.grid.P_t == 1:
        for label, phi in (("identity", identity_map(sheet, target)),
                           ("conjugate", conjugate_map(sheet, target))):
            r = act.verify_classical_identity(phi, tol)
            r["case"] = label
            reps.append(r)
    for k in range(n_random or cfg.n_random):
        r = act.verify_classical_identity(random_map(sheet, target, rng), tol)
        r["case"] = f"random{k}"
        reps.append(r)
    return _summary("classical_identity", reps, tol, sheet)


def check_lagrangian_a1(cfg: RunConfig, n_random: Optional[int] = None) -> dict:
    tol = cfg.tolerance("lagrangian_a1")
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    reps = []
    for k in range(n_random or cfg.n_random):
        r = act.verify_lagrangian_a1(random_superfield(sheet, target, rng), tol)
        r["case"] = f"random{k}"
        reps.append(r)
    return _summary("lagrangian_a1", reps, tol, sheet)


def check_super_identity(cfg: RunConfig, n_random: Optional[int] = None) -> dict:
    tol = cfg.tolerance("super_identity")
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    reps = []
    if cfg.target.kind == "flat_torus":
        Phi, _ = construct_supercurve(cfg, sheet)
        r = act.verify_super_identity(Phi, tol)
        r["case"] = "constructed"
        ld, _ = act.lagrangian_decompose(Phi)
        r["L_dbar_abs"] = ld.abs_max()
        reps.append(r)
    for k in range(n_random or cfg.n_random):
        r = act.verify_super_identity(random_superfield(sheet, target, rng), tol)
        r["case"] = f"random{k}"
        reps.append(r)
    return _summary("super_identity", reps, tol, sheet)


def check_construction(cfg: RunConfig) -> dict:
    tol = cfg.tolerances.get("construction", 1e-10)
    Phi, info = construct_supercurve(cfg)
    res = fl.supercurve_residuals(Phi)
    el = act.el_residuals(Phi)
    worst = max(max(res.values()), max(el.values()))
    grid = Phi.sheet.grid
    return {"check": "construction", "lhs": worst, "rhs_terms": [], "defect": worst,
            "tolerance": tol, "pass": bool(worst <= tol), "grid": [grid.n_s, grid.n_t],
            "scheme": grid.scheme, "residuals": res, "el_residuals": el, **info}


def check_el_extremality(cfg: RunConfig, n_var: int = 10, eps: float = 1e-3) -> dict:
    """|dA1/deps| at the constructed supercurve, and EL pairing on random fields."""
    tol = cfg.tolerances.get("el_extremality", 1e-6)
    Phi, _ = construct_supercurve(cfg)
    sheet, target = Phi.sheet, Phi.target
    rng = np.random.default_rng(cfg.seed)
    derivs = []
    for _ in range(n_var):
        V = random_variation(sheet, target, rng)
        val, _info = act.directional_derivative("A1", Phi, V, eps)
        derivs.append(val.abs_max())
    worst = max(derivs)
    # generic fields: FD derivative against the residual pairing
    pair_defects = []
    for _ in range(2):
        P = random_superfield(sheet, target, rng)
        V = random_variation(sheet, target, rng)
        val, _info = act.directional_derivative("A1", P, V, 1e-4)
        pred = act.el_pairing(P, V)
        pair_defects.append((val - pred).abs_max() / max(val.abs_max(), pred.abs_max(), 1e-300))
    grid = sheet.grid
    ok = worst <= tol and max(pair_defects) <= 1e-6
    return {"check": "el_extremality", "lhs": worst, "rhs_terms": [0.0], "defect": worst,
            "tolerance": tol, "pass": bool(ok), "grid": [grid.n_s, grid.n_t],
            "scheme": grid.scheme, "eps": eps, "derivatives": derivs,
            "pairing_relative_defects": pair_defects}


def equivalence_report(Phi: SuperField, tol: float) -> dict:
    """Zero-set agreement and field-by-field proportionality of the two residual sets."""
    dfn = fl.supercurve_residual_fields(Phi)
    loc = fl.holo_local_residual_fields(Phi)
    per = {}
    ok = True
    for k, c in fl.LOCAL_OVER_DEFINITION.items():
        a, b = dfn[k], loc[k]
        na, nb = float(np.max(np.abs(a), initial=0)), float(np.max(np.abs(b), initial=0))
        scale = max(abs(c) * na, nb)
        prop = 0.0 if scale == 0 else float(np.max(np.abs(b - c * a), initial=0)) / scale
        zero_a, zero_b = na <= tol, nb <= tol * max(1, abs(c))
        same = zero_a == zero_b
        ok = ok and same and prop <= tol
        per[k] = {"definition": na, "local": nb, "factor": str(c), "proportionality_defect": prop,
                  "zero_definition": zero_a, "zero_local": zero_b}
    return {"fields": per, "pass": ok,
            "defect": max(v["proportionality_defect"] for v in per.values())}


def check_equivalence(cfg: RunConfig, n_random: Optional[int] = None) -> dict:
    """Constructed examples (flat) and random off-shell fields.

    Off-shell proportionality is exact only where the connection terms drop
    out, so curved targets use constant phi with random psi, xi.
    """
    tol = cfg.tolerance("equivalence")
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    cases = []
    if cfg.target.kind == "flat_torus":
        Phi, _ = construct_supercurve(cfg, sheet)
        r = equivalence_report(Phi, tol)
        r["case"] = "constructed"
        cases.append(r)
    for k in range(n_random or cfg.n_random):
        P = random_superfield(sheet, target, rng, project=True, constant_phi=cfg.curved)
        r = equivalence_report(P, tol)
        r["case"] = f"random{k}"
        cases.append(r)
    worst = max(c["defect"] for c in cases)
    grid = sheet.grid
    return {"check": "equivalence", "lhs": worst, "rhs_terms": [], "defect": worst,
            "tolerance": tol, "pass": all(c["pass"] for c in cases),
            "grid": [grid.n_s, grid.n_t], "scheme": grid.scheme, "cases": cases}


def check_nijenhuis_contraction(cfg: RunConfig, n_random: Optional[int] = None) -> dict:
    tol = cfg.tolerances.get("nijenhuis_contraction", 1e-8)
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    defects, sizes = [], []
    for _ in range(n_random or cfg.n_random):
        P = random_superfield(sheet, target, rng, project=True)
        lhs = fl.nijenhuis_contraction(P.phi, P.psi1, P.psi2).extract([0, 1])
        N = np.einsum("...pij,...i,...j->...p", P.phi.nijenhuis_tensor(), P.psi1, P.psi2)
        rhs = -0.5j * N
        scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
        defects.append(0.0 if scale == 0 else float(np.max(np.abs(lhs - rhs))) / scale)
        sizes.append(scale)
    grid = sheet.grid
    worst = max(defects)
    return {"check": "nijenhuis_contraction", "lhs": max(sizes), "rhs_terms": [max(sizes)],
            "defect": worst, "tolerance": tol, "pass": bool(worst <= tol),
            "grid": [grid.n_s, grid.n_t], "scheme": grid.scheme, "defects": defects}


def check_operator_equivalence(cfg: RunConfig, n_random: Optional[int] = None) -> dict:
    tol = cfg.tolerances.get("operator_equivalence", 1e-8)
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    defects = []
    for _ in range(n_random or cfg.n_random):
        P = random_superfield(sheet, target, rng)
        a, b = fl.D_phi(P.phi, P.xi), fl.D_phi_alt(P.phi, P.xi)
        scale = max(float(np.max(np.abs(x))) for x in (*a, *b))
        d = max(float(np.max(np.abs(a[i] - b[i]))) for i in (0, 1))
        defects.append(0.0 if scale == 0 else d / scale)
    grid = sheet.grid
    worst = max(defects)
    return {"check": "operator_equivalence", "lhs": worst, "rhs_terms": [], "defect": worst,
            "tolerance": tol, "pass": bool(worst <= tol), "grid": [grid.n_s, grid.n_t],
            "scheme": grid.scheme, "defects": defects}


def check_a1_a2_comparison(cfg: RunConfig) -> dict:
    """Spinor EL equations of A1 and A2 with the configured lambda."""
    tol = cfg.tolerance("a1_a2_comparison")
    sheet, target = cfg.make_sheet(), cfg.make_target()
    rng = np.random.default_rng(cfg.seed)
    phi = random_map(sheet, target, rng)
    psi1 = fl.project_10(phi, random_periodic(sheet, target.dim, rng, True, amp=1.0))
    z = np.zeros_like(psi1)
    r = act.compare_A1_A2(SuperField(phi, psi1, z, z.copy()), tol)
    return r


CHECKS: Dict[str, Callable[[RunConfig], dict]] = {
    "classical_identity": check_classical_identity,
    "lagrangian_a1": check_lagrangian_a1,
    "super_identity": check_super_identity,
    "construction": check_construction,
    "el_extremality": check_el_extremality,
    "equivalence": check_equivalence,
    "nijenhuis_contraction": check_nijenhuis_contraction,
    "operator_equivalence": check_operator_equivalence,
    "a1_a2_comparison": check_a1_a2_comparison,
}
FLAT_ONLY = ("construction", "el_extremality")


def default_checks(cfg: RunConfig) -> List[str]:
    return [c for c in CHECKS if not (cfg.curved and c in FLAT_ONLY)]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SUPERCURVE_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(cfg: RunConfig, checks: Optional[Sequence[str]] = None) -> dict:
    names = list(checks) if checks else default_checks(cfg)
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check(s): {unknown}; available: {sorted(CHECKS)}")
    if cfg.curved:
        bad = [c for c in names if c in FLAT_ONLY]
        if bad:
            raise UnsupportedConfiguration(f"{bad} need a flat_torus target")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        futures = [pool.submit(CHECKS[n], cfg) for n in names]
        reports = [f.result() for f in futures]   # merged in request order
    n_pass = sum(r["pass"] for r in reports)
    return {"reports": reports,
            "summary": {"total": len(reports), "passed": n_pass, "failed": len(reports) - n_pass},
            "pass": n_pass == len(reports),
            "environment": {"grid": [cfg.grid.n_s, cfg.grid.n_t], "scheme": cfg.grid.scheme,
                            "seed": cfg.seed, "target": cfg.target.kind}}


# ---------------------------------------------------------------------------
# convergence

def convergence_field(cfg: RunConfig, sheet: Worldsheet, target: TargetChart, check: str,
                      amp: float = 0.06):
    """Same continuous field on every grid (fixed seed and frequency band)."""
    rng = np.random.default_rng(cfg.seed)
    if check == "classical_identity":
        return random_map(sheet, target, rng, amp=amp, kmax=2)
    return random_superfield(sheet, target, rng, amp=amp, kmax=2)


CONVERGENCE_CHECKS = ("classical_identity", "lagrangian_a1", "super_identity")


def convergence_study(cfg: RunConfig, check: str, grids: Sequence[int],
                      scheme: Optional[str] = None, floor: float = 1e-12) -> dict:
    if check not in CONVERGENCE_CHECKS:
        raise ConfigError(f"convergence supports {CONVERGENCE_CHECKS}, got {check!r}")
    if len(grids) < 3:
        raise ConfigError("convergence needs at least three grid sizes")
    scheme = scheme or cfg.grid.scheme
    target = cfg.make_target()
    rows = []
    for n in sorted(grids):
        sheet = cfg.make_sheet(n, scheme)
        f = convergence_field(cfg, sheet, target, check)
        if check == "classical_identity":
            r = act.verify_classical_identity(f)
        elif check == "lagrangian_a1":
            r = act.verify_lagrangian_a1(f)
        else:
            r = act.verify_super_identity(f)
        rows.append({"n": n, "h": sheet.grid.h_s, "defect": r["defect"]})
    d = np.array([r["defect"] for r in rows])
    h = np.array([r["h"] for r in rows])
    out = {"check": check, "scheme": scheme, "rows": rows, "flagged": False, "floor": floor}
    above = d >= floor
    if np.all(d == 0):
        out["order"] = "exact"
    elif np.sum(above) < 2:
        out["order"] = "floor"
    else:
        out["order"] = float(np.polyfit(np.log(h[above]), np.log(d[above]), 1)[0])
    # refinement must decrease the defect until it reaches the roundoff floor and stay there
    first_below = int(np.argmax(~above)) if np.any(~above) else len(d)
    if np.any(np.diff(d[:first_below]) >= 0) or np.any(above[first_below:]):
        out["flagged"] = True
        out["reason"] = "non-monotone defects under refinement"
    return out
