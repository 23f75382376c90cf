"""Field files: little-endian float64, s-major, one file per real component, JSON sidecar."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import MapField, SuperField
from .worldsheet import TorusGrid

ROLES = ("phi", "psi1", "psi2", "xi")


class FieldIOError(IOError):
    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = str(path)


def write_field(directory, name: str, arr, grid: TorusGrid, winding=None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arr = np.asarray(arr)
    is_complex = np.iscomplexobj(arr)
    comps = []
    for k in range(arr.shape[-1]):
        parts = [("re", arr[..., k].real), ("im", arr[..., k].imag)] if is_complex \
            else [("", arr[..., k])]
        for tag, data in parts:
            cname = f"{name}.{tag}{k}.f64" if tag else f"{name}.{k}.f64"
            np.ascontiguousarray(data, dtype="<f8").tofile(directory / cname)
            comps.append(cname)
    side = {"n_s": grid.n_s, "n_t": grid.n_t, "P_s": grid.P_s, "P_t": grid.P_t,
            "components": comps, "layout": "s-major", "complex": bool(is_complex)}
    if winding is not None:
        side["winding"] = {"slope_s": list(map(float, winding[0])),
                           "slope_t": list(map(float, winding[1]))}
    path = directory / f"{name}.json"
    path.write_text(json.dumps(side, indent=2), encoding="utf-8")
    return path


def read_field(sidecar):
    """Return (array, sidecar dict); raises FieldIOError naming the offending path."""
    sidecar = Path(sidecar)
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FieldIOError(sidecar, f"unreadable sidecar ({exc})") from exc
    for key in ("n_s", "n_t", "P_s", "P_t", "components", "layout"):
        if key not in meta:
            raise FieldIOError(sidecar, f"missing key {key!r}")
    if meta["layout"] != "s-major":
        raise FieldIOError(sidecar, f"unsupported layout {meta['layout']!r}")
    n = int(meta["n_s"]) * int(meta["n_t"])
    cols = []
    for cname in meta["components"]:
        p = sidecar.parent / cname
        try:
            data = np.fromfile(p, dtype="<f8")
        except OSError as exc:
            raise FieldIOError(p, f"unreadable component ({exc})") from exc
        if data.size != n:
            raise FieldIOError(p, f"expected {n} float64 values, found {data.size}")
        if not np.all(np.isfinite(data)):
            raise FieldIOError(p, "non-finite values")
        cols.append(data.reshape(meta["n_s"], meta["n_t"]))
    if meta.get("complex"):
        if len(cols) % 2:
            raise FieldIOError(sidecar, "complex field needs an even number of components")
        arr = np.stack([cols[2 * k] + 1j * cols[2 * k + 1] for k in range(len(cols) // 2)], -1)
    else:
        arr = np.stack(cols, -1)
    return arr, meta


def write_superfield(directory, Phi: SuperField, extra: dict | None = None) -> Path:
    directory = Path(directory)
    grid = Phi.sheet.grid
    files = {"phi": write_field(directory, "phi", Phi.phi.periodic, grid,
                                winding=(Phi.phi.slope_s, Phi.phi.slope_t)).name}
    for role in ("psi1", "psi2", "xi"):
        files[role] = write_field(directory, role, getattr(Phi, role), grid).name
    manifest = dict(files)
    if extra:
        manifest.update(extra)
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return path


def read_superfield(directory, sheet, target) -> SuperField:
    directory = Path(directory)
    mpath = directory / "manifest.json"
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FieldIOError(mpath, f"unreadable manifest ({exc})") from exc
    arrays = {}
    for role in ROLES:
        if role not in manifest:
            raise FieldIOError(mpath, f"manifest lacks role {role!r}")
        arr, meta = read_field(directory / manifest[role])
        g = sheet.grid
        if (meta["n_s"], meta["n_t"]) != (g.n_s, g.n_t):
            raise FieldIOError(directory / manifest[role],
                               f"grid {meta['n_s']}x{meta['n_t']} does not match config {g.n_s}x{g.n_t}")
        if arr.shape[-1] != target.dim:
            raise FieldIOError(directory / manifest[role],
                               f"{arr.shape[-1]} components, target dimension {target.dim}")
        arrays[role] = (arr, meta)
    phi_arr, phi_meta = arrays["phi"]
    w = phi_meta.get("winding", {})
    phi = MapField(sheet, target, phi_arr.real, w.get("slope_s"), w.get("slope_t"))
    return SuperField(phi, arrays["psi1"][0], arrays["psi2"][0], arrays["xi"][0])
