import json

import numpy as np
import pytest

from supercurves.config import ConfigError, RunConfig
from supercurves.fieldio import (FieldIOError, read_field, read_superfield, write_field,
                                 write_superfield)
from supercurves.suite import construct_supercurve, random_superfield
from supercurves.target import FlatTorus, PerturbedR4

from conftest import sheet


def test_config_defaults_and_roundtrip():
    cfg = RunConfig()
    assert cfg.grid.n_s == 64 and cfg.target.kind == "flat_torus" and cfg.seed == 7
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg


def test_config_lambda_alias():
    cfg = RunConfig.from_dict({"lambda": {"const": 2.0, "amplitude": 0.3}})
    assert cfg.lam.const == 2.0 and cfg.lam.amplitude == 0.3


@pytest.mark.parametrize("bad", [
    {"grid": {"scheme": "upwind"}},
    {"grid": {"n_s": 0}},
    {"target": {"kind": "hyperbolic"}},
    {"lam": {"amplitude": 1.5}},
    {"lam": {"const": -1.0}},
    {"n_random": 0},
    {"tolerances": {"classical_identity": 0}},
    {"colour": "blue"},
    {"grid": {"nx": 12}},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(bad)


def test_config_tolerances():
    assert RunConfig().tolerance("classical_identity") == 1e-9
    assert RunConfig.from_dict({"target": {"kind": "sphere"}}).tolerance("x") == 1e-6
    assert RunConfig.from_dict({"grid": {"scheme": "central4"}}).tolerance("x") == 1e-6
    assert RunConfig.from_dict({"tolerances": {"x": 1e-3}}).tolerance("x") == 1e-3


def test_config_load_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(p)
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")


def test_field_roundtrip(tmp_path, rng):
    sh = sheet(8)
    arr = rng.normal(size=(8, 8, 3))
    side = write_field(tmp_path, "a", arr, sh.grid)
    back, meta = read_field(side)
    assert np.array_equal(back, arr) and meta["components"] == ["a.0.f64", "a.1.f64", "a.2.f64"]
    carr = arr + 1j * rng.normal(size=arr.shape)
    back, meta = read_field(write_field(tmp_path, "c", carr, sh.grid))
    assert np.array_equal(back, carr) and meta["complex"]
    raw = np.fromfile(tmp_path / "a.1.f64", dtype="<f8").reshape(8, 8)
    assert np.array_equal(raw, arr[..., 1])        # s-major layout


def test_superfield_roundtrip(tmp_path, rng):
    sh = sheet(8)
    P = random_superfield(sh, PerturbedR4(0.1), rng)
    write_superfield(tmp_path, P, {"note": 1})
    Q = read_superfield(tmp_path, sh, PerturbedR4(0.1))
    assert np.array_equal(Q.phi.periodic, P.phi.periodic)
    assert np.array_equal(Q.phi.slope_s, P.phi.slope_s) and np.array_equal(Q.phi.slope_t, P.phi.slope_t)
    for k in ("psi1", "psi2", "xi"):
        assert np.array_equal(getattr(Q, k), getattr(P, k))


def test_field_io_errors(tmp_path, rng):
    sh = sheet(8)
    side = write_field(tmp_path, "a", rng.normal(size=(8, 8, 2)), sh.grid)
    (tmp_path / "a.1.f64").write_bytes(b"\0" * 24)
    with pytest.raises(FieldIOError) as e:
        read_field(side)
    assert "a.1.f64" in str(e.value)
    np.full(64, np.nan).tofile(tmp_path / "a.1.f64")
    with pytest.raises(FieldIOError, match="non-finite"):
        read_field(side)
    side.write_text("{}")
    with pytest.raises(FieldIOError, match="missing key"):
        read_field(side)
    with pytest.raises(FieldIOError):
        read_superfield(tmp_path / "nowhere", sh, FlatTorus(2))


def test_superfield_grid_mismatch(tmp_path):
    P, _ = construct_supercurve(RunConfig.from_dict({"grid": {"n_s": 16, "n_t": 16}}))
    write_superfield(tmp_path, P)
    with pytest.raises(FieldIOError, match="does not match"):
        read_superfield(tmp_path, sheet(8), FlatTorus(2))
