import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import madd

DATA = Path(os.environ.get("MADD_TEST_DATA", Path(__file__).resolve().parents[2] / "tests" / "data"))


def load(name):
    return madd.Spec.load(str(DATA / f"{name}.json"))


def test_spec_round_trip():
    s = load("w2")
    assert (s.d, s.p) == (1, 2)
    again = madd.Spec(s.to_json())
    assert json.loads(again.to_json()) == json.loads(s.to_json())


def test_validate_and_moments():
    w1 = load("w1")
    assert all(madd.validate(w1)[k] for k in ("rows_stochastic", "aperiodic", "non_centered"))
    assert madd.moments(w1)["global_drift"][0] == pytest.approx(0.3)
    assert not madd.validate(load("centered"))["non_centered"]


def test_spec_errors():
    with pytest.raises(madd.SpecError):
        madd.Spec('{"d": 1, "p": 1,')
    with pytest.raises(madd.SpecError):
        load("bad_row_mass")


def test_walk_green_closed_form():
    w1 = load("w1")
    # Skip-free walk: G(0) = 1 / |drift|, left decay rate q = 0.4.
    assert madd.green_series(w1, 0, [0], 0, horizon=5000).value == pytest.approx(10 / 3, rel=1e-9)
    est = madd.green_resolvent(w1, 0, [-3], 0)
    assert est.value == pytest.approx(10 / 3 * 0.4**3, rel=1e-7)
    assert est.method == "resolvent"


def test_boundary_and_doob():
    w3 = load("w3")
    u = np.array([math.cos(0.7), math.sin(0.7)])
    b = madd.boundary_point(w3, u)
    assert abs(b["rho_residual"]) < 1e-10
    assert b["direction_residual"] < 1e-8
    phi, doob = madd.doob_transform(w3, b["c"])
    drift = madd.moments(doob)["global_drift"]
    assert np.allclose(drift / np.linalg.norm(drift), u, atol=1e-8)


def test_asymptotics_w1():
    w1 = load("w1")
    assert madd.asymptotic_green(w1, 0, [-4], 0) == pytest.approx(10 / 3 * 0.4**4, rel=1e-9)


def test_exceptions_precondition():
    with pytest.raises(madd.PreconditionError):
        madd.boundary_point(load("centered"), np.array([1.0]))


def test_checks_pass_w2():
    results = madd.run_checks(load("w2"), directions=4, mc_paths=2000)
    failed = [name for name, ok, _ in results if not ok]
    assert not failed
