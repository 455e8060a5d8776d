"""Smoke tests for the Python bindings. Run with the build tree on PYTHONPATH."""

import json
import math
import os
import pathlib
from math import comb

import numpy as np
import pytest

import kds

SCHEMAS = pathlib.Path(os.environ.get("KDS_SCHEMA_DIR", pathlib.Path(__file__).parents[2] / "schemas"))
LAM, MASS = 0.06, 1.0


def mu_coeffs(lam, a, mass):
    return [-lam / 3, 0.0, 1 - lam * a * a / 3, -2 * mass, a * a]


# Schwarzschild-de Sitter radial equation mu^2 R'' + mu mu' R' + (s^2 r^4 - L mu) R = 0,
# Frobenius at each horizon, RK4 to the middle, secant on the Wronskian.
def _shift(c, x0):
    n = len(c)
    return np.array([sum(c[j] * comb(j, k) * x0 ** (j - k) for j in range(k, n)) for k in range(n)])


def _frobenius(s, l, rh, sign, x, nterms=60):
    L = l * (l + 1)
    asc = np.array(mu_coeffs(LAM, 0.0, MASS)[::-1])
    p = _shift(asc, rh)
    p[0] = 0.0
    q = np.polynomial.polynomial.polymul(p, p)
    w = np.polynomial.polynomial.polymul(p, np.polynomial.polynomial.polyder(p))
    v = s * s * _shift(np.array([0, 0, 0, 0, 1.0]), rh) - L * p

    def at(arr, i):
        return arr[i] if 0 <= i < len(arr) else 0.0

    alpha = sign * 1j * s * rh**2 / p[1]
    c = np.zeros(nterms, dtype=complex)
    c[0] = 1
    for n in range(1, nterms):
        acc = 0
        for k in range(max(0, n - 8), n):
            e = k + alpha
            acc += c[k] * (at(q, n - k + 2) * e * (e - 1) + at(w, n - k + 1) * e + at(v, n - k))
        e = n + alpha
        c[n] = -acc / (at(q, 2) * e * (e - 1) + at(w, 1) * e + at(v, 0))
    e = np.arange(nterms) + alpha
    xc = complex(x)
    return np.array([np.sum(c * xc**e), np.sum(c * e * xc ** (e - 1))])


def _wronskian(s, l, re, rc, steps=3000):
    L = l * (l + 1)
    coef = mu_coeffs(LAM, 0.0, MASS)
    dcoef = np.polyder(coef)

    def rhs(r, y):
        m, dm = np.polyval(coef, r), np.polyval(dcoef, r)
        return np.array([y[1], (-dm * y[1] - (s * s * r**4 / m - L) * y[0]) / m])

    def rk4(y, r0, r1):
        h = (r1 - r0) / steps
        r = r0
        for _ in range(steps):
            k1 = rhs(r, y)
            k2 = rhs(r + h / 2, y + h / 2 * k1)
            k3 = rhs(r + h / 2, y + h / 2 * k2)
            k4 = rhs(r + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            r += h
        return y

    mid = 0.5 * (re + rc)
    ye = rk4(_frobenius(s, l, re, -1, 0.5), re + 0.5, mid)
    yc = rk4(_frobenius(s, l, rc, +1, -0.5), rc - 0.5, mid)
    return ye[0] * yc[1] - ye[1] * yc[0]


def radial_mode(guess, l, re, rc):
    s0, s1 = guess, guess * (1 + 1e-4) + 1e-6
    f0, f1 = _wronskian(s0, l, re, rc), _wronskian(s1, l, re, rc)
    for _ in range(30):
        s0, f0, s1 = s1, f1, s1 - f1 * (s1 - s0) / (f1 - f0)
        if abs(s1 - s0) < 1e-12:
            break
        f1 = _wronskian(s1, l, re, rc)
    return s1


def test_roots_match_numpy():
    for a in (0.0, 0.3):
        p = kds.SpacetimeParams.make(LAM, a, MASS)
        ref = np.sort(np.roots(mu_coeffs(LAM, a, MASS)).real)
        assert np.allclose(p.roots, ref, rtol=1e-10, atol=1e-12)
        assert p.r_e == p.roots[2] and p.r_c == p.roots[3]
        assert abs(p.mu(p.r_e)) < 1e-12
        assert p.b == pytest.approx(1 + LAM * a * a / 3, rel=1e-15)


def test_not_subextremal_raises():
    with pytest.raises(kds.KdsError, match="NotSubextremal"):
        kds.SpacetimeParams.make(0.2, 0.0, 1.0)


def test_beta_and_window():
    g = kds.Geometry.make(LAM, 0.3, MASS)
    beta = kds.beta_threshold(g.params, g.horizons)
    assert beta == pytest.approx(1 / min(g.horizons.kappa_e, g.horizons.kappa_c), rel=1e-12)
    assert kds.fredholm_window(beta, 0.5) == 0.0
    assert kds.fredholm_window(beta, 1.0) == pytest.approx(-1 / (2 * beta))


def test_ergoregions_and_t_norm():
    p = kds.SpacetimeParams.make(LAM, 0.3, MASS)
    mid = kds.StationaryFrame.make(p, 0.5 * (p.r_e + p.r_c))
    assert kds.t_norm(p, mid, mid.r0, math.pi / 2) < 0
    assert kds.ergoregion_components(p, mid) == 2
    assert kds.ergoregion_components(p, kds.StationaryFrame.make(p, p.r_e)) == 1


def test_small_census_escapes():
    g = kds.Geometry.make(LAM, 0.3, MASS)
    frame = kds.StationaryFrame.make(g.params, g.params.r_e)
    c = kds.trapping_scan(g, frame, count=20)
    assert c["trapped"] == 0 and c["failures"] == 0
    assert c["escaped_low"] + c["escaped_high"] == c["sampled"]


def test_fundamental_mode_against_radial_shooting():
    g = kds.Geometry.make(LAM, 0.0, MASS)
    modes = kds.solve_qnm(g, 3.0, m=0, nr=32, ntheta=4, doubling=False)
    ref = radial_mode(0.0635 - 0.0948j, 0, g.params.r_e, g.params.r_c)
    best = min(modes, key=lambda d: abs(d["sigma_lab"] - ref))
    assert abs(best["sigma_lab"] - ref) < 1e-6
    assert best["l"] == 0
    assert best["residual"] < 1e-8


def _validator(name):
    jsonschema = pytest.importorskip("jsonschema")
    referencing = pytest.importorskip("referencing")
    resources = []
    for f in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(f.read_text())
        resources.append((doc["$id"], referencing.Resource.from_contents(doc)))
    registry = referencing.Registry().with_resources(resources)
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    return jsonschema.Draft202012Validator(schema, registry=registry)


def test_run_command_outputs_follow_the_schemas(tmp_path):
    cfg = json.dumps({"params": {"lambda": LAM, "a": 0.3, "mass": MASS}})
    code, log = kds.run_command("params", cfg, str(tmp_path / "p"))
    assert code == 0, log
    report = json.loads((tmp_path / "p" / "params.json").read_text())
    _validator("params").validate(report)
    _validator("manifest").validate(json.loads((tmp_path / "p" / "manifest.json").read_text()))
    assert report["beta"] == pytest.approx(1 / min(report["kappa_e"], report["kappa_c"]), rel=1e-12)

    bad = json.dumps({"params": {"lambda": 0.2, "a": 0.0, "mass": MASS}})
    code, _ = kds.run_command("params", bad, str(tmp_path / "bad"))
    assert code == 2
    _validator("params").validate(json.loads((tmp_path / "bad" / "params.json").read_text()))

    code, log = kds.run_command("params", "{ nope", str(tmp_path / "x"))
    assert code == 1 and "line 1" in log

    trap = json.dumps({"params": {"lambda": LAM, "a": 0.3, "mass": MASS}, "r0": "mid",
                       "orthogonal": {"count": 10}})
    code, log = kds.run_command("trap", trap, str(tmp_path / "t"), seed=3)
    assert code == 0, log
    _validator("trap").validate(json.loads((tmp_path / "t" / "trap.json").read_text()))
    assert json.loads((tmp_path / "t" / "manifest.json").read_text())["seed"] == 3

    qnm = json.dumps({"params": {"lambda": LAM, "a": 0.0, "mass": MASS}, "Nr": 16, "Ntheta": 4,
                      "doubling": False})
    code, log = kds.run_command("qnm", qnm, str(tmp_path / "q"))
    assert code == 0, log
    _validator("qnm").validate(json.loads((tmp_path / "q" / "qnm.json").read_text()))
