import math

import numpy as np
import pytest

import hjlab


def test_exponents_example():
    e = hjlab.derive_exponents(3.0, 4.0, 3)
    assert e["p"] == pytest.approx(8 / 3)
    assert e["delta"] == pytest.approx(0.0625, rel=1e-15)
    assert not e["used_fallback"]
    with pytest.raises(hjlab.AdmissibilityError):
        hjlab.derive_exponents(3.0, 1.5, 3)
    assert issubclass(hjlab.AdmissibilityError, hjlab.DomainError)


def test_spectral_derivatives():
    n = 32
    x = -0.5 + np.arange(n) / n
    u = np.sin(2 * np.pi * x)
    (du,) = hjlab.gradient(u)
    np.testing.assert_allclose(du, 2 * np.pi * np.cos(2 * np.pi * x), atol=1e-12)
    np.testing.assert_allclose(hjlab.laplacian(u), -4 * np.pi**2 * u, atol=1e-10)
    assert hjlab.lq_norm(np.ones((8, 8)), 3.0) == pytest.approx(1.0)


def test_manufactured_solve_recovers_u():
    u_star, f_star = hjlab.manufactured(2, 32, 2.0)
    out = hjlab.solve(f_star, gamma=2.0)
    assert out["converged"]
    assert np.max(np.abs(out["u"] - u_star)) < 1e-8
    assert abs(out["lambda"]) < 1e-8
    assert out["integral_identity"] < 1e-9


def test_source_is_deterministic():
    a = hjlab.generate_source(2, 32, 7, 3, 2.0, 4.0)
    b = hjlab.generate_source(2, 32, 7, 3, 2.0, 4.0)
    assert np.array_equal(a, b)
    assert hjlab.lq_norm(a, 4.0) == pytest.approx(2.0, abs=1e-10)


def test_superlevel_curve_of_zero_field():
    c = hjlab.superlevel_curve(np.zeros((16, 16)), 3.0, 4.0, k_grid=[1.0, 2.0])
    assert c["Y"] == [0.0, 0.0]


def test_alternative_and_counterexample():
    z, f = hjlab.f_alternative(4)
    assert z == pytest.approx(0.25) and f == pytest.approx(0.25)
    lo, hi = hjlab.alternative_roots(3, 0.0)
    assert (lo, hi) == (0.0, 1.0)
    assert hjlab.c_constant(3.0, 3) ** 2 == pytest.approx(1.5)
    assert hjlab.critical_q(3.0, 3) == 2.0
    slope, _, residual = hjlab.divergence_fit(3.0, 3, [2.0**-k for k in range(4, 10)])
    assert slope == pytest.approx(1.5**3 * 4 * math.pi, rel=0.02)
    assert residual < 0.02


def test_field_round_trip(tmp_path):
    u = np.random.default_rng(0).standard_normal((8, 8))
    path = str(tmp_path / "u.field")
    hjlab.write_field(path, u)
    assert np.array_equal(hjlab.read_field(path), u)
    with pytest.raises(hjlab.IoError):
        hjlab.read_field(str(tmp_path / "missing.field"))
