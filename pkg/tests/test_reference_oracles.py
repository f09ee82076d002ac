import math

import numpy as np
import pytest

from elastomfs.addition_theorem import ElasticParameters, fundamental_solution_batch
from elastomfs.exceptions import DomainError, SeparationError
from elastomfs.reference_oracles import (
    WaveFieldSample,
    vector_wave_fundamental,
    closed_form_fundamental,
    helmholtz_green,
    helmholtz_hessian,
    pde_residual,
)

MATERIAL = ElasticParameters(-1.0, 2.0, 1.0)


def test_helmholtz_green_static_limit_and_phase():
    x, y = np.array([1.0, 2.0, 0.0]), np.array([0.0, 0.0, 0.5])
    rho = np.linalg.norm(x - y)
    assert helmholtz_green(0.0, x, y) == pytest.approx(1 / (4 * math.pi * rho))
    assert helmholtz_green(math.pi, np.zeros(3), np.array([0.0, 1.0, 0.0])) == pytest.approx(-1 / (4 * math.pi))
    assert helmholtz_green(1.3, x, y) == helmholtz_green(1.3, y, x)
    with pytest.raises(DomainError):
        helmholtz_green(1.0, x, x)


def test_hessian_matches_finite_differences():
    y = np.array([0.1, -0.2, 0.3])
    x = np.array([1.2, 0.4, -0.7])
    k = 0.9
    h = 1e-4
    eye = np.eye(3)
    fd = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            f = lambda a, b: helmholtz_green(k, x + a * h * eye[i] + b * h * eye[j], y)
            fd[i, j] = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h * h)
    H = helmholtz_hessian(k, x, y)
    assert np.max(np.abs(H - fd)) <= 1e-6 * np.max(np.abs(H))


def test_closed_form_properties():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(20, 3)), rng.normal(size=(20, 3))
    phi = closed_form_fundamental(x, y, MATERIAL)
    np.testing.assert_allclose(phi, phi.transpose(0, 2, 1), atol=1e-15)
    mu = 2.0
    p = ElasticParameters(-mu, mu, 1.0)
    red = closed_form_fundamental(x, y, p)
    np.testing.assert_array_equal(red, (helmholtz_green(p.k_s, x, y) / mu)[:, None, None] * np.eye(3))


def test_closed_form_hessian_part_fd():
    x, y = np.array([1.0, 0.5, 0.2]), np.array([-0.3, 0.1, 0.0])
    h = 1e-4
    eye = np.eye(3)

    def g(p):
        return helmholtz_green(MATERIAL.k_s, p, y) - helmholtz_green(MATERIAL.k_p, p, y)

    fd = np.array([[(g(x + h * (eye[i] + eye[j])) - g(x + h * (eye[i] - eye[j])) - g(x - h * (eye[i] - eye[j]))
                     + g(x - h * (eye[i] + eye[j]))) / (4 * h * h) for j in range(3)] for i in range(3)])
    hess_part = closed_form_fundamental(x, y, MATERIAL) - helmholtz_green(MATERIAL.k_s, x, y) / MATERIAL.mu * np.eye(3)
    assert np.max(np.abs(hess_part - fd / MATERIAL.omega**2)) <= 1e-6 * np.max(np.abs(hess_part))


def test_vector_wave_series_agrees_with_addition_theorem():
    rng = np.random.default_rng(5)
    d = rng.normal(size=(2, 100, 3))
    d /= np.linalg.norm(d, axis=2, keepdims=True)
    rx = rng.uniform(0.4, 5.0, 100)
    ry = rng.uniform(0.2, 0.5 * rx)
    x, y = rx[:, None] * d[0], ry[:, None] * d[1]
    a = vector_wave_fundamental(x, y, MATERIAL, 40)
    b = fundamental_solution_batch(x, y, MATERIAL, 40)
    assert np.max(np.abs(a - b)) <= 1e-8


def test_vector_wave_series_helmholtz_reduction():
    p = ElasticParameters(-1.0, 1.0, 1.0)
    x, y = np.array([2.0, -1.0, 0.5]), np.array([0.2, 0.3, -0.4])
    got = vector_wave_fundamental(x, y, p, 40)
    np.testing.assert_allclose(got, helmholtz_green(p.k_s, x, y) * np.eye(3), atol=1e-10)


def test_vector_wave_series_requires_ordering():
    with pytest.raises(DomainError):
        vector_wave_fundamental(np.array([0.3, 0, 0]), np.array([0, 1.0, 0]), MATERIAL, 5)
    with pytest.raises(SeparationError):
        vector_wave_fundamental(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), MATERIAL, 5)


def test_pde_residual_constant_field():
    c = np.array([1.0, -2.0, 0.5j])
    res = pde_residual(lambda p: c, MATERIAL, np.array([0.3, 0.2, 0.1]), 1e-2)
    np.testing.assert_allclose(res, MATERIAL.omega**2 * c, atol=1e-12)


def test_pde_residual_plane_pressure_wave():
    d = np.array([1.0, 2.0, 2.0]) / 3.0
    field = lambda p: d * np.exp(1j * MATERIAL.k_p * (p @ d))
    x0 = np.array([0.4, -0.1, 0.7])
    r1 = np.linalg.norm(pde_residual(field, MATERIAL, x0, 1e-2))
    r2 = np.linalg.norm(pde_residual(field, MATERIAL, x0, 5e-3))
    assert r1 < 1e-5
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_pde_residual_rejects_bad_step():
    with pytest.raises(DomainError):
        pde_residual(lambda p: np.zeros(3), MATERIAL, np.zeros(3), 0.0)


def test_wave_field_sample_validation():
    s = WaveFieldSample([1, 2, 3], [1j, 0, 0])
    assert s.value.dtype == complex
    with pytest.raises(DomainError):
        WaveFieldSample([1, 2], [0, 0, 0])
    with pytest.raises(DomainError):
        WaveFieldSample([1, 2, np.inf], [0, 0, 0])
