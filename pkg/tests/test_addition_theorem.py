import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from elastomfs.addition_theorem import (
    CONSTANT_MATRICES,
    ElasticParameters,
    angular_coefficient_table,
    angular_matrix,
    check_separation,
    fundamental_solution,
    fundamental_solution_batch,
    fundamental_solution_matrix,
    radial_factors,
    truncation_gap,
    wavenumbers,
)
from elastomfs.exceptions import DomainError, SeparationError
from elastomfs.reference_oracles import closed_form_fundamental, helmholtz_green
from elastomfs.special_functions import harmonics_all, lm_index

MATERIAL = ElasticParameters(-1.0, 2.0, 1.0)


def _random_pairs(rng, n, max_ratio=0.5):
    d = rng.normal(size=(2, n, 3))
    d /= np.linalg.norm(d, axis=2, keepdims=True)
    rx = rng.uniform(0.4, 5.0, n)
    ry = rng.uniform(0.2, max_ratio * rx)
    return rx[:, None] * d[0], ry[:, None] * d[1]


# ---------------------------------------------------------------------------
# Parameters and radial factors
# ---------------------------------------------------------------------------
def test_wavenumbers_experiment_material():
    kp, ks = wavenumbers(MATERIAL)
    assert kp == pytest.approx(1 / math.sqrt(3))
    assert ks == pytest.approx(1 / math.sqrt(2))


def test_wavenumbers_equal_when_lambda_is_minus_mu():
    p = ElasticParameters(-3.0, 3.0, 2.0)
    assert p.k_p == p.k_s == pytest.approx(2 / math.sqrt(3))


@pytest.mark.parametrize("lam,mu,omega", [(0.0, 0.0, 1.0), (1.0, -1.0, 1.0), (-5.0, 2.0, 1.0),
                                          (1.0, 1.0, 0.0), (float("nan"), 1.0, 1.0)])
def test_parameters_reject_invalid(lam, mu, omega):
    with pytest.raises(DomainError):
        ElasticParameters(lam, mu, omega)


def test_radial_order_zero_closed_form():
    p = ElasticParameters(-1.0, 1.0, 1.0)  # k_s = 1
    tri = radial_factors(0, 0, 2.0, 1.0, p)
    assert tri.h_s == pytest.approx(-1j * cmath.exp(2j) / 2 * math.sin(1.0), abs=1e-15)


def test_radial_minus_vanishes_when_wavenumbers_coincide():
    p = ElasticParameters(-2.0, 2.0, 1.3)
    for n1, n2, r, t in [(0, 0, 1.0, 0.5), (7, 3, 2.2, 0.1), (12, 12, 4.0, 3.9)]:
        assert radial_factors(n1, n2, r, t, p).h_minus == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 20), st.integers(0, 20), st.floats(0.2, 8.0), st.floats(0.0, 1.0))
def test_radial_sum_and_difference(n1, n2, r, frac):
    t = frac * r
    tri = radial_factors(n1, n2, r, t, MATERIAL)
    p = tri.h_plus - tri.h_s
    scale = abs(tri.h_s) + abs(p)
    assert abs((tri.h_plus - tri.h_minus) - 2 * tri.h_s) <= 8 * np.finfo(float).eps * scale


def test_radial_factor_rejects_bad_input():
    with pytest.raises(DomainError):
        radial_factors(-1, 0, 1.0, 0.5, MATERIAL)
    with pytest.raises(DomainError):
        radial_factors(0, 0, 0.0, 0.5, MATERIAL)
    with pytest.raises(DomainError):
        radial_factors(0, 0, 1.0, -0.1, MATERIAL)


# ---------------------------------------------------------------------------
# Angular matrices
# ---------------------------------------------------------------------------
def test_constant_matrices_read_only():
    with pytest.raises(ValueError):
        CONSTANT_MATRICES.A[0, 0] = 0
    np.testing.assert_array_equal(CONSTANT_MATRICES.S + CONSTANT_MATRICES.P, np.eye(3))


@pytest.mark.parametrize("n,m", [(0, 0), (1, -1), (1, 0), (1, 1)])
def test_minus_branch_vanishes_for_low_degree(n, m):
    np.testing.assert_array_equal(angular_matrix("minus", n, m, 0.7, 1.9), np.zeros((3, 3)))


def test_zero_branch_monopole():
    got = angular_matrix("zero", 0, 0, 1.1, -0.4)
    expect = -(1j / 6) * np.diag([1, 1, -2]) / math.sqrt(4 * math.pi)
    np.testing.assert_allclose(got, expect, atol=1e-15)


def test_plus_branch_monopole_independent_transcription():
    A = np.array([[-1j, 1, 0], [1, 1j, 0], [0, 0, 0]])
    B = np.array([[0, 0, 1j], [0, 0, -1], [1j, -1, 0]])
    C = np.diag([1j, 1j, -2j])
    D = np.array([[0, 0, -1j], [0, 0, -1], [-1j, -1, 0]])
    E = np.array([[-1j, -1, 0], [-1, 1j, 0], [0, 0, 0]])
    # coefficient products at n = 0, m = 0 written out by hand
    weights = [
        0.25 * math.sqrt(12 / 15) * math.sqrt(2 / 3),
        -0.5 * math.sqrt(6 / 15) / math.sqrt(3),
        0.5 * math.sqrt(2 / 15) * math.sqrt(2 / 3),
        -0.5 * math.sqrt(6 / 15) / math.sqrt(3),
        0.25 * math.sqrt(12 / 15) * math.sqrt(2 / 3),
    ]
    theta, phi = 0.8, 2.3
    expect = sum(w * special.sph_harm_y(2, s, theta, phi) * M
                 for w, s, M in zip(weights, range(-2, 3), (A, B, C, D, E)))
    np.testing.assert_allclose(angular_matrix("plus", 0, 0, theta, phi), expect, atol=1e-15)


def test_coefficient_table_masks_invalid_targets():
    w = angular_coefficient_table("zero", 1, 1)
    assert w[3] == 0 and w[4] == 0  # Y_1^2, Y_1^3 do not exist
    w = angular_coefficient_table("minus", 2, -2)  # only Y_0^0 survives
    np.testing.assert_array_equal(w[:4], 0.0)
    assert w[4] > 0


def test_angular_matrix_rejects_bad_arguments():
    with pytest.raises(DomainError):
        angular_matrix("zero", 1, 2, 0.1, 0.1)
    with pytest.raises(DomainError):
        angular_matrix("sideways", 1, 0, 0.1, 0.1)


# ---------------------------------------------------------------------------
# Fundamental solution
# ---------------------------------------------------------------------------
def test_helmholtz_reduction():
    rng = np.random.default_rng(1)
    mu = 1.5
    p = ElasticParameters(-mu, mu, 0.8)
    x, y = _random_pairs(rng, 50)
    phi = fundamental_solution_batch(x, y, p, 30)
    ref = (helmholtz_green(p.k_s, x, y) / mu)[:, None, None] * np.eye(3)
    assert np.max(np.abs(phi - ref)) <= 1e-10


def test_generic_pair_matches_closed_form():
    x = np.array([2.0, 0.3, 0.1])
    y = np.array([0.4, 0.2, -0.1])
    phi = fundamental_solution(x, y, MATERIAL, 30)
    assert np.max(np.abs(phi - closed_form_fundamental(x, y, MATERIAL))) <= 1e-8


def test_swap_is_exact():
    x = np.array([2.0, 0.3, 0.1])
    y = np.array([0.4, 0.2, -0.1])
    np.testing.assert_array_equal(fundamental_solution(x, y, MATERIAL), fundamental_solution(y, x, MATERIAL))


def test_symmetry_of_converged_matrix():
    rng = np.random.default_rng(2)
    x, y = _random_pairs(rng, 40)
    phi = fundamental_solution_batch(x, y, MATERIAL, 30)
    asym = np.abs(phi - phi.transpose(0, 2, 1)).max(axis=(1, 2))
    assert np.all(asym <= 1e-9 * np.abs(phi).max(axis=(1, 2)))


def test_grid_matches_pairwise_with_mixed_ordering():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(7, 3))
    y = 0.3 * rng.normal(size=(5, 3))
    y[0] *= 20  # some |y| > |x| pairs
    grid = fundamental_solution_matrix(x, y, MATERIAL, 12)
    for k in range(7):
        for j in range(5):
            np.testing.assert_allclose(grid[k, j], fundamental_solution(x[k], y[j], MATERIAL, 12), atol=1e-14)


def test_batch_requires_matching_rows():
    with pytest.raises(DomainError):
        fundamental_solution_batch(np.ones((3, 3)), np.ones((2, 3)) * 0.1, MATERIAL)


def test_separation_guard():
    x = np.array([1.0, 0.0, 0.0])
    with pytest.raises(SeparationError):
        fundamental_solution(x, np.array([0.0, 1.0, 0.0]), MATERIAL)
    with pytest.raises(SeparationError) as info:
        fundamental_solution_matrix(np.array([[2.0, 0, 0], [1.0, 0, 0]]), np.array([[0, 0, 0.9995]]), MATERIAL)
    assert info.value.pair == (1, 0)
    check_separation(np.array([1.0]), np.array([0.5]))
    with pytest.raises(DomainError):
        fundamental_solution(np.zeros(3), x, MATERIAL)


def test_fallback_order_for_close_radii():
    x = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    y = np.array([[0.0, 0.9995, 0.0]])
    out = fundamental_solution_matrix(x, y, MATERIAL, 10, fallback_n_max=40)
    np.testing.assert_allclose(out[0, 0], fundamental_solution(x[0], y[0], MATERIAL, 40, separation=0.0), atol=1e-15)
    np.testing.assert_allclose(out[1, 0], fundamental_solution(x[1], y[0], MATERIAL, 10), atol=1e-15)


def test_truncation_gap_decays():
    x = np.array([1.0, 0.5, -0.2])
    y = 0.3 * x[[1, 2, 0]] * np.linalg.norm(x) / np.linalg.norm(x[[1, 2, 0]])
    assert truncation_gap(x, y, MATERIAL, 25) < truncation_gap(x, y, MATERIAL, 10)


def test_truncation_gap_helmholtz_tail():
    mu = 2.0
    p = ElasticParameters(-mu, mu, 1.0)
    x = np.array([1.5, 0.4, 0.9])
    y = np.array([-0.2, 0.5, 0.1])
    n = 6
    k = p.k_s
    ry, rx = np.linalg.norm(y), np.linalg.norm(x)
    cos_g = x @ y / (rx * ry)
    # degree-n term of the scalar expansion i k sum_n h_n(k|x|) j_n(k|y|) (2n+1)/(4 pi) P_n(cos gamma)
    term = 1j * k * special.spherical_jn(n, k * ry) * (special.spherical_jn(n, k * rx) + 1j * special.spherical_yn(n, k * rx))
    term *= (2 * n + 1) / (4 * math.pi) * special.eval_legendre(n, cos_g)
    assert truncation_gap(x, y, p, n) == pytest.approx(abs(term) / mu, rel=1e-10)


def test_truncation_gap_errors():
    x = np.array([1.0, 0.0, 0.0])
    with pytest.raises(SeparationError):
        truncation_gap(x, np.array([0.0, 0.0, 1.0]), MATERIAL, 5)
    with pytest.raises(DomainError):
        truncation_gap(x, 0.5 * x, MATERIAL, 0)


def test_monopole_only_truncation():
    # n_max = 0 keeps the degree-0 term of the y harmonics
    x = np.array([3.0, 0.0, 0.0])
    y = np.array([0.0, 0.1, 0.0])
    phi0 = fundamental_solution(x, y, MATERIAL, 0)
    assert phi0.shape == (3, 3) and np.all(np.isfinite(phi0))
    Y = harmonics_all(0, 0.0, 0.0)
    assert Y[lm_index(0, 0)] == pytest.approx(1 / math.sqrt(4 * math.pi))
