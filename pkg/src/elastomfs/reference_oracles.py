"""Independent evaluations of the fundamental solution used for validation.

Nothing in here is used by the MFS solver.  Two routes are provided:

* the closed-form elastodynamic Green matrix
  ``(1/mu) G_ks I + (1/omega^2) Hess_x (G_ks - G_kp)`` with
  ``G_k(rho) = exp(i k rho) / (4 pi rho)``;
* the vector spherical-wave series built from gradients and ``D_x`` of
  scalar spherical waves.

plus a central-difference evaluation of the Navier-Lame operator.
"""

from dataclasses import dataclass

import numpy as np

from .addition_theorem import DEFAULT_SEPARATION, ElasticParameters, check_separation
from .exceptions import DomainError
from .special_functions import curl_matrix, grad_spherical_wave_all

__all__ = [
    "WaveFieldSample",
    "helmholtz_green",
    "helmholtz_hessian",
    "closed_form_fundamental",
    "vector_wave_fundamental",
    "arens_fundamental",
    "pde_residual",
]


@dataclass(frozen=True)
class WaveFieldSample:
    point: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float)
        v = np.asarray(self.value, dtype=complex)
        if p.shape != (3,) or v.shape != (3,):
            raise DomainError("point and value must be 3-vectors")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise DomainError("sample must be finite")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "value", v)


def _separation_vector(x, y):
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    rho = np.linalg.norm(d, axis=-1)
    if np.any(rho == 0):
        raise DomainError("Green function is singular at x = y")
    return d, rho


def helmholtz_green(k: float, x, y):
    """Outgoing Helmholtz Green function ``exp(i k |x-y|) / (4 pi |x-y|)``."""
    _, rho = _separation_vector(x, y)
    val = np.exp(1j * k * rho) / (4 * np.pi * rho)
    return val if np.ndim(val) else complex(val)


def helmholtz_hessian(k: float, x, y) -> np.ndarray:
    """Analytic Hessian in ``x`` of :func:`helmholtz_green`; shape (..., 3, 3)."""
    d, rho = _separation_vector(x, y)
    rho_ = rho[..., None, None]
    u = d[..., :, None] * d[..., None, :] / rho_**2
    g = np.exp(1j * k * rho_) / (4 * np.pi * rho_)
    q = 1j * k - 1.0 / rho_
    g1 = g * q
    g2 = g * (q * q + 1.0 / rho_**2)
    return g2 * u + g1 / rho_ * (np.eye(3) - u)


def closed_form_fundamental(x, y, params: ElasticParameters) -> np.ndarray:
    """Closed-form outgoing Green matrix of the Navier-Lame operator."""
    g = np.asarray(helmholtz_green(params.k_s, x, y))
    out = (g / params.mu)[..., None, None] * np.eye(3)
    if params.k_p != params.k_s:
        out = out + (helmholtz_hessian(params.k_s, x, y) - helmholtz_hessian(params.k_p, x, y)) / params.omega**2
    return out


def vector_wave_fundamental(x, y, params: ElasticParameters, n_max: int,
                      separation: float = DEFAULT_SEPARATION) -> np.ndarray:
    """Partial sum of the vector spherical-wave series for ``|x| > |y|``.

    ``(i/omega^2) sum_{n<=n_max, m} (k_p r_p(x) conj(e_p(y))^T
    + k_s R_s(x) conj(E_s(y))^T)`` with ``r_p, e_p`` gradients of outgoing and
    regular pressure waves and ``R_s, E_s`` the ``D_x`` matrices of the shear
    waves.  No argument swap is performed.

    Accepts single points or paired rows ``(P, 3)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = x.ndim == 1
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    rx = np.linalg.norm(x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    check_separation(rx, ry, separation)
    if np.any(rx <= ry):
        raise DomainError("this series requires |x| > |y|; arguments are not swapped")
    kp, ks = params.k_p, params.k_s
    rp = grad_spherical_wave_all("outgoing", kp, n_max, x)
    ep = np.conj(grad_spherical_wave_all("regular", kp, n_max, y))
    rs = curl_matrix(grad_spherical_wave_all("outgoing", ks, n_max, x))
    es = np.conj(curl_matrix(grad_spherical_wave_all("regular", ks, n_max, y)))
    out = kp * np.einsum("pli,plj->pij", rp, ep) + ks * np.einsum("plik,pljk->pij", rs, es)
    out *= 1j / params.omega**2
    return out[0] if single else out


def pde_residual(field, params: ElasticParameters, point, h: float) -> np.ndarray:
    """Central-difference value of ``mu Lap u + (lam+mu) grad div u + omega^2 u``.

    ``field`` maps a Cartesian point to a complex 3-vector.  Second-order
    accurate in the step ``h``.
    """
    if not h > 0:
        raise DomainError(f"step must be > 0, got {h}")
    x0 = np.asarray(point, dtype=float)
    eye = np.eye(3)
    u0 = np.asarray(field(x0), dtype=complex)
    # second derivatives d2[i, j] = d_i d_j u (a 3-vector each)
    d2 = np.empty((3, 3, 3), dtype=complex)
    for i in range(3):
        up = np.asarray(field(x0 + h * eye[i]), dtype=complex)
        dn = np.asarray(field(x0 - h * eye[i]), dtype=complex)
        d2[i, i] = (up - 2 * u0 + dn) / h**2
        for j in range(i + 1, 3):
            pp = field(x0 + h * (eye[i] + eye[j]))
            pm = field(x0 + h * (eye[i] - eye[j]))
            mp = field(x0 + h * (eye[j] - eye[i]))
            mm = field(x0 - h * (eye[i] + eye[j]))
            d2[i, j] = d2[j, i] = (np.asarray(pp) - pm - mp + mm) / (4 * h**2)
    lap = d2[0, 0] + d2[1, 1] + d2[2, 2]
    grad_div = np.array([sum(d2[i, j][j] for j in range(3)) for i in range(3)])
    return params.mu * lap + (params.lam + params.mu) * grad_div + params.omega**2 * u0


# name used by the module interface
arens_fundamental = vector_wave_fundamental
