"""Spherical Bessel/Hankel functions, spherical harmonics and their gradients.

Conventions
-----------
* ``Y_n^m = gamma_n^m exp(i m phi) P_n^m(cos theta)`` with
  ``gamma_n^m = sqrt((2n+1)(n-m)! / (4 pi (n+m)!))``; the Condon-Shortley
  phase ``(-1)^m`` lives inside ``P_n^m``.
* Negative orders follow ``P_n^{-m} = (-1)^m (n-m)!/(n+m)! P_n^m``, which for
  the normalized functions reads ``Y_n^{-m} = (-1)^m conj(Y_n^m)``.
* Batched evaluators return arrays whose last axis runs over the flat mode
  index ``lm_index(n, m) = n*n + n + m``.  One extra trailing column holding
  zeros is appended so that out-of-range modes can be gathered as zeros
  (see :func:`lm_gather`).
"""

from dataclasses import dataclass
from math import lgamma, pi
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError

__all__ = [
    "ModeIndex",
    "cartesian_to_spherical",
    "SphericalCoordinates",
    "RecurrenceCoefficients",
    "lm_index",
    "lm_gather",
    "n_modes",
    "spherical_jn_all",
    "spherical_yn_all",
    "spherical_h1_all",
    "spherical_bessel_j",
    "spherical_hankel1",
    "normalized_legendre_all",
    "legendre_assoc",
    "harmonics_all",
    "spherical_harmonic",
    "theta_derivative_harmonic",
    "coef_a",
    "coef_b",
    "coef_c",
    "coef_d",
    "coef_e",
    "coef_f",
    "recurrence_coefficients",
    "spherical_wave",
    "grad_spherical_wave_all",
    "grad_spherical_wave",
    "curl_matrix",
    "curl_matrix_spherical_wave",
]

_RESCALE_AT = 1e200
# below this argument j_n comes from its ascending series
_SERIES_BELOW = 1e-2


@dataclass(frozen=True)
class ModeIndex:
    """Degree/order pair ``(n, m)``."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"degree must be >= 0, got n={self.n}")

    @property
    def valid(self) -> bool:
        return abs(self.m) <= self.n


@dataclass(frozen=True)
class SphericalCoordinates:
    """Point in spherical coordinates; the azimuth is stored modulo 2 pi."""

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not self.r >= 0:
            raise DomainError(f"radius must be >= 0, got {self.r}")
        if not 0.0 <= self.theta <= pi:
            raise DomainError(f"polar angle must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * pi))

    @classmethod
    def from_cartesian(cls, x):
        x = np.asarray(x, dtype=float)
        r, theta, phi = cartesian_to_spherical(x)
        return cls(float(r), float(theta), float(phi))

    def to_cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return self.r * np.array(
            [np.cos(self.phi) * st, np.sin(self.phi) * st, np.cos(self.theta)]
        )


class RecurrenceCoefficients(NamedTuple):
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float


def cartesian_to_spherical(x):
    """Return ``(r, theta, phi)`` arrays for Cartesian points ``x[..., 3]``."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    rho = np.hypot(x[..., 0], x[..., 1])
    theta = np.arctan2(rho, x[..., 2])
    phi = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * pi)
    return r, theta, phi


def n_modes(n_max: int) -> int:
    """Number of valid ``(n, m)`` pairs with ``n <= n_max``."""
    return (n_max + 1) ** 2


def lm_index(n, m):
    """Flat index ``n*n + n + m`` (no validity check)."""
    return n * n + n + m


def lm_gather(n, m, n_max: int):
    """Flat index of ``(n, m)``, or the trailing zero column if out of range."""
    n = np.asarray(n)
    m = np.asarray(m)
    ok = (n >= 0) & (np.abs(m) <= n) & (n <= n_max)
    return np.where(ok, n * n + n + m, n_modes(n_max))


# ---------------------------------------------------------------------------
# Spherical Bessel functions
# ---------------------------------------------------------------------------
def _as_nonneg_array(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    if np.any(x < 0):
        raise DomainError(f"{name} must be >= 0")
    return x


def _jn_series(n_max, x):
    """Ascending series ``x^n/(2n+1)!! sum_k (-x^2/2)^k / (k! prod (2n+2i+1))``, 5 terms."""
    n = np.arange(n_max + 1)
    # x^n / (2n+1)!! built by a running product to avoid overflow in the factorial
    lead = np.cumprod(np.concatenate([np.ones((x.size, 1)), x[:, None] / (2 * n[1:] + 1)], axis=1), axis=1)
    q = -0.5 * x[:, None] ** 2
    term = np.ones((x.size, n_max + 1))
    total = term.copy()
    for k in range(1, 5):
        term = term * q / (k * (2 * n + 2 * k + 1))
        total += term
    return lead * total


def spherical_jn_all(n_max: int, x) -> np.ndarray:
    """``j_0 .. j_{n_max}`` at ``x``; shape ``x.shape + (n_max + 1,)``.

    Downward (Miller) recurrence started well above ``max(n_max, x)`` and
    normalized against the closed form of ``j_0`` or ``j_1``, whichever is
    larger in modulus.
    """
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    x = _as_nonneg_array(x)
    shape = x.shape
    xf = x.ravel()
    out = np.zeros((xf.size, n_max + 1))
    zero = xf == 0.0
    out[zero, 0] = 1.0
    small = (xf > 0) & (xf < _SERIES_BELOW)
    if np.any(small):
        out[small] = _jn_series(n_max, xf[small])
    pos = xf >= _SERIES_BELOW
    if not np.any(pos):
        return out.reshape(shape + (n_max + 1,))
    xp = xf[pos]
    top = max(n_max, int(np.ceil(xp.max())))
    start = top + 20 + int(np.sqrt(10.0 * top))

    vals = np.zeros((xp.size, n_max + 1))
    f_hi = np.zeros_like(xp)
    f = np.full_like(xp, 1e-30)
    f0 = f1 = None
    for n in range(start, -1, -1):
        if n <= n_max:
            vals[:, n] = f
        if n == 1:
            f1 = f.copy()
        if n == 0:
            f0 = f.copy()
            break
        f_lo = (2 * n + 1) / xp * f - f_hi
        f_hi, f = f, f_lo
        big = np.abs(f) > _RESCALE_AT
        if np.any(big):
            s = 1.0 / _RESCALE_AT
            f[big] *= s
            f_hi[big] *= s
            vals[big] *= s
            if f1 is not None:
                f1[big] *= s

    j0 = np.sin(xp) / xp
    j1 = np.sin(xp) / xp**2 - np.cos(xp) / xp
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / np.where(use0, f0, 1.0), j1 / np.where(use0, 1.0, f1))
    vals *= scale[:, None]
    # the ratio normalization loses relative accuracy next to zeros of j_0, j_1
    vals[:, 0] = j0
    if n_max >= 1:
        closed = xp >= 0.1
        vals[closed, 1] = j1[closed]
    out[pos] = vals
    return out.reshape(shape + (n_max + 1,))


def spherical_yn_all(n_max: int, x) -> np.ndarray:
    """``y_0 .. y_{n_max}`` at ``x > 0`` by upward recurrence."""
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    x = _as_nonneg_array(x)
    if np.any(x == 0):
        raise DomainError("spherical Bessel y_n is singular at x = 0")
    out = np.empty(x.shape + (n_max + 1,))
    c, s = np.cos(x), np.sin(x)
    out[..., 0] = -c / x
    if n_max >= 1:
        out[..., 1] = -c / x**2 - s / x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max):
            out[..., n + 1] = (2 * n + 1) / x * out[..., n] - out[..., n - 1]
    return out


def spherical_h1_all(n_max: int, x) -> np.ndarray:
    """Outgoing spherical Hankel functions ``h_n^(1) = j_n + i y_n`` for ``x > 0``."""
    x = _as_nonneg_array(x)
    if np.any(x == 0):
        raise DomainError("spherical Hankel function is singular at x = 0")
    return spherical_jn_all(n_max, x) + 1j * spherical_yn_all(n_max, x)


def _check_order(n):
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a non-negative integer, got {n}")
    return int(n)


def spherical_bessel_j(n: int, x):
    """Spherical Bessel function of the first kind ``j_n(x)``, ``x >= 0``."""
    n = _check_order(n)
    val = spherical_jn_all(n, x)[..., n]
    return val if val.ndim else float(val)


def spherical_hankel1(n: int, x):
    """Spherical Hankel function of the first kind ``h_n^(1)(x)``, ``x > 0``."""
    n = _check_order(n)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("spherical Hankel function requires x > 0")
    val = spherical_h1_all(n, x)[..., n]
    return val if val.ndim else complex(val)


# ---------------------------------------------------------------------------
# Legendre functions and spherical harmonics
# ---------------------------------------------------------------------------
def normalized_legendre_all(n_max: int, z) -> np.ndarray:
    """``gamma_n^m P_n^m(z)`` for all ``|m| <= n <= n_max`` plus a zero column.

    Three-term recurrence in degree at fixed order, seeded by the closed
    form of the sectoral term; negative orders by the ``(-1)^m`` reflection.
    """
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1.0):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    out = np.zeros(z.shape + (n_modes(n_max) + 1,))
    pmm = np.full(z.shape, 1.0 / np.sqrt(4 * pi))
    for m in range(n_max + 1):
        if m > 0:
            pmm = -np.sqrt((2 * m + 1) / (2.0 * m)) * s * pmm
        out[..., lm_index(m, m)] = pmm
        if m == n_max:
            break
        p_prev = pmm
        p = np.sqrt(2 * m + 3.0) * z * pmm
        out[..., lm_index(m + 1, m)] = p
        for n in range(m + 2, n_max + 1):
            alpha = np.sqrt((4.0 * n * n - 1) / (n * n - m * m))
            beta = np.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1) ** 2 - 1))
            p, p_prev = alpha * (z * p - beta * p_prev), p
            out[..., lm_index(n, m)] = p
    for n in range(1, n_max + 1):
        for m in range(1, n + 1):
            out[..., lm_index(n, -m)] = (-1) ** m * out[..., lm_index(n, m)]
    return out


def _gamma_nm(n, m):
    return np.exp(0.5 * (np.log(2 * n + 1.0) - np.log(4 * pi) + lgamma(n - m + 1) - lgamma(n + m + 1)))


def legendre_assoc(n: int, m: int, z):
    """Associated Legendre function ``P_n^m(z)`` with Condon-Shortley phase."""
    n = _check_order(n)
    if abs(m) > n:
        raise DomainError(f"|m| must not exceed n, got n={n}, m={m}")
    val = normalized_legendre_all(n, z)[..., lm_index(n, m)] / _gamma_nm(n, m)
    return val if np.ndim(val) else float(val)


def harmonics_all(n_max: int, theta, phi) -> np.ndarray:
    """All ``Y_n^m(theta, phi)`` with ``n <= n_max``, plus a trailing zero column."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = normalized_legendre_all(n_max, np.cos(theta)).astype(complex)
    ms = np.array([m for n in range(n_max + 1) for m in range(-n, n + 1)] + [0])
    out *= np.exp(1j * np.multiply.outer(phi, ms))
    return out


def _check_mode(n, m):
    n = _check_order(n)
    if abs(m) > n:
        raise DomainError(f"invalid mode (n={n}, m={m}): |m| > n")
    return n, int(m)


def spherical_harmonic(n: int, m: int, theta, phi):
    """Orthonormal spherical harmonic ``Y_n^m(theta, phi)``."""
    n, m = _check_mode(n, m)
    val = harmonics_all(n, theta, phi)[..., lm_index(n, m)]
    return val if np.ndim(val) else complex(val)


def theta_derivative_harmonic(n: int, m: int, theta, phi):
    """``d/dtheta Y_n^m`` from the Legendre derivative identity.

    Uses ``(n cos(theta) P_n^m - (n+m) P_{n-1}^m) / sin(theta)``, so the poles
    ``theta in {0, pi}`` are rejected.
    """
    n, m = _check_mode(n, m)
    theta = np.asarray(theta, dtype=float)
    st = np.sin(theta)
    if np.any((theta <= 0) | (theta >= pi)):
        raise DomainError("theta derivative is evaluated only for 0 < theta < pi")
    q = normalized_legendre_all(n, np.cos(theta))
    q_n = q[..., lm_index(n, m)]
    if abs(m) <= n - 1:
        # gamma_n^m (n+m) P_{n-1}^m expressed through the normalized function
        ratio = np.sqrt((2 * n + 1.0) * (n - m) * (n + m) / (2 * n - 1.0))
        q_lower = ratio * q[..., lm_index(n - 1, m)]
    else:
        q_lower = 0.0
    val = np.exp(1j * m * np.asarray(phi)) * (n * np.cos(theta) * q_n - q_lower) / st
    return val if np.ndim(val) else complex(val)


# ---------------------------------------------------------------------------
# Recurrence coefficients, direct-index forms
# ---------------------------------------------------------------------------
def _coef(num, den, nu, mu):
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = num / den
    ok = (nu >= 0) & (np.abs(mu) <= nu) & (rad > 0) & np.isfinite(rad)
    val = np.where(ok, np.sqrt(np.where(ok, rad, 0.0)), 0.0)
    return val if val.ndim else float(val)


def coef_a(nu, mu):
    nu, mu = np.asarray(nu, float), np.asarray(mu, float)
    return _coef((nu - mu + 2) * (nu - mu + 1), (2 * nu + 3) * (2 * nu + 1), nu, mu)


def coef_b(nu, mu):
    nu, mu = np.asarray(nu, float), np.asarray(mu, float)
    return _coef((nu + mu + 2) * (nu + mu + 1), (2 * nu + 3) * (2 * nu + 1), nu, mu)


def coef_c(nu, mu):
    nu, mu = np.asarray(nu, float), np.asarray(mu, float)
    return _coef((nu + mu) * (nu + mu - 1), (2 * nu - 1) * (2 * nu + 1), nu, mu)


def coef_d(nu, mu):
    nu, mu = np.asarray(nu, float), np.asarray(mu, float)
    return _coef((nu - mu) * (nu - mu - 1), (2 * nu - 1) * (2 * nu + 1), nu, mu)


def coef_e(nu, mu):
    nu, mu = np.asarray(nu, float), np.asarray(mu, float)
    return _coef((nu + mu + 1) * (nu - mu + 1), (2 * nu + 3) * (2 * nu + 1), nu, mu)


def coef_f(nu, mu):
    nu, mu = np.asarray(nu, float), np.asarray(mu, float)
    return _coef((nu + mu) * (nu - mu), (2 * nu - 1) * (2 * nu + 1), nu, mu)


def recurrence_coefficients(nu: int, mu: int) -> RecurrenceCoefficients:
    """The six coefficients ``a..f`` at direct indices ``(nu, mu)``.

    Each coefficient belongs to the harmonic ``Y_nu^mu`` it multiplies in the
    gradient formulas; it is 0 when that harmonic is out of range or the
    radicand is negative.
    """
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    return RecurrenceCoefficients(
        *(float(g(nu, mu)) for g in (coef_a, coef_b, coef_c, coef_d, coef_e, coef_f))
    )


# ---------------------------------------------------------------------------
# Gradients of spherical waves g_n(k|x|) Y_n^m(x/|x|)
# ---------------------------------------------------------------------------
def _radial_all(kind, n_max, kr):
    if kind == "regular":
        return spherical_jn_all(n_max, kr)
    if kind == "outgoing":
        return spherical_h1_all(n_max, kr)
    raise DomainError(f"kind must be 'regular' or 'outgoing', got {kind!r}")


def spherical_wave(kind: str, k: float, n: int, m: int, x):
    """Scalar wave ``g_n(k|x|) Y_n^m(x/|x|)`` at Cartesian points ``x[..., 3]``."""
    n, m = _check_mode(n, m)
    x = np.asarray(x, dtype=float)
    r, theta, phi = cartesian_to_spherical(x)
    if np.any(r == 0):
        raise DomainError("spherical waves are evaluated only for |x| > 0")
    val = _radial_all(kind, n, k * r)[..., n] * harmonics_all(n, theta, phi)[..., lm_index(n, m)]
    return val if np.ndim(val) else complex(val)


def grad_spherical_wave_all(kind: str, k: float, n_max: int, x) -> np.ndarray:
    """Cartesian gradients of ``g_n(k r) Y_n^m`` for every mode ``n <= n_max``.

    Parameters
    ----------
    kind : {"regular", "outgoing"}
        ``g_n = j_n`` or ``g_n = h_n^(1)``.
    k : float
        Wavenumber, > 0.
    n_max : int
    x : array_like, shape (..., 3)
        Cartesian points with ``|x| > 0``.

    Returns
    -------
    ndarray, shape (..., (n_max + 1)**2, 3)
    """
    x = np.asarray(x, dtype=float)
    r, theta, phi = cartesian_to_spherical(x)
    if np.any(r == 0):
        raise DomainError("gradient of a spherical wave is evaluated only for |x| > 0")
    g = _radial_all(kind, n_max + 1, k * r)
    g = np.concatenate([g, np.zeros(g.shape[:-1] + (1,), dtype=g.dtype)], axis=-1)
    Y = harmonics_all(n_max + 1, theta, phi)
    ns = np.array([n for n in range(n_max + 1) for _ in range(2 * n + 1)])
    ms = np.array([m for n in range(n_max + 1) for m in range(-n, n + 1)])
    lo = np.where(ns >= 1, ns - 1, n_max + 2)  # index of g_{n-1}; zero column otherwise
    hi = ns + 1
    N1 = n_max + 1

    a = coef_a(ns - 1, ms + 1)
    b = coef_b(ns - 1, ms - 1)
    c = coef_c(ns + 1, ms + 1)
    d = coef_d(ns + 1, ms - 1)
    e = coef_e(ns - 1, ms)
    f = coef_f(ns + 1, ms)
    Y_lo_p = Y[..., lm_gather(ns - 1, ms + 1, N1)]
    Y_lo_m = Y[..., lm_gather(ns - 1, ms - 1, N1)]
    Y_lo_0 = Y[..., lm_gather(ns - 1, ms, N1)]
    Y_hi_p = Y[..., lm_gather(ns + 1, ms + 1, N1)]
    Y_hi_m = Y[..., lm_gather(ns + 1, ms - 1, N1)]
    Y_hi_0 = Y[..., lm_gather(ns + 1, ms, N1)]
    g_lo = g[..., lo]
    g_hi = g[..., hi]

    out = np.empty(x.shape[:-1] + (ns.size, 3), dtype=complex)
    out[..., 0] = 0.5 * k * (g_lo * (a * Y_lo_p - b * Y_lo_m) + g_hi * (c * Y_hi_p - d * Y_hi_m))
    out[..., 1] = -0.5j * k * (g_lo * (a * Y_lo_p + b * Y_lo_m) + g_hi * (c * Y_hi_p + d * Y_hi_m))
    out[..., 2] = k * (g_lo * e * Y_lo_0 - g_hi * f * Y_hi_0)
    return out


def grad_spherical_wave(kind: str, k: float, n: int, m: int, x) -> np.ndarray:
    """Cartesian gradient of ``g_n(k|x|) Y_n^m(x/|x|)`` at a single point."""
    n, m = _check_mode(n, m)
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise DomainError("x must be a Cartesian 3-vector")
    return grad_spherical_wave_all(kind, k, n, x)[lm_index(n, m)]


def curl_matrix(grad) -> np.ndarray:
    """Antisymmetric matrix of the operator ``D_x`` from a gradient ``grad[..., 3]``."""
    grad = np.asarray(grad)
    out = np.zeros(grad.shape[:-1] + (3, 3), dtype=grad.dtype)
    g1, g2, g3 = grad[..., 0], grad[..., 1], grad[..., 2]
    out[..., 0, 1] = -g3
    out[..., 0, 2] = g2
    out[..., 1, 0] = g3
    out[..., 1, 2] = -g1
    out[..., 2, 0] = -g2
    out[..., 2, 1] = g1
    return out


def curl_matrix_spherical_wave(kind: str, k: float, n: int, m: int, x) -> np.ndarray:
    """``D_x`` applied to ``g_n(k|x|) Y_n^m(x/|x|)``: a 3x3 antisymmetric matrix."""
    return curl_matrix(grad_spherical_wave(kind, k, n, m, x))
