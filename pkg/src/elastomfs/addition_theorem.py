"""Series expansion of the time-harmonic Navier-Lame fundamental solution.

For ``|x| > |y|`` the outgoing (Kupradze) fundamental solution of
``mu Lap u + (lambda + mu) grad div u + omega^2 u = f`` is expanded as

    Phi(x, y) = Psi + Phi_minus + Phi_zero + Phi_plus

where ``Psi`` pairs ``Y_n^m(x) conj(Y_n^m(y))`` with the constant matrices
``S`` and ``P``, and each ``Phi_#`` pairs ``Y_{n+delta}^{m+sigma}(x)`` with
``conj(Y_n^m(y))`` through the constant matrices ``A..E`` (``sigma = -2..2``)
and the radial difference ``H^-_{n+delta, n}``, ``delta in {-2, 0, +2}``.
Only spherical Bessel/Hankel functions and scalar harmonics are evaluated.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import isfinite, sqrt
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, SeparationError
from .special_functions import (
    cartesian_to_spherical,
    coef_a,
    coef_b,
    coef_c,
    coef_d,
    coef_e,
    coef_f,
    harmonics_all,
    lm_gather,
    lm_index,
    n_modes,
    spherical_h1_all,
    spherical_jn_all,
)

__all__ = [
    "ElasticParameters",
    "RadialTriple",
    "ConstantMatrixSet",
    "CONSTANT_MATRICES",
    "DEFAULT_N_MAX",
    "DEFAULT_SEPARATION",
    "wavenumbers",
    "radial_factors",
    "angular_matrix",
    "angular_coefficient_table",
    "fundamental_solution",
    "fundamental_solution_batch",
    "fundamental_solution_matrix",
    "truncation_gap",
    "check_separation",
]

DEFAULT_N_MAX = 10
DEFAULT_SEPARATION = 1e-3
# pairs evaluated per vectorized block; bounds peak memory of the term array
_CHUNK = 512


@dataclass(frozen=True)
class ElasticParameters:
    """Lame constants and angular frequency of the time-harmonic problem.

    Attributes
    ----------
    lam, mu : float
        Lame parameters. Strong ellipticity requires ``mu > 0`` and
        ``2 mu + lam > 0``.
    omega : float
        Angular frequency, > 0.
    """

    lam: float
    mu: float
    omega: float = 1.0
    k_p: float = field(init=False)
    k_s: float = field(init=False)

    def __post_init__(self):
        for name in ("lam", "mu", "omega"):
            v = getattr(self, name)
            if not isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
        if not self.mu > 0:
            raise DomainError(f"strong ellipticity requires mu > 0, got mu={self.mu}")
        if not 2 * self.mu + self.lam > 0:
            raise DomainError(
                f"strong ellipticity requires 2*mu + lambda > 0, got {2 * self.mu + self.lam}"
            )
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        object.__setattr__(self, "k_p", self.omega / sqrt(2 * self.mu + self.lam))
        object.__setattr__(self, "k_s", self.omega / sqrt(self.mu))


def wavenumbers(params: ElasticParameters):
    """Longitudinal and transversal wavenumbers ``(k_p, k_s)``."""
    return params.k_p, params.k_s


class RadialTriple(NamedTuple):
    h_s: complex
    h_plus: complex
    h_minus: complex


def _radial_products(k, n1, n2, r, t):
    h = spherical_h1_all(n1, k * r)[..., n1]
    j = spherical_jn_all(n2, k * t)[..., n2]
    return k**3 * h * j


def radial_factors(n1: int, n2: int, r: float, t: float, params: ElasticParameters) -> RadialTriple:
    """``(H^{k_s}, H^{+}, H^{-})`` for degrees ``n1`` (outgoing) and ``n2`` (regular)."""
    if n1 < 0 or n2 < 0:
        raise DomainError(f"degrees must be >= 0, got n1={n1}, n2={n2}")
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    if not t >= 0:
        raise DomainError(f"t must be >= 0, got {t}")
    s = complex(_radial_products(params.k_s, n1, n2, r, t))
    if params.k_p == params.k_s:
        p = s
    else:
        p = complex(_radial_products(params.k_p, n1, n2, r, t))
    return RadialTriple(s, p + s, p - s)


@dataclass(frozen=True)
class ConstantMatrixSet:
    S: np.ndarray
    P: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray

    def by_order_shift(self):
        """Matrices multiplying ``Y^{m+sigma}`` for ``sigma = -2..2``."""
        return (self.A, self.B, self.C, self.D, self.E)


def _frozen(rows):
    a = np.array(rows, dtype=complex)
    a.setflags(write=False)
    return a


CONSTANT_MATRICES = ConstantMatrixSet(
    S=_frozen([[0, 0, 0], [0, 0, 0], [0, 0, 1]]),
    P=_frozen([[1, 0, 0], [0, 1, 0], [0, 0, 0]]),
    A=_frozen([[-1j, 1, 0], [1, 1j, 0], [0, 0, 0]]),
    B=_frozen([[0, 0, 1j], [0, 0, -1], [1j, -1, 0]]),
    C=_frozen([[1j, 0, 0], [0, 1j, 0], [0, 0, -2j]]),
    D=_frozen([[0, 0, -1j], [0, 0, -1], [-1j, -1, 0]]),
    E=_frozen([[-1j, -1, 0], [-1, 1j, 0], [0, 0, 0]]),
)

_BRANCH_SHIFT = {"minus": -2, "zero": 0, "plus": 2}


def angular_coefficient_table(branch: str, n, m):
    """Scalar weights of ``A..E`` in ``S_{#,n}^m`` as an array ``(..., 5)``.

    Column ``sigma + 2`` multiplies ``Y_{n+delta}^{m+sigma}``.  Weights whose
    target harmonic is out of range are returned as 0.
    """
    n = np.asarray(n)
    m = np.asarray(m)
    a, b, c, d = coef_a(n, m), coef_b(n, m), coef_c(n, m), coef_d(n, m)
    e, f = coef_e(n, m), coef_f(n, m)
    if branch == "minus":
        w = [
            0.25 * coef_b(n - 2, m - 2) * c,
            0.5 * coef_b(n - 2, m - 1) * f,
            0.5 * coef_a(n - 2, m) * c,
            0.5 * coef_a(n - 2, m + 1) * f,
            0.25 * coef_a(n - 2, m + 2) * d,
        ]
    elif branch == "zero":
        w = [
            0.25 * (coef_b(n, m - 2) * a + coef_d(n, m - 2) * c),
            0.5 * (coef_d(n, m - 1) * f - coef_b(n, m - 1) * e),
            -0.5 * (e * e + f * f),
            0.5 * (coef_c(n, m + 1) * f - coef_a(n, m + 1) * e),
            0.25 * (coef_a(n, m + 2) * b + coef_c(n, m + 2) * d),
        ]
    elif branch == "plus":
        w = [
            0.25 * coef_d(n + 2, m - 2) * a,
            -0.5 * coef_d(n + 2, m - 1) * e,
            0.5 * coef_c(n + 2, m) * a,
            -0.5 * coef_c(n + 2, m + 1) * e,
            0.25 * coef_c(n + 2, m + 2) * b,
        ]
    else:
        raise DomainError(f"branch must be 'minus', 'zero' or 'plus', got {branch!r}")
    w = np.stack(np.broadcast_arrays(*w), axis=-1).astype(float)
    delta = _BRANCH_SHIFT[branch]
    n1 = n[..., None] + delta
    m1 = m[..., None] + np.arange(-2, 3)
    return np.where((n1 >= 0) & (np.abs(m1) <= n1), w, 0.0)


def angular_matrix(branch: str, n: int, m: int, theta, phi) -> np.ndarray:
    """``S_{#,n}^m(theta, phi)``: five harmonics weighted by ``A..E``."""
    if n < 0 or abs(m) > n:
        raise DomainError(f"invalid mode (n={n}, m={m})")
    delta = _BRANCH_SHIFT.get(branch)
    if delta is None:
        raise DomainError(f"branch must be 'minus', 'zero' or 'plus', got {branch!r}")
    w = angular_coefficient_table(branch, n, m)
    n1 = n + delta
    Y = harmonics_all(max(n1, 0), theta, phi)
    out = np.zeros(np.shape(theta) + (3, 3), dtype=complex)
    for col, M in enumerate(CONSTANT_MATRICES.by_order_shift()):
        idx = lm_gather(n1, m + col - 2, max(n1, 0))
        out = out + (w[col] * Y[..., idx])[..., None, None] * M
    return out


@dataclass(frozen=True)
class _TermTable:
    """Flattened non-zero terms of the three ``Phi_#`` blocks up to ``n_max``."""

    target: np.ndarray  # flat index of Y_{n+delta}^{m+sigma}(x)
    source: np.ndarray  # flat index of Y_n^m(y)
    n1: np.ndarray  # outgoing degree n + delta
    n2: np.ndarray  # regular degree n
    weight: np.ndarray
    sigma_onehot: np.ndarray  # (T, 5)
    sigma_slices: tuple  # contiguous term ranges per sigma


@lru_cache(maxsize=16)
def _term_table(n_max: int) -> _TermTable:
    ns = np.array([n for n in range(n_max + 1) for _ in range(2 * n + 1)])
    ms = np.array([m for n in range(n_max + 1) for m in range(-n, n + 1)])
    parts = []
    for branch, delta in _BRANCH_SHIFT.items():
        w = angular_coefficient_table(branch, ns, ms)
        for col in range(5):
            keep = w[:, col] != 0.0
            n1 = ns[keep] + delta
            m1 = ms[keep] + col - 2
            parts.append((lm_index(n1, m1), lm_index(ns[keep], ms[keep]), n1, ns[keep], w[keep, col], col))
    target = np.concatenate([p[0] for p in parts])
    source = np.concatenate([p[1] for p in parts])
    n1 = np.concatenate([p[2] for p in parts])
    n2 = np.concatenate([p[3] for p in parts])
    weight = np.concatenate([p[4] for p in parts])
    cols = np.concatenate([np.full(p[0].size, p[5]) for p in parts])
    order = np.argsort(cols, kind="stable")
    target, source, n1, n2, weight, cols = (a[order] for a in (target, source, n1, n2, weight, cols))
    onehot = np.zeros((target.size, 5))
    onehot[np.arange(target.size), cols] = 1.0
    bounds = np.searchsorted(cols, np.arange(6))
    slices = tuple(slice(int(bounds[i]), int(bounds[i + 1])) for i in range(5))
    return _TermTable(target, source, n1, n2, weight, onehot, slices)


def check_separation(rx, ry, separation=DEFAULT_SEPARATION):
    """Raise :class:`SeparationError` when ``min/max`` radius ratio exceeds ``1 - separation``."""
    rx = np.asarray(rx, dtype=float)
    ry = np.asarray(ry, dtype=float)
    if np.any(rx == 0) or np.any(ry == 0):
        raise DomainError("fundamental solution series needs x != 0 and y != 0")
    ratio = np.minimum(rx, ry) / np.maximum(rx, ry)
    bad = ratio > 1.0 - separation
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        raise SeparationError(
            f"|x| and |y| too close for the series: radius ratio {ratio.ravel()[i]:.6g} "
            f"exceeds 1 - {separation:g} (pair #{i})",
            pair=i,
        )
    return ratio


def _orient(x, y):
    """Swap rows so that the first argument has the larger radius."""
    rx = np.linalg.norm(x, axis=-1)
    ry = np.linalg.norm(y, axis=-1)
    swap = rx < ry
    xo = np.where(swap[:, None], y, x)
    yo = np.where(swap[:, None], x, y)
    return xo, yo


def _outgoing_factors(x, params, n_max, table):
    """Per-point factors of the larger-radius argument.

    Returns ``(psi_s, psi_p, term_p, term_s)``: the Hankel-times-harmonic
    products indexed by mode (for ``Psi``) and by series term (for ``Phi_#``).
    """
    r, theta, phi = cartesian_to_spherical(x)
    Y = harmonics_all(n_max + 2, theta, phi)
    ks, kp = params.k_s, params.k_p
    hs = ks**3 * spherical_h1_all(n_max + 2, ks * r)
    hp = hs if kp == ks else kp**3 * spherical_h1_all(n_max + 2, kp * r)
    L = n_modes(n_max)
    n_of = _mode_degrees(n_max)
    psi_s = hs[:, n_of] * Y[:, :L]
    psi_p = hp[:, n_of] * Y[:, :L]
    if kp == ks:
        return psi_s, psi_p, None, None
    Yt = Y[:, table.target]
    return psi_s, psi_p, hp[:, table.n1] * Yt, hs[:, table.n1] * Yt


def _regular_factors(y, params, n_max, table):
    """Per-point factors of the smaller-radius argument (conjugated harmonics)."""
    t, theta, phi = cartesian_to_spherical(y)
    Yc = np.conj(harmonics_all(n_max, theta, phi))
    ks, kp = params.k_s, params.k_p
    js = spherical_jn_all(n_max, ks * t)
    jp = js if kp == ks else spherical_jn_all(n_max, kp * t)
    L = n_modes(n_max)
    n_of = _mode_degrees(n_max)
    psi_s = js[:, n_of] * Yc[:, :L]
    psi_p = jp[:, n_of] * Yc[:, :L]
    if kp == ks:
        return psi_s, psi_p, None, None
    Ys = Yc[:, table.source] * table.weight
    return psi_s, psi_p, jp[:, table.n2] * Ys, js[:, table.n2] * Ys


@lru_cache(maxsize=16)
def _mode_degrees(n_max):
    return np.repeat(np.arange(n_max + 1), 2 * np.arange(n_max + 1) + 1)


def _assemble(psi_s, psi_p, minus_sums, params):
    """Combine the scalar sums into 3x3 blocks; leading axes are preserved."""
    M = CONSTANT_MATRICES
    w2 = params.omega**2
    out = (1j / w2) * (psi_s[..., None, None] * M.S + 0.5 * (psi_p + psi_s)[..., None, None] * M.P)
    if minus_sums is not None:
        out = out + np.einsum("...s,sij->...ij", minus_sums, np.stack(M.by_order_shift())) / w2
    return out


def _batch_kernel(x, y, params, n_max):
    """Series for paired rows of ``x`` (larger radius) and ``y``; shape (P, 3, 3)."""
    table = _term_table(n_max)
    ox = _outgoing_factors(x, params, n_max, table)
    oy = _regular_factors(y, params, n_max, table)
    psi_s = np.sum(ox[0] * oy[0], axis=1)
    psi_p = np.sum(ox[1] * oy[1], axis=1)
    sums = None
    if ox[2] is not None:
        sums = (ox[2] * oy[2] - ox[3] * oy[3]) @ table.sigma_onehot
    return _assemble(psi_s, psi_p, sums, params)


def _grid_kernel(x, y, params, n_max):
    """Series for every combination of rows of ``x`` (outgoing) and ``y``; (K, J, 3, 3)."""
    table = _term_table(n_max)
    ox = _outgoing_factors(x, params, n_max, table)
    oy = _regular_factors(y, params, n_max, table)
    psi_s = ox[0] @ oy[0].T
    psi_p = ox[1] @ oy[1].T
    sums = None
    if ox[2] is not None:
        sums = np.empty((x.shape[0], y.shape[0], 5), dtype=complex)
        for col, sl in enumerate(table.sigma_slices):
            sums[..., col] = ox[2][:, sl] @ oy[2][:, sl].T - ox[3][:, sl] @ oy[3][:, sl].T
    return _assemble(psi_s, psi_p, sums, params)


def fundamental_solution_batch(x, y, params: ElasticParameters, n_max: int = DEFAULT_N_MAX,
                               separation: float = DEFAULT_SEPARATION) -> np.ndarray:
    """Truncated series ``Phi(x_i, y_i)`` for paired rows; shape (P, 3, 3).

    Rows with ``|x_i| < |y_i|`` are evaluated with the arguments exchanged,
    which is exact because ``Phi(x, y) = Phi(y, x)``.
    """
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[-1] != 3 or y.shape[-1] != 3 or (len(x) != len(y) and 1 not in (len(x), len(y))):
        raise DomainError(f"paired rows need shapes (P, 3); got {x.shape} and {y.shape}")
    x, y = np.broadcast_arrays(x, y)
    check_separation(np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1), separation)
    xo, yo = _orient(x, y)
    out = np.empty((x.shape[0], 3, 3), dtype=complex)
    for s in range(0, x.shape[0], _CHUNK):
        out[s:s + _CHUNK] = _batch_kernel(xo[s:s + _CHUNK], yo[s:s + _CHUNK], params, n_max)
    return out


def fundamental_solution_matrix(x, y, params: ElasticParameters, n_max: int = DEFAULT_N_MAX,
                                separation: float = DEFAULT_SEPARATION,
                                fallback_n_max=None) -> np.ndarray:
    """``Phi(x_k, y_j)`` for every row ``x_k`` of ``x`` and ``y_j`` of ``y``.

    The series factorizes into a function of ``x`` times a function of ``y``,
    so all blocks come out of a few dense products.  Blocks with
    ``|x_k| < |y_j|`` are taken from the exchanged evaluation.

    Parameters
    ----------
    x : array_like, shape (K, 3)
    y : array_like, shape (J, 3)
    params : ElasticParameters
    n_max : int
    separation : float
        Relative radius guard, see :func:`check_separation`.
    fallback_n_max : int, optional
        If given, pairs failing the guard are evaluated with this (higher)
        truncation order instead of raising :class:`SeparationError`.

    Returns
    -------
    ndarray, shape (K, J, 3, 3)
    """
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    rx = np.linalg.norm(x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    if np.any(rx == 0) or np.any(ry == 0):
        raise DomainError("fundamental solution series needs x != 0 and y != 0")
    ratio = np.minimum.outer(rx, ry) / np.maximum.outer(rx, ry)
    near = ratio > 1.0 - separation
    if np.any(near) and fallback_n_max is None:
        k, j = (int(i) for i in np.argwhere(near)[0])
        raise SeparationError(
            f"|x| and |y| too close for the series at pair (x[{k}], y[{j}]): radius ratio "
            f"{ratio[k, j]:.6g} exceeds 1 - {separation:g}",
            pair=(k, j),
        )
    swap = rx[:, None] < ry[None, :]
    out = np.empty((x.shape[0], y.shape[0], 3, 3), dtype=complex)
    for s in range(0, x.shape[0], _CHUNK):
        sl = slice(s, s + _CHUNK)
        out[sl] = _grid_kernel(x[sl], y, params, n_max)
        if np.any(swap[sl]):
            back = _grid_kernel(y, x[sl], params, n_max).transpose(1, 0, 2, 3)
            out[sl] = np.where(swap[sl][..., None, None], back, out[sl])
    if np.any(near):
        k, j = np.nonzero(near)
        out[k, j] = fundamental_solution_batch(x[k], y[j], params, fallback_n_max, separation=0.0)
    return out


def fundamental_solution(x, y, params: ElasticParameters, n_max: int = DEFAULT_N_MAX,
                         separation: float = DEFAULT_SEPARATION) -> np.ndarray:
    """Truncated addition-theorem value of the 3x3 fundamental solution ``Phi(x, y)``.

    Parameters
    ----------
    x, y : array_like, shape (3,)
        Cartesian points, both nonzero and with radii differing by more than
        the relative ``separation`` guard.
    params : ElasticParameters
    n_max : int
        Series truncated to degrees ``n <= n_max`` in the ``y`` harmonics.
    separation : float
        Pairs with ``min(|x|,|y|)/max(|x|,|y|) > 1 - separation`` are refused.

    Returns
    -------
    ndarray, shape (3, 3), complex
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (3,) or y.shape != (3,):
        raise DomainError("x and y must be Cartesian 3-vectors")
    return fundamental_solution_batch(x[None], y[None], params, n_max, separation)[0]


def truncation_gap(x, y, params: ElasticParameters, n_max: int,
                   separation: float = DEFAULT_SEPARATION) -> float:
    """Max-entry modulus of ``Phi_{n_max} - Phi_{n_max - 1}``."""
    if n_max < 1:
        raise DomainError(f"truncation gap needs n_max >= 1, got {n_max}")
    hi = fundamental_solution(x, y, params, n_max, separation)
    lo = fundamental_solution(x, y, params, n_max - 1, separation)
    return float(np.max(np.abs(hi - lo)))
