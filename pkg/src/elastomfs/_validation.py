"""Input validation helpers for point clouds and vector fields."""

import numpy as np

from .exceptions import DomainError


def check_points(X, name="X", allow_empty=False):
    """Return ``X`` as a finite float array of shape (n, 3)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape[0] == 3:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 3:
        raise DomainError(f"{name} must have shape (n, 3), got {X.shape}")
    if not allow_empty and X.shape[0] == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} contains non-finite coordinates")
    return X


def check_field(U, n_points, name="y"):
    """Return ``U`` as a finite complex array of shape (n_points, 3)."""
    U = np.asarray(U, dtype=complex)
    if U.ndim == 1 and U.size == 3 * n_points:
        U = U.reshape(n_points, 3)
    if U.shape != (n_points, 3):
        raise DomainError(f"{name} must have shape ({n_points}, 3), got {U.shape}")
    if not np.all(np.isfinite(U)):
        raise DomainError(f"{name} contains non-finite values")
    return U


def check_vector3(v, name="v"):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise DomainError(f"{name} must be a finite 3-vector")
    return v


def max_norm(X):
    return np.max(np.abs(X), axis=-1)
