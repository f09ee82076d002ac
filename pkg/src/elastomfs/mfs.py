"""Method of fundamental solutions for the exterior of the cube ``[-1, 1]^3``.

The displacement outside the cube is approximated by
``u^N(x) = sum_j Phi(x, y_j) alpha_j`` with source points ``y_j`` inside the
cube; the vector coefficients ``alpha_j`` come from collocating the Dirichlet
data on boundary points ``x_k``.

:class:`MFSExteriorSolver` wraps the pipeline as an estimator: ``fit`` takes
boundary points and boundary values, ``predict`` evaluates the field.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field, check_points, check_vector3, max_norm
from .addition_theorem import (
    DEFAULT_N_MAX,
    DEFAULT_SEPARATION,
    ElasticParameters,
    fundamental_solution_matrix,
)
from .exceptions import DomainError, SeparationError, SingularSystemError

logger = logging.getLogger(__name__)

# condition numbers above this are treated as numerically singular
SINGULAR_COND = 1e14
# evaluation points per block in field evaluation
EVAL_CHUNK = 2048


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BoundaryMesh:
    points: np.ndarray
    subdiv: int

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class BasisSet:
    points: np.ndarray
    ratio: float

    def __len__(self):
        return self.points.shape[0]


def cube_boundary_lattice(subdiv: int) -> BoundaryMesh:
    """Vertices of the uniform ``subdiv x subdiv`` lattice on every face of the cube.

    Nodes shared by faces appear once, so there are ``6 subdiv^2 + 2`` points.
    """
    if int(subdiv) != subdiv or subdiv < 1:
        raise DomainError(f"subdiv must be an integer >= 1, got {subdiv}")
    subdiv = int(subdiv)
    ticks = np.linspace(-1.0, 1.0, subdiv + 1)
    pts = np.array(list(itertools.product(ticks, ticks, ticks)))
    pts = pts[max_norm(pts) == 1.0]
    pts.setflags(write=False)
    return BoundaryMesh(pts, subdiv)


def homothetic_basis(mesh, ratio: float) -> BasisSet:
    """Source points ``y_j = ratio * x_j`` strictly inside the cube."""
    if not 0.0 < ratio < 1.0:
        raise DomainError(f"homothety ratio must lie in (0, 1), got {ratio}")
    points = mesh.points if isinstance(mesh, BoundaryMesh) else check_points(mesh, "mesh")
    pts = ratio * np.asarray(points, dtype=float)
    pts.setflags(write=False)
    return BasisSet(pts, float(ratio))


def evaluation_grid(half_width: float = 5.0, per_axis: int = 11, obstacle_margin: float = 0.0) -> np.ndarray:
    """Uniform lattice on ``[-half_width, half_width]^3`` restricted to max-norm > 1 + margin."""
    if per_axis < 2:
        raise DomainError(f"per_axis must be >= 2, got {per_axis}")
    if not half_width > 1.0:
        raise DomainError(f"half_width must exceed 1 for a non-empty exterior grid, got {half_width}")
    ticks = np.linspace(-half_width, half_width, int(per_axis))
    pts = np.array(list(itertools.product(ticks, ticks, ticks)))
    pts = pts[max_norm(pts) > 1.0 + obstacle_margin]
    if pts.shape[0] == 0:
        raise DomainError("evaluation grid has no points outside the obstacle")
    return pts


# ---------------------------------------------------------------------------
# Boundary data from a point source
# ---------------------------------------------------------------------------
class PointSourceField:
    """Exact field ``u(x) = Phi(x, P) v`` of a point force at ``P`` inside the cube.

    Calling the object evaluates ``u`` at an array of points; it doubles as the
    boundary data ``g`` on the cube surface.
    """

    def __init__(self, source, v, params: ElasticParameters, n_max: int = DEFAULT_N_MAX,
                 separation: float = DEFAULT_SEPARATION):
        self.source = check_vector3(source, "source point")
        self.v = check_vector3(v, "v")
        if not np.any(self.v):
            raise DomainError("source vector v must be nonzero")
        if max_norm(self.source) >= 1.0:
            raise DomainError("source point must lie strictly inside the cube")
        self.params = params
        self.n_max = n_max
        self.separation = separation

    def __call__(self, x):
        x = check_points(x, "x")
        out = np.empty((x.shape[0], 3), dtype=complex)
        for s in range(0, x.shape[0], EVAL_CHUNK):
            phi = fundamental_solution_matrix(x[s:s + EVAL_CHUNK], self.source[None], self.params,
                                              self.n_max, self.separation)[:, 0]
            out[s:s + EVAL_CHUNK] = phi @ self.v
        return out


def point_source_data(source, v, params: ElasticParameters, n_max: int = DEFAULT_N_MAX,
                      separation: float = DEFAULT_SEPARATION) -> PointSourceField:
    return PointSourceField(source, v, params, n_max, separation)


def spherical_point(r: float, theta: float, phi: float) -> np.ndarray:
    st = np.sin(theta)
    return r * np.array([np.cos(phi) * st, np.sin(phi) * st, np.cos(theta)])


# ---------------------------------------------------------------------------
# Collocation system
# ---------------------------------------------------------------------------
@dataclass
class CollocationSystem:
    matrix: np.ndarray  # (3M, 3N)
    rhs: np.ndarray  # (3M,)

    @property
    def n_collocation(self) -> int:
        return self.matrix.shape[0] // 3

    @property
    def n_basis(self) -> int:
        return self.matrix.shape[1] // 3


@dataclass
class MfsSolution:
    coefficients: np.ndarray  # (3N,), stacked alpha_j
    residual_norm: float
    condition_number: float = float("nan")

    @property
    def alphas(self) -> np.ndarray:
        return self.coefficients.reshape(-1, 3)


def _blocks_to_matrix(blocks):
    K, J = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(3 * K, 3 * J)


def kernel_matrix(x, basis_points, params, n_max=DEFAULT_N_MAX, separation=DEFAULT_SEPARATION,
                  fallback_n_max=None) -> np.ndarray:
    """Dense ``(3K, 3N)`` matrix of blocks ``Phi(x_k, y_j)``."""
    x = check_points(x, "x")
    y = check_points(basis_points, "basis points")
    try:
        blocks = fundamental_solution_matrix(x, y, params, n_max, separation, fallback_n_max)
    except SeparationError as exc:
        k, j = exc.pair
        raise SeparationError(
            f"collocation point x[{k}]={x[k].tolist()} and basis point y[{j}]={y[j].tolist()} "
            f"have nearly equal radii; {exc}",
            pair=exc.pair,
        ) from exc
    return _blocks_to_matrix(blocks)


def assemble_system(mesh, basis, params: ElasticParameters, n_max: int, g,
                    separation: float = DEFAULT_SEPARATION, fallback_n_max=None) -> CollocationSystem:
    """Collocation matrix of blocks ``Phi(x_k, y_j)`` and stacked data ``g(x_k)``.

    ``g`` is either a callable evaluated at the collocation points or an
    array of shape (M, 3).
    """
    x = check_points(mesh.points if isinstance(mesh, BoundaryMesh) else mesh, "collocation points")
    y = check_points(basis.points if isinstance(basis, BasisSet) else basis, "basis points")
    matrix = kernel_matrix(x, y, params, n_max, separation, fallback_n_max)
    values = g(x) if callable(g) else g
    rhs = check_field(values, x.shape[0], "boundary data").ravel()
    return CollocationSystem(matrix, rhs)


def solve_dense(system: CollocationSystem, singular_cond: float = SINGULAR_COND) -> MfsSolution:
    """Solve the collocation system.

    Square systems use an LU factorization with partial pivoting; rectangular
    ones the minimum-norm least-squares solution from a complete orthogonal
    factorization.
    """
    A, b = system.matrix, system.rhs
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise SingularSystemError("collocation system contains non-finite entries")
    cond = float(np.linalg.cond(A))
    logger.info("collocation matrix %dx%d, condition number %.3e", A.shape[0], A.shape[1], cond)
    if A.shape[0] == A.shape[1]:
        if not cond < singular_cond:
            raise SingularSystemError(
                f"square collocation matrix is numerically singular (condition {cond:.3e}); "
                "use a non-square configuration to select least squares"
            )
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
        alpha = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    else:
        alpha = scipy.linalg.lstsq(A, b, lapack_driver="gelsy", check_finite=False)[0]
    residual = float(np.linalg.norm(A @ alpha - b))
    return MfsSolution(alpha, residual, cond)


def evaluate_mfs(solution: MfsSolution, basis, params: ElasticParameters, n_max: int, x,
                 separation: float = DEFAULT_SEPARATION, fallback_n_max=None) -> np.ndarray:
    """``u^N(x) = sum_j Phi(x, y_j) alpha_j`` at points on or outside the cube; (L, 3)."""
    x = check_points(x, "x")
    if np.any(max_norm(x) < 1.0):
        raise DomainError("field evaluation points must not lie inside the cube")
    y = check_points(basis.points if isinstance(basis, BasisSet) else basis, "basis points")
    alpha = np.asarray(solution.coefficients if isinstance(solution, MfsSolution) else solution,
                       dtype=complex).ravel()
    if alpha.size != 3 * y.shape[0]:
        raise DomainError(f"expected {3 * y.shape[0]} coefficients, got {alpha.size}")
    out = np.empty((x.shape[0], 3), dtype=complex)
    for s in range(0, x.shape[0], EVAL_CHUNK):
        K = kernel_matrix(x[s:s + EVAL_CHUNK], y, params, n_max, separation, fallback_n_max)
        out[s:s + EVAL_CHUNK] = (K @ alpha).reshape(-1, 3)
    return out


def error_metrics(exact, approx) -> Tuple[float, float]:
    """Maximum and root-mean-square Euclidean error over co-located samples."""
    exact = np.asarray(exact, dtype=complex)
    approx = np.asarray(approx, dtype=complex)
    if exact.shape != approx.shape:
        raise DomainError(f"sample sets differ in shape: {exact.shape} vs {approx.shape}")
    if exact.ndim == 1:
        exact, approx = exact[None], approx[None]
    if exact.shape[0] == 0:
        raise DomainError("error metrics need at least one sample")
    err = np.linalg.norm(exact - approx, axis=-1)
    return float(np.max(err)), float(np.sqrt(np.mean(err**2)))


@dataclass
class ErrorReport:
    rows: List[Tuple[int, float, float]] = field(default_factory=list)
    failures: List[Tuple[int, str, str]] = field(default_factory=list)  # (subdiv, stage, message)

    def add(self, n_basis, e_inf, e_2):
        self.rows.append((int(n_basis), float(e_inf), float(e_2)))

    def to_csv(self) -> str:
        lines = ["N,e_inf,e_2"]
        lines += [f"{n},{ei:.5e},{e2:.5e}" for n, ei, e2 in self.rows]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Estimator
# ---------------------------------------------------------------------------
class MFSExteriorSolver(BaseEstimator):
    """Exterior Dirichlet solver for the Navier-Lame system by fundamental solutions.

    Parameters
    ----------
    lam, mu, omega : float
        Lame parameters and angular frequency.
    n_max : int
        Truncation order of the fundamental-solution series.
    ratio : float
        Homothety factor placing the sources ``y_j = ratio * x_j``; ignored
        when ``basis_points`` is passed to :meth:`fit`.
    separation : float
        Relative radius guard of the series.
    fallback_n_max : int or None
        Truncation order used for pairs failing the guard.  ``None`` makes such
        pairs an error.

    Attributes
    ----------
    basis_points_ : ndarray, shape (N, 3)
    coef_ : ndarray, shape (N, 3)
        Vector weights ``alpha_j``.
    residual_norm_ : float
    condition_number_ : float
    """

    def __init__(self, lam=-1.0, mu=2.0, omega=1.0, n_max=DEFAULT_N_MAX, ratio=0.95,
                 separation=DEFAULT_SEPARATION, fallback_n_max=None):
        self.lam = lam
        self.mu = mu
        self.omega = omega
        self.n_max = n_max
        self.ratio = ratio
        self.separation = separation
        self.fallback_n_max = fallback_n_max

    def _params(self):
        return ElasticParameters(self.lam, self.mu, self.omega)

    def fit(self, X, y, basis_points=None):
        """Collocate boundary values ``y`` (shape (M, 3)) at boundary points ``X``."""
        X = check_points(X, "X")
        y = check_field(y, X.shape[0], "y")
        params = self._params()
        if basis_points is None:
            basis = homothetic_basis(X, self.ratio).points
        else:
            basis = check_points(basis_points, "basis_points")
        system = assemble_system(X, basis, params, self.n_max, y, self.separation, self.fallback_n_max)
        sol = solve_dense(system)
        self.params_ = params
        self.basis_points_ = np.array(basis)
        self.coef_ = sol.alphas
        self.residual_norm_ = sol.residual_norm
        self.condition_number_ = sol.condition_number
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        """Approximate displacement at points on or outside the cube; shape (L, 3)."""
        check_is_fitted(self, "coef_")
        return evaluate_mfs(self.coef_.ravel(), self.basis_points_, self.params_, self.n_max, X,
                            self.separation, self.fallback_n_max)

    def score(self, X, y):
        """Negative root-mean-square error of :meth:`predict` against ``y``."""
        X = check_points(X, "X")
        return -error_metrics(check_field(y, X.shape[0]), self.predict(X))[1]
