import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from elastomfs import MFSExteriorSolver
from elastomfs.addition_theorem import ElasticParameters
from elastomfs.exceptions import DomainError
from elastomfs.mfs import cube_boundary_lattice, evaluation_grid, point_source_data, spherical_point

MATERIAL = ElasticParameters(-1.0, 2.0, 1.0)


@pytest.fixture(scope="module")
def data():
    X = cube_boundary_lattice(3).points
    source = point_source_data(spherical_point(0.9, 1.0, 1.0), [1.0, 2.0, -1.0], MATERIAL)
    return X, source


def test_params_roundtrip():
    est = MFSExteriorSolver(lam=-1.5, n_max=8, fallback_n_max=16)
    params = est.get_params()
    assert params["lam"] == -1.5 and params["n_max"] == 8 and params["fallback_n_max"] == 16
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(ratio=0.8)
    assert est.ratio == 0.8


def test_fit_predict(data):
    X, source = data
    est = MFSExteriorSolver().fit(X, source(X))
    assert est.coef_.shape == (56, 3)
    assert est.basis_points_.shape == (56, 3)
    assert est.n_features_in_ == 3
    np.testing.assert_allclose(est.basis_points_, 0.95 * X)
    grid = evaluation_grid(5.0, 5)
    u = est.predict(grid)
    assert u.shape == (len(grid), 3)
    assert -est.score(grid, source(grid)) < 5e-3


def test_fit_with_explicit_basis(data):
    X, source = data
    basis = 0.6 * X
    est = MFSExteriorSolver().fit(X, source(X), basis_points=basis)
    np.testing.assert_allclose(est.basis_points_, basis)
    np.testing.assert_allclose(est.predict(X[:3]), source(X[:3]), rtol=1e-8)


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        MFSExteriorSolver().predict(np.array([[2.0, 0.0, 0.0]]))


def test_input_validation(data):
    X, source = data
    with pytest.raises(DomainError):
        MFSExteriorSolver().fit(X[:, :2], source(X))
    with pytest.raises(DomainError):
        MFSExteriorSolver().fit(X, source(X)[:10])
    with pytest.raises(DomainError):
        MFSExteriorSolver(mu=-1.0).fit(X, source(X))
    with pytest.raises(DomainError):
        MFSExteriorSolver(ratio=1.0).fit(X, source(X))
