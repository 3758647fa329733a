import numpy as np
import pytest
import scipy.linalg as sla

from anosovlab.contour import Contour, ContourQuadrature, semigroup_contour_check
from anosovlab.spectral import build_advection_diffusion_generator


def test_contour_validation():
    with pytest.raises(ValueError):
        Contour(-0.2, 0.1)
    with pytest.raises(ValueError):
        Contour(0.2, 0.0)


def test_contour_corner_consistency():
    c = Contour(0.3, 0.25)
    assert abs(c.height - (1 + 0.25 ** -2 + 0.3)) < 1e-15
    lam, _ = c.vertical_nodes(33)
    assert np.allclose(lam.real, 0.3)
    assert np.abs(lam.imag).max() <= c.height + 1e-12
    for upper in (True, False):
        lam_r, _ = c.ray_nodes(5.0, 17, upper)
        # every ray node satisfies |Im| = 1 + nu^-2 + Re
        assert np.allclose(np.abs(lam_r.imag), 1 + 0.25 ** -2 + lam_r.real,
                           atol=1e-12)
        assert lam_r.real.min() >= 0.3 - 1e-12


def test_diagonal_two_by_two():
    M = np.diag([1.0, 2.0])
    dev, diag = semigroup_contour_check(M, 1.5, Contour(0.4, 0.3),
                                        ContourQuadrature(),
                                        projector=np.zeros((2, 2)))
    assert dev <= 1e-8
    assert diag["self_deviation"] <= 1e-8


def test_random_matrix_with_kernel():
    rng = np.random.default_rng(7)
    B = rng.normal(size=(8, 8))
    M = B @ B.T / 8 + 0.5 * np.eye(8)
    v = np.ones(8) / np.sqrt(8)
    P = np.eye(8) - np.outer(v, v)
    M = P @ M @ P
    dev, diag = semigroup_contour_check(M, 1.0, Contour(0.25, 0.2),
                                        ContourQuadrature(),
                                        projector=np.outer(v, v))
    assert dev <= 1e-8
    ref = sla.expm(-1.0 * M)
    assert np.abs(diag["result"] - ref).max() <= 1e-8


def test_generator_projector_automatic():
    gen = build_advection_diffusion_generator([((0, 1), (1.0, 0.0), "sin")],
                                              0.05, 8)
    dev, diag = semigroup_contour_check(gen, 2.0, Contour(0.15, 0.05),
                                        ContourQuadrature())
    assert dev <= 1e-8
    assert diag["fast_path"]
    assert diag["max_segment_resolvent"] < 1e12


def test_defective_matrix_takes_solver_path():
    # a Jordan block defeats the eigendecomposition shortcut; the quadrature
    # must fall back to direct resolvent solves and still converge
    J = np.array([[1.0, 1.0], [0.0, 1.0]])
    dev, diag = semigroup_contour_check(J, 1.0, Contour(0.3, 0.4),
                                        ContourQuadrature(),
                                        projector=np.zeros((2, 2)))
    assert not diag["fast_path"]
    assert dev <= 1e-8


def test_eigenvalue_left_of_contour_rejected():
    M = np.diag([0.1, 2.0])
    with pytest.raises(ValueError):
        semigroup_contour_check(M, 1.0, Contour(0.5, 0.3),
                                ContourQuadrature(),
                                projector=np.zeros((2, 2)))


def test_resolvent_norms_reported():
    M = np.diag([1.0, 3.0, 4.0])
    dev, diag = semigroup_contour_check(M, 1.0, Contour(0.5, 0.3),
                                        ContourQuadrature(),
                                        projector=np.zeros((3, 3)))
    norms = np.asarray(diag["resolvent_norms"])
    assert norms.size > 0 and np.all(np.isfinite(norms))
    # closest approach of the contour to the spectrum is the vertical line
    # at distance 0.5 from the eigenvalue 1
    assert abs(norms.max() - 2.0) / 2.0 < 0.05


def test_tolerance_drives_refinement():
    M = np.diag([1.0, 2.0])
    loose = semigroup_contour_check(M, 1.0, Contour(0.4, 0.3),
                                    ContourQuadrature(tol=1e-4),
                                    projector=np.zeros((2, 2)))[1]
    tight = semigroup_contour_check(M, 1.0, Contour(0.4, 0.3),
                                    ContourQuadrature(tol=1e-10),
                                    projector=np.zeros((2, 2)))[1]
    assert tight["nodes"] > loose["nodes"]
