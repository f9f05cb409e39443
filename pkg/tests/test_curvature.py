import numpy as np
import pytest

from wulffkit import (
    DualNorm,
    Ellipsoid,
    EuclideanNorm,
    NonEllipticError,
    QuadraticNorm,
    WeightedSum,
    WulffBody,
    curvature_table,
    f_mean_curvature,
    f_principal_curvatures,
    sample_surface,
    shape_operator,
    umbilicity_classify,
)

from oracles import eig_product, ellipse_curvature

E2 = EuclideanNorm(2)
E3 = EuclideanNorm(3)
Q2 = QuadraticNorm(np.diag([4.0, 1.0]))
DQ = DualNorm(Q2)
ELLIPSE = Ellipsoid(np.diag([0.25, 1.0]), np.zeros(2))


def node_nearest(quad, target):
    return quad.node(int(np.argmin(np.linalg.norm(quad.points - target, axis=1))))


def test_shape_operator_circle():
    circle = Ellipsoid(np.eye(2) / 4.0, np.zeros(2))  # radius 2
    q = sample_surface(circle, 256)
    b = shape_operator(circle, q.node(7))
    assert b == pytest.approx(np.array([[0.5]]), abs=1e-12)


def test_shape_operator_ellipse_vertices():
    q = sample_surface(ELLIPSE, 8192)
    node = node_nearest(q, [2.0, 0.0])
    b = shape_operator(ELLIPSE, node)
    t = np.arctan2(node.x[1], node.x[0] / 2.0)
    assert b[0, 0] == pytest.approx(ellipse_curvature(2.0, 1.0, t), rel=1e-6)
    node = node_nearest(q, [0.0, 1.0])
    b = shape_operator(ELLIPSE, node)
    assert b[0, 0] == pytest.approx(0.25, rel=1e-6)


def test_shape_operator_sphere():
    ball = Ellipsoid(np.eye(3) / 4.0, np.zeros(3))  # radius 2
    q = sample_surface(ball, (32, 64))
    b = shape_operator(ball, q.node(11))
    assert b == pytest.approx(0.5 * np.eye(2), abs=1e-12)


def test_symmetric_against_general_eigensolver():
    # small-instance oracle: random SPD A and symmetric B, eigenvalues of the
    # symmetrized product C.B.C must match the nonsymmetric solver on A.B
    from wulffkit.curvature import _kappa_from_ab, _sqrt_spd

    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rng.standard_normal((2, 2))
        a = m @ m.T + 0.05 * np.eye(2)
        b = rng.standard_normal((2, 2))
        b = 0.5 * (b + b.T)
        ours = _kappa_from_ab(a[None], b[None])[0]
        assert ours == pytest.approx(eig_product(a, b), abs=1e-10)
        c = _sqrt_spd(a[None])[0]
        assert c @ c == pytest.approx(a, abs=1e-12)


def test_wulff_constant_curvature_d2():
    for r in (0.5, 1.0, 3.0):
        body = WulffBody(DQ, np.zeros(2), r)
        q = sample_surface(body, 2048)
        table = curvature_table(body, Q2, q)
        assert np.abs(table.kappa - 1.0 / r).max() < 1e-4
        assert np.abs(table.mean - 1.0 / r).max() < 1e-4


def test_wulff_constant_curvature_d3():
    for f in (E3, QuadraticNorm(np.diag([4.0, 1.0, 1.0]))):
        body = WulffBody(DualNorm(f), np.zeros(3), 2.0)
        q = sample_surface(body, (64, 128))
        table = curvature_table(body, f, q)
        assert np.abs(table.kappa - 0.5).max() < 1e-3
        assert np.abs(table.mean - 2.0 * 0.5).max() < 1e-3


def test_principal_curvature_node_api():
    body = WulffBody(DQ, np.zeros(2), 2.0)
    q = sample_surface(body, 256)
    node = q.node(3)
    b = shape_operator(body, node)
    kappa = f_principal_curvatures(Q2, node, b)
    assert kappa == pytest.approx([0.5], abs=1e-10)
    assert f_mean_curvature(Q2, node, b) == pytest.approx(0.5, abs=1e-10)


def test_euclidean_curvatures_of_ellipse():
    q = sample_surface(ELLIPSE, 4096)
    table = curvature_table(ELLIPSE, E2, q)
    assert table.kappa.min() == pytest.approx(0.25, rel=1e-4)
    assert table.kappa.max() == pytest.approx(2.0, rel=1e-4)
    # H equals the Euclidean curvature when A is the tangent identity
    node = node_nearest(q, [2.0, 0.0])
    b = shape_operator(ELLIPSE, node)
    assert f_mean_curvature(E2, node, b) == pytest.approx(b[0, 0], rel=1e-12)


def test_trace_equals_eigenvalue_sum():
    for body, f, res in (
        (ELLIPSE, Q2, 2048),
        (Ellipsoid(np.diag([0.25, 1.0, 1.0]), np.zeros(3)), E3, (32, 64)),
    ):
        q = sample_surface(body, res)
        table = curvature_table(body, f, q)
        err = np.abs(table.kappa.sum(axis=1) - table.mean)
        assert np.all(err <= 1e-8 * (1.0 + np.abs(table.mean)))


def test_eta_field_on_conjugate_sphere():
    q = sample_surface(ELLIPSE, 1024)
    eta = Q2.grad(q.normals)
    assert np.abs(DQ.batch_value(eta) - 1.0).max() < 1e-8


def test_umbilicity_recovers_offset_wulff():
    body = WulffBody(DQ, np.array([1.0, 2.0]), 1.5)
    rep = umbilicity_classify(body, Q2, sample_surface(body, 2048))
    assert rep.verdict == "wulff"
    assert rep.center == pytest.approx([1.0, 2.0], abs=1e-4)
    assert rep.radius == pytest.approx(1.5, abs=1e-4)


def test_umbilicity_euclidean_sphere():
    ball = Ellipsoid(np.eye(2) / 4.0, np.zeros(2))
    rep = umbilicity_classify(ball, E2, sample_surface(ball, 2048))
    assert rep.verdict == "wulff"
    assert rep.center == pytest.approx([0.0, 0.0], abs=1e-10)
    assert rep.radius == pytest.approx(2.0, abs=1e-10)


def test_umbilicity_rejects_ellipse():
    rep = umbilicity_classify(ELLIPSE, E2, sample_surface(ELLIPSE, 2048))
    assert rep.verdict == "not-umbilical"
    assert rep.center is None


def test_umbilicity_hyperplane_like_for_vanishing_curvature():
    # a nearly flat boundary: umbilical with |lambda| below the resolvable floor
    huge = Ellipsoid(np.eye(2) / 1e24, np.zeros(2))
    rep = umbilicity_classify(huge, E2, sample_surface(huge, 256))
    assert rep.verdict == "hyperplane-like"
    assert rep.radius is None


def test_weighted_sum_wulff_curvature():
    w = WeightedSum(((0.5, E2), (1.0, Q2)))
    body = WulffBody(DualNorm(w), np.zeros(2), 1.25)
    q = sample_surface(body, 1024)
    table = curvature_table(body, w, q)
    assert np.abs(table.kappa - 0.8).max() < 1e-8


def test_non_elliptic_rejected():
    from wulffkit.curvature import _kappa_from_ab

    with pytest.raises(NonEllipticError):
        _kappa_from_ab(np.array([[[0.0]]]), np.array([[[1.0]]]))


def test_curvature_vectors():
    body = WulffBody(DQ, np.zeros(2), 2.0)
    q = sample_surface(body, 256)
    table = curvature_table(body, Q2, q)
    hbar = table.mean_vector(q.normals)
    assert np.allclose(hbar, -0.5 * q.normals, atol=1e-12)
    hf = table.unit_density_mean_vector(q.normals, Q2)
    assert np.allclose(hf * Q2.value(q.normals)[:, None], hbar, atol=1e-14)


def test_bulk_matches_per_node():
    q = sample_surface(ELLIPSE, 256)
    table = curvature_table(ELLIPSE, Q2, q)
    for i in (0, 17, 100):
        node = q.node(i)
        b = shape_operator(ELLIPSE, node)
        assert b == pytest.approx(table.shape_ops[i], abs=1e-12)
        assert f_principal_curvatures(Q2, node, b) == pytest.approx(
            table.kappa[i], abs=1e-12
        )
