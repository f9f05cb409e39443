import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from wulffkit import (
    DomainError,
    EuclideanNorm,
    InputError,
    QuadraticNorm,
    WeightedSum,
    estimate_ellipticity,
    evaluate,
    gradient,
    hessian,
)

from oracles import fd_jacobian

E2 = EuclideanNorm(2)
Q2 = QuadraticNorm(np.diag([4.0, 1.0]))
W2 = WeightedSum(((0.5, E2), (1.0, Q2)))
FAMILIES = [E2, Q2, W2, EuclideanNorm(3), QuadraticNorm(np.diag([4.0, 1.0, 1.0]))]


def random_points(f, n, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, f.dim)) * rng.uniform(0.2, 3.0, size=(n, 1))
    return x[np.linalg.norm(x, axis=1) > 1e-3]


def test_evaluate_examples():
    assert evaluate(E2, [3.0, 4.0]) == pytest.approx(5.0, abs=1e-15)
    assert evaluate(Q2, [1.0, 0.0]) == pytest.approx(2.0, abs=1e-15)
    assert evaluate(E2, [0.0, 0.0]) == 0.0


def test_evaluate_rejects_nonfinite():
    with pytest.raises(InputError):
        evaluate(E2, [np.nan, 1.0])
    with pytest.raises(InputError):
        evaluate(Q2, [np.inf, 0.0])


@pytest.mark.parametrize("f", FAMILIES)
def test_homogeneity(f):
    rng = np.random.default_rng(1)
    x = random_points(f, 1000, seed=1)
    lam = rng.uniform(-4.0, 4.0, size=len(x))
    lam[np.abs(lam) < 1e-3] = 1.0
    fx = f.value(x)
    flx = f.value(lam[:, None] * x)
    assert np.all(np.abs(flx - np.abs(lam) * fx) <= 1e-12 * np.abs(lam) * fx)


@given(hst.floats(-5, 5), hst.floats(-5, 5), hst.floats(-8, 8))
@settings(max_examples=200, deadline=None)
def test_homogeneity_hypothesis(x1, x2, lam):
    x = np.array([x1, x2])
    if np.linalg.norm(x) < 1e-3:
        return
    assert evaluate(Q2, lam * x) == pytest.approx(abs(lam) * evaluate(Q2, x), rel=1e-12, abs=1e-12)


def test_gradient_examples():
    assert gradient(E2, [3.0, 4.0]) == pytest.approx([0.6, 0.8], abs=1e-15)
    assert gradient(Q2, [1.0, 0.0]) == pytest.approx([2.0, 0.0], abs=1e-15)


@pytest.mark.parametrize("f", FAMILIES)
def test_euler_relation(f):
    x = random_points(f, 1000, seed=2)
    fx = f.value(x)
    dots = np.einsum("ni,ni->n", x, f.grad(x))
    assert np.all(np.abs(dots - fx) <= 1e-12 * fx)


def test_gradient_at_origin_is_domain_error():
    with pytest.raises(DomainError):
        gradient(E2, [0.0, 0.0])
    with pytest.raises(DomainError):
        hessian(Q2, [0.0, 0.0])


def test_hessian_examples():
    assert hessian(E2, [1.0, 0.0]) == pytest.approx(np.array([[0.0, 0.0], [0.0, 1.0]]), abs=1e-15)
    assert hessian(Q2, [1.0, 0.0]) == pytest.approx(np.array([[0.0, 0.0], [0.0, 0.5]]), abs=1e-15)


@pytest.mark.parametrize("f", [Q2, W2])
def test_hessian_matches_finite_difference_gradient(f):
    # closed form cross-checked against central differences with step 1e-5
    x = np.array([0.7, -1.3])[: f.dim]
    fd = fd_jacobian(lambda y: f.grad(y), x, h=1e-5)
    assert np.abs(hessian(f, x) - 0.5 * (fd + fd.T)).max() < 1e-9


@pytest.mark.parametrize("f", FAMILIES)
def test_hessian_kernel_and_scaling(f):
    x = random_points(f, 200, seed=3)
    h = f.hess(x)
    kernel = np.einsum("nij,nj->ni", h, x)
    bound = 1e-10 * np.linalg.norm(h, axis=(1, 2)) * np.linalg.norm(x, axis=1)
    assert np.all(np.linalg.norm(kernel, axis=1) <= bound + 1e-15)
    lam = 2.5
    assert np.allclose(f.hess(lam * x), h / lam, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("f", FAMILIES)
def test_gradient_hessian_fd_order(f):
    rng = np.random.default_rng(4)
    x = rng.standard_normal(f.dim) * 1.7
    errs = []
    for h in (1e-3, 1e-4):
        fd = fd_jacobian(lambda y: f.grad(y), x, h=h)
        errs.append(np.abs(fd - f.hess(x)).max())
    order = np.log10(errs[0] / errs[1])
    assert order >= 1.9


def test_ellipticity_euclidean():
    rep = estimate_ellipticity(E2, 2000, seed=0)
    assert rep.gamma_estimate == pytest.approx(1.0, abs=1e-9)
    assert rep.cf_estimate == pytest.approx(1.0, abs=1e-9)
    assert rep.elliptic


def test_ellipticity_quadratic_regression():
    # brute-force oracle: gamma(theta) = 4 / (1 + 3 cos^2)^{3/2}, min 0.5 at
    # the long axis; the sampled minimum converges to it from above
    rep = estimate_ellipticity(Q2, 10_000, seed=1)
    assert rep.gamma_estimate > 0
    assert 0.5 - 1e-12 <= rep.gamma_estimate <= 0.5 + 5e-4
    # C(F) = max(1/gamma, sup F / inf F = 2, max |D2F| = 4)
    assert rep.cf_estimate == pytest.approx(4.0, rel=1e-3)
    assert rep.cf_estimate >= 1.0


def test_ellipticity_brute_force_oracle():
    rng = np.random.default_rng(5)
    u = rng.standard_normal((10_000, 2))
    u /= np.linalg.norm(u, axis=1)[:, None]
    t = np.stack([-u[:, 1], u[:, 0]], axis=1)
    brute = np.einsum("ni,nij,nj->n", t, Q2.hess(u), t).min()
    rep = estimate_ellipticity(Q2, 10_000, seed=2)
    assert rep.gamma_estimate == pytest.approx(brute, rel=1e-3)


def test_ellipticity_needs_samples():
    with pytest.raises(InputError):
        estimate_ellipticity(E2, 50)


def test_weighted_sum_validation():
    with pytest.raises(InputError):
        WeightedSum(((-1.0, E2),))
    with pytest.raises(InputError):
        WeightedSum(())
    with pytest.raises(InputError):
        WeightedSum(((1.0, E2), (1.0, EuclideanNorm(3))))


def test_quadratic_validation():
    with pytest.raises(InputError):
        QuadraticNorm(np.array([[1.0, 2.0], [0.0, 1.0]]))  # not symmetric
    with pytest.raises(InputError):
        QuadraticNorm(np.diag([1.0, -1.0]))  # not positive definite
    with pytest.raises(InputError):
        EuclideanNorm(1)
