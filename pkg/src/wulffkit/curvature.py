"""Shape operators, anisotropic principal curvatures, and umbilicity fits.

The anisotropic principal curvatures at a boundary node are the eigenvalues
of A.B where A is the tangential Hessian of the integrand at the unit
normal and B the Euclidean shape operator.  A is symmetric positive
definite for elliptic integrands, so the eigenvalues are computed from the
symmetric matrix C.B.C with C the SPD square root of A, which keeps them
real by construction.  Dimensions are small (n = 1 or 2), so square roots
and eigenvalues use closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegeneratePointError, InputError, NonEllipticError
from .hypersurface import StarBody, SurfaceNode, SurfaceQuadrature, WulffBody
from .integrand import Integrand

__all__ = [
    "tangent_frames",
    "shape_operator",
    "f_principal_curvatures",
    "f_mean_curvature",
    "CurvatureTable",
    "curvature_table",
    "UmbilicityReport",
    "umbilicity_classify",
]


def tangent_frames(nu):
    """Orthonormal tangent frames (N, d, n) oriented so the frame + normal
    is right-handed (d=3: tau1 x tau2 = nu; d=2: tau = rot90(nu))."""
    nu = np.atleast_2d(np.asarray(nu, dtype=float))
    n_nodes, d = nu.shape
    if d == 2:
        tau = np.stack([-nu[:, 1], nu[:, 0]], axis=1)
        return tau[:, :, None]
    if d == 3:
        seed = np.zeros((n_nodes, 3))
        seed[np.arange(n_nodes), np.argmin(np.abs(nu), axis=1)] = 1.0
        t1 = seed - np.einsum("ni,ni->n", seed, nu)[:, None] * nu
        t1 /= np.linalg.norm(t1, axis=1)[:, None]
        t2 = np.cross(nu, t1)
        return np.stack([t1, t2], axis=2)
    raise InputError(f"unsupported dimension {d}")


def _sqrt_spd(a):
    """SPD square root of stacked (N, n, n) matrices, n in {1, 2}."""
    n = a.shape[-1]
    if n == 1:
        return np.sqrt(a)
    det = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    s = np.sqrt(det)
    tr = a[:, 0, 0] + a[:, 1, 1]
    c = a + s[:, None, None] * np.eye(2)[None]
    return c / np.sqrt(tr + 2 * s)[:, None, None]


def _eigvalsh_small(a):
    """Sorted eigenvalues of stacked symmetric (N, n, n), n in {1, 2}."""
    n = a.shape[-1]
    if n == 1:
        return a[:, :, 0]
    mid = 0.5 * (a[:, 0, 0] + a[:, 1, 1])
    off = 0.5 * (a[:, 0, 1] + a[:, 1, 0])
    disc = np.sqrt((0.5 * (a[:, 0, 0] - a[:, 1, 1])) ** 2 + off**2)
    return np.stack([mid - disc, mid + disc], axis=1)


def _min_eig_spd(a):
    return _eigvalsh_small(a)[:, 0]


def _shape_operators_bulk(body: StarBody, quad: SurfaceQuadrature, frames):
    """Euclidean shape operators (N, n, n) in the given tangent frames."""
    nu = quad.normals
    if isinstance(body, WulffBody):
        # Gauss map of a Wulff boundary inverts in closed form: x(u) = c + r
        # grad F(u), so Dnu restricted to the tangent is (r D2F(nu)|tan)^-1.
        h = body.dual.base.hess(nu)
        a_tan = np.einsum("nik,nij,njl->nkl", frames, h, frames)
        if np.any(_min_eig_spd(a_tan) <= 0):
            raise NonEllipticError("tangential Hessian not positive definite")
        b = np.linalg.inv(a_tan) / body.radius
        return 0.5 * (b + np.transpose(b, (0, 2, 1)))
    g = body.grad_phi(quad.points)
    gnorm = np.linalg.norm(g, axis=1)
    if np.any(gnorm < 1e-12):
        raise DegeneratePointError("vanishing implicit gradient at a node")
    h = body.hess_phi(quad.points) / gnorm[:, None, None]
    b = np.einsum("nik,nij,njl->nkl", frames, h, frames)
    return 0.5 * (b + np.transpose(b, (0, 2, 1)))


def _f_hessian_tangent(f: Integrand, nu, frames):
    h = f.hess(np.atleast_2d(nu))
    a = np.einsum("nik,nij,njl->nkl", frames, h, frames)
    return 0.5 * (a + np.transpose(a, (0, 2, 1)))


def shape_operator(body: StarBody, node: SurfaceNode):
    """Euclidean shape operator (n x n) at one quadrature node."""
    quad = _single_node_quad(node, body)
    frames = tangent_frames(quad.normals)
    return _shape_operators_bulk(body, quad, frames)[0]


def _single_node_quad(node: SurfaceNode, body: StarBody) -> SurfaceQuadrature:
    x = node.x[None, :]
    return SurfaceQuadrature(
        points=x,
        normals=node.nu[None, :],
        weights=np.array([node.w]),
        omega=node.omega[None, :],
        rho=np.linalg.norm(x - body.center, axis=1),
        sigma=np.array([0.0]),
        center=body.center,
    )


def f_principal_curvatures(f: Integrand, node: SurfaceNode, b):
    """Sorted eigenvalues of A.B via the symmetric product C.B.C, A = C.C."""
    frames = tangent_frames(node.nu[None, :])
    a = _f_hessian_tangent(f, node.nu[None, :], frames)
    return _kappa_from_ab(a, np.asarray(b, dtype=float)[None])[0]


def f_mean_curvature(f: Integrand, node: SurfaceNode, b) -> float:
    """Anisotropic mean curvature H = trace(A.B) at one node."""
    frames = tangent_frames(node.nu[None, :])
    a = _f_hessian_tangent(f, node.nu[None, :], frames)
    return float(np.einsum("nij,nji->n", a, np.asarray(b, dtype=float)[None])[0])


def _kappa_from_ab(a, b):
    if np.any(_min_eig_spd(a) <= 1e-14 * np.abs(a).max()):
        raise NonEllipticError("tangential Hessian not positive definite")
    c = _sqrt_spd(a)
    sym = np.einsum("nij,njk,nkl->nil", c, b, c)
    return _eigvalsh_small(sym)


@dataclass(frozen=True, eq=False)
class CurvatureTable:
    """Per-node curvature data over a whole quadrature.

    kappa holds the sorted anisotropic principal curvatures (N, n); H their
    sum, equal to trace(A.B) at every node.  The curvature vector field is
    -nu * H and divides by F(nu) for the unit-density mean curvature.
    """

    frames: np.ndarray
    shape_ops: np.ndarray
    f_hessians: np.ndarray
    kappa: np.ndarray
    mean: np.ndarray

    def mean_vector(self, normals):
        """Curvature vector -nu * H at every node."""
        return -normals * self.mean[:, None]

    def unit_density_mean_vector(self, normals, f: Integrand):
        """Curvature vector divided by the energy density F(nu)."""
        return self.mean_vector(normals) / f.value(normals)[:, None]


def curvature_table(body: StarBody, f: Integrand, quad: SurfaceQuadrature) -> CurvatureTable:
    """Vectorized curvature pass over all quadrature nodes."""
    frames = tangent_frames(quad.normals)
    b = _shape_operators_bulk(body, quad, frames)
    a = _f_hessian_tangent(f, quad.normals, frames)
    kappa = _kappa_from_ab(a, b)
    mean = np.einsum("nij,nji->n", a, b)
    return CurvatureTable(frames=frames, shape_ops=b, f_hessians=a, kappa=kappa, mean=mean)


def curvature_csv(table: CurvatureTable, quad: SurfaceQuadrature, path):
    d = quad.dim
    header = ",".join(
        [f"x{i+1}" for i in range(d)]
        + [f"kappaF{i+1}" for i in range(d - 1)]
        + ["H"]
    )
    data = np.hstack([quad.points, table.kappa, table.mean[:, None]])
    np.savetxt(path, data, delimiter=",", header=header, comments="")


@dataclass(frozen=True, eq=False)
class UmbilicityReport:
    """Outcome of the constant-curvature / Wulff-ball fit.

    verdict is one of "wulff", "umbilical-unresolved", "not-umbilical",
    "hyperplane-like".  When umbilical, the recovered ball has
    center = -c/lambda and radius = 1/|lambda| where c is the weighted mean
    of grad F(nu(x)) - lambda x over the nodes.
    """

    lam: float
    center: Optional[np.ndarray]
    radius: Optional[float]
    dispersion: Optional[float]
    verdict: str
    max_residual: float
    tol_umb: float
    tol_fit: float


def umbilicity_classify(
    body: StarBody,
    f: Integrand,
    quad: SurfaceQuadrature,
    tol_umb: Optional[float] = None,
    tol_fit: float = 1e-3,
) -> UmbilicityReport:
    """Classify a boundary as a Wulff ball via constant anisotropic curvature.

    lambda is the area-weighted mean of (sum kappa_i)/n; nodes must all have
    every curvature within tol_umb of lambda to count as umbilical, after
    which the affine relation grad F(nu(x)) = lambda x + c is fitted and its
    worst deviation reported as the dispersion.
    """
    table = curvature_table(body, f, quad)
    n = quad.dim - 1
    wsum = quad.weights.sum()
    lam = float((quad.weights * table.kappa.mean(axis=1)).sum() / wsum)
    residuals = np.abs(table.kappa - lam).max(axis=1)
    max_res = float(residuals.max())
    if tol_umb is None:
        tol_umb = 1e-3 * max(abs(lam), 1e-30)

    if max_res > tol_umb:
        return UmbilicityReport(
            lam=lam, center=None, radius=None, dispersion=None,
            verdict="not-umbilical", max_residual=max_res,
            tol_umb=tol_umb, tol_fit=tol_fit,
        )
    if abs(lam) < 1e-10:
        return UmbilicityReport(
            lam=lam, center=None, radius=None, dispersion=None,
            verdict="hyperplane-like", max_residual=max_res,
            tol_umb=tol_umb, tol_fit=tol_fit,
        )
    eta = f.grad(quad.normals)
    affine = eta - lam * quad.points
    c = (quad.weights[:, None] * affine).sum(axis=0) / wsum
    dispersion = float(np.linalg.norm(affine - c, axis=1).max())
    radius = 1.0 / abs(lam)
    verdict = "wulff" if dispersion <= tol_fit * radius else "umbilical-unresolved"
    return UmbilicityReport(
        lam=lam, center=-c / lam, radius=radius, dispersion=dispersion,
        verdict=verdict, max_residual=max_res, tol_umb=tol_umb, tol_fit=tol_fit,
    )
