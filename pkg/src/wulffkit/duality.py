"""Conjugate norms, their gradients, and exact Wulff-shape boundary samples.

The conjugate norm of F is F*(w) = sup { w.u : F(u) <= 1 }; its balls are
the Wulff shapes of F.  For the Euclidean and quadratic families closed
forms are used (Euclidean is self-dual, quadratic M dualizes to M^-1);
for weighted sums the supremum is computed by a damped Newton iteration
on the strictly convex problem

    minimize  F(v)^2 / 2 - w.v   over v in R^d,

whose unique minimizer v* satisfies F(v*) = F*(w) and v*/F(v*) = grad F*(w).
This is the gradient-alignment fixed point F(v) grad F(v) = w solved with
second-order steps; a golden-section search on the unit circle provides a
d=2 fallback.  Closed forms are preferred in production; the iterative
path is cross-checked against them in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, InputError, SolverError
from .integrand import EuclideanNorm, Integrand, QuadraticNorm

__all__ = ["DualNorm", "WulffSample", "conjugate", "grad_conjugate", "wulff_sample"]

_TABLE_SIZE = 8192


@dataclass
class DualNorm:
    """Conjugate-norm evaluator for a base integrand.

    ``tolerance`` is relative; iterates stop once |F(v) grad F(v) - w|
    drops below tolerance * |w|.  Evaluations are pure; the lazily built
    direction table is an idempotent cache, so concurrent use is safe.
    """

    base: Integrand
    max_iterations: int = 60
    tolerance: float = 1e-10
    _table: Optional[tuple] = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def has_closed_form(self) -> bool:
        return isinstance(self.base, (EuclideanNorm, QuadraticNorm))

    # -- exact evaluation ---------------------------------------------------

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if np.all(w == 0.0):
            return 0.0
        return float(self.batch_value(w[None, :])[0])

    def grad(self, w):
        w = np.asarray(w, dtype=float)
        if np.all(w == 0.0):
            raise DomainError("conjugate norm is not differentiable at the origin")
        return self.batch_grad(w[None, :])[0]

    def batch_value(self, W):
        W = np.asarray(W, dtype=float)
        if isinstance(self.base, EuclideanNorm):
            return np.linalg.norm(W, axis=1)
        if isinstance(self.base, QuadraticNorm):
            return np.sqrt(np.einsum("ni,ij,nj->n", W, self.base.inverse, W))
        v = self._polar_minimize(W)
        return self.base.value(v)

    def batch_grad(self, W):
        W = np.asarray(W, dtype=float)
        if isinstance(self.base, EuclideanNorm):
            return W / np.linalg.norm(W, axis=1)[:, None]
        if isinstance(self.base, QuadraticNorm):
            mw = W @ self.base.inverse
            f = np.sqrt(np.einsum("ni,ni->n", W, mw))
            return mw / f[:, None]
        v = self._polar_minimize(W)
        return v / self.base.value(v)[:, None]

    def batch_value_fast(self, W):
        """Vectorized F* for bulk grids; interpolates a direction table in d=2.

        Table interpolation error is O((2 pi / table size)^2), far below the
        grid tolerances of the distance module.  Closed-form families and
        dimensions >= 3 evaluate exactly.
        """
        W = np.asarray(W, dtype=float)
        if self.has_closed_form or self.dim != 2:
            return self.batch_value(W)
        angles, vals = self._direction_table()
        theta = np.mod(np.arctan2(W[:, 1], W[:, 0]), 2 * np.pi)
        per_dir = np.interp(theta, angles, vals, period=2 * np.pi)
        return np.linalg.norm(W, axis=1) * per_dir

    def grad_bound(self, samples: int = 512) -> float:
        """max |grad F*| over sampled directions (a Lipschitz bound for F*)."""
        u = _unit_directions(self.dim, samples)
        return float(np.linalg.norm(self.batch_grad(u), axis=1).max())

    # -- iterative path -----------------------------------------------------

    def _direction_table(self):
        if self._table is None:
            angles = np.linspace(0.0, 2 * np.pi, _TABLE_SIZE, endpoint=False)
            dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
            self._table = (angles, self.batch_value(dirs))
        return self._table

    def _polar_minimize(self, W):
        """Newton minimization of F(v)^2/2 - w.v, one row per input vector."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if np.any(np.linalg.norm(W, axis=1) == 0.0):
            raise InputError("conjugate evaluation requires nonzero vectors")
        f = self.base
        nw = np.linalg.norm(W, axis=1)
        what = W / nw[:, None]
        scale = f.value(what) * np.linalg.norm(f.grad(what), axis=1)
        v = what * (nw / scale)[:, None]

        active = np.ones(len(W), dtype=bool)
        for _ in range(self.max_iterations):
            fv = f.value(v)
            g = f.grad(v)
            res = fv[:, None] * g - W
            gap = np.linalg.norm(res, axis=1) / nw
            active = gap > self.tolerance
            if not active.any():
                return v
            idx = np.nonzero(active)[0]
            va, fa, ga = v[idx], fv[idx], g[idx]
            hess = fa[:, None, None] * f.hess(va) + ga[:, :, None] * ga[:, None, :]
            step = np.linalg.solve(hess, -res[idx][..., None])[..., 0]
            psi0 = 0.5 * fa**2 - np.einsum("ni,ni->n", W[idx], va)
            slope = np.einsum("ni,ni->n", res[idx], step)
            alpha = np.ones(len(idx))
            accepted = np.zeros(len(idx), dtype=bool)
            vnew = va.copy()
            for _ in range(40):
                trial = va + alpha[:, None] * step
                ok = np.linalg.norm(trial, axis=1) > 1e-300
                psi = np.full(len(idx), np.inf)
                psi[ok] = 0.5 * f.value(trial[ok]) ** 2 - np.einsum(
                    "ni,ni->n", W[idx][ok], trial[ok]
                )
                # cushion absorbs rounding of psi near the optimum, where the
                # true decrease falls below eps * |psi|
                good = (~accepted) & (
                    psi <= psi0 + 1e-4 * alpha * slope + 1e-15 * (1.0 + np.abs(psi0))
                )
                vnew[good] = trial[good]
                accepted |= good
                if accepted.all():
                    break
                alpha[~accepted] *= 0.5
            vnew[~accepted] = va[~accepted] + alpha[~accepted, None] * step[~accepted]
            v[idx] = vnew

        fv = f.value(v)
        res = fv[:, None] * f.grad(v) - W
        gap = np.linalg.norm(res, axis=1) / nw
        bad = gap > self.tolerance
        if self.dim == 2 and bad.any():
            # golden section localizes the flat maximum only to sqrt(eps) in
            # angle; a few undamped Newton steps polish it from inside the basin
            vb = self._golden_fallback(W[bad])
            for _ in range(4):
                fb, gb = f.value(vb), f.grad(vb)
                rb = fb[:, None] * gb - W[bad]
                hb = fb[:, None, None] * f.hess(vb) + gb[:, :, None] * gb[:, None, :]
                vb = vb + np.linalg.solve(hb, -rb[..., None])[..., 0]
            v[bad] = vb
            fv = f.value(v)
            res = fv[:, None] * f.grad(v) - W
            gap = np.linalg.norm(res, axis=1) / nw
            bad = gap > max(self.tolerance, 1e-9)
        if bad.any():
            i = int(np.argmax(gap))
            raise SolverError(
                f"conjugate solve did not converge within {self.max_iterations} "
                f"iterations (relative gap {gap[i]:.3e})",
                best=float(fv[i]),
                gap=float(gap[i]),
            )
        return v

    def _golden_fallback(self, W):
        """Maximize w.u over the F-unit circle by grid bracketing + golden section."""
        f = self.base
        thetas = np.linspace(0.0, 2 * np.pi, 720, endpoint=False)
        dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
        units = dirs / f.value(dirs)[:, None]
        out = np.empty_like(W)
        invphi = (np.sqrt(5.0) - 1.0) / 2.0
        for k, w in enumerate(W):
            best = int(np.argmax(units @ w))
            a = thetas[best] - 2 * np.pi / 720
            b = thetas[best] + 2 * np.pi / 720

            def s(theta, w=w):
                u = np.array([np.cos(theta), np.sin(theta)])
                return float(w @ (u / f.value(u)))

            c, d = b - invphi * (b - a), a + invphi * (b - a)
            fc, fd = s(c), s(d)
            while b - a > 1e-14:
                if fc < fd:
                    a, c, fc = c, d, fd
                    d = a + invphi * (b - a)
                    fd = s(d)
                else:
                    b, d, fd = d, c, fc
                    c = b - invphi * (b - a)
                    fc = s(c)
            theta = 0.5 * (a + b)
            u = np.array([np.cos(theta), np.sin(theta)])
            u /= f.value(u)
            # scale so that F(v) grad F(v) = w holds at the maximizer
            out[k] = u * (w @ u)
        return out


def conjugate(dual: DualNorm, w) -> float:
    """F*(w) = sup { w.u : F(u) <= 1 }."""
    return dual.value(w)


def grad_conjugate(dual: DualNorm, w):
    """grad F*(w); the maximizer of w.u over {F = 1}, extended 0-homogeneously."""
    return dual.grad(w)


@dataclass(frozen=True, eq=False)
class WulffSample:
    """Boundary sample of the F*-ball around ``center`` with exact unit normals.

    Node k lies at center + radius * grad F(nu_k) where nu_k is the unit
    outward Euclidean normal of the boundary at that node; the Gauss map of
    a Wulff boundary is inverted in closed form this way.
    """

    center: np.ndarray
    radius: float
    points: np.ndarray
    normals: np.ndarray
    resolution: int

    def to_csv(self, path):
        data = np.hstack([self.points, self.normals])
        header = ",".join(
            [f"x{i+1}" for i in range(self.points.shape[1])]
            + [f"nu{i+1}" for i in range(self.points.shape[1])]
        )
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def _unit_directions(dim, resolution):
    """Node grid on the Euclidean sphere: uniform angles (d=2) or
    latitude-longitude rows with the poles collapsed to single nodes (d=3)."""
    if dim == 2:
        theta = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if dim == 3:
        n_lat = max(2, int(round(np.sqrt(resolution / 2.0))))
        n_long = 2 * n_lat
        theta = np.linspace(0.0, np.pi, n_lat + 1)[1:-1]
        phi = np.linspace(0.0, 2 * np.pi, n_long, endpoint=False)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        dirs = np.stack(
            [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
        ).reshape(-1, 3)
        poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        return np.concatenate([poles, dirs], axis=0)
    raise InputError(f"unsupported dimension {dim}")


def wulff_sample(dual: DualNorm, center, r: float, resolution: int) -> WulffSample:
    """Sample the boundary of the F*-ball B(center, r) with exact normals."""
    if r <= 0:
        raise InputError("Wulff radius must be positive")
    center = np.asarray(center, dtype=float)
    if center.shape != (dual.dim,):
        raise InputError(f"center must be a {dual.dim}-vector")
    min_res = 16 if dual.dim == 2 else 256
    if resolution < min_res:
        raise InputError(f"resolution must be >= {min_res} in dimension {dual.dim}")
    nu = _unit_directions(dual.dim, resolution)
    points = center[None, :] + r * dual.base.grad(nu)
    return WulffSample(
        center=center, radius=float(r), points=points, normals=nu, resolution=len(nu)
    )
