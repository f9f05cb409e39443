"""Direction grids on the unit sphere with exact partition weights.

d=2 uses midpoint angles on a uniform grid; d=3 uses latitude-longitude
cells with sigma = dphi * (cos theta_lo - cos theta_hi), an exact sphere
partition evaluated at cell centers.  Even cell counts are required so the
grids are antipodally symmetric; several downstream consistency checks
(divergence-theorem vs radial volume) rely on that exact symmetry.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

__all__ = ["circle_quadrature", "latlong_quadrature", "sphere_quadrature"]


def circle_quadrature(n: int):
    """Midpoint angle grid: directions (n, 2) and weights summing to 2 pi."""
    if n < 4 or n % 2:
        raise InputError("circle grid needs an even count >= 4")
    theta = (np.arange(n) + 0.5) * (2 * np.pi / n)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return dirs, np.full(n, 2 * np.pi / n)


def latlong_quadrature(n_theta: int, n_phi: int):
    """Cell-center lat-long grid: directions (n_theta*n_phi, 3), exact cell areas."""
    if n_theta < 2 or n_phi < 4 or n_theta % 2 or n_phi % 2:
        raise InputError("lat-long grid needs even counts, n_theta >= 2, n_phi >= 4")
    edges = np.linspace(0.0, np.pi, n_theta + 1)
    theta = 0.5 * (edges[:-1] + edges[1:])
    band = (np.cos(edges[:-1]) - np.cos(edges[1:])) * (2 * np.pi / n_phi)
    phi = (np.arange(n_phi) + 0.5) * (2 * np.pi / n_phi)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    weights = np.repeat(band, n_phi)
    return dirs, weights


def sphere_quadrature(dim: int, resolution):
    """Dispatch on dimension; d=3 accepts an int n meaning an (n, 2n) grid."""
    if dim == 2:
        if not isinstance(resolution, (int, np.integer)):
            raise InputError("d=2 resolution must be an integer")
        return circle_quadrature(int(resolution))
    if dim == 3:
        if isinstance(resolution, (int, np.integer)):
            n_theta, n_phi = int(resolution), 2 * int(resolution)
        else:
            n_theta, n_phi = (int(v) for v in resolution)
        return latlong_quadrature(n_theta, n_phi)
    raise InputError(f"unsupported dimension {dim}")
