"""Scene files: JSON descriptions of an integrand, bodies, grid, and suites."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .distance import GridSpec
from .duality import DualNorm
from .errors import SceneError
from .hypersurface import Ellipsoid, StarBody, Superellipse, WulffBody
from .integrand import EuclideanNorm, Integrand, QuadraticNorm, WeightedSum

__all__ = ["Scene", "load_scene", "parse_scene", "DEFAULT_TOLERANCES"]

SUITE_NAMES = ("dual", "wulff", "curv", "hk", "mr", "steiner", "reach", "var")

DEFAULT_TOLERANCES = {
    "tol_eq": 1e-3,
    "tol_fit": 1e-3,
    "tol_umb": None,
    "tol_r": 0.02,
    "eps_cluster": 1e-3,
    "tol_unique": None,
    "steiner_residual": 1e-2,
}

DEFAULT_STEINER = {"lo_frac": 0.05, "hi_frac": 0.9, "samples": 40}


@dataclass(frozen=True, eq=False)
class Scene:
    integrand: Integrand
    dual: DualNorm
    bodies: tuple            # of (id, StarBody)
    resolution: object
    grid: Optional[GridSpec]
    seed: int
    suites: tuple
    tolerances: dict
    hk_c: Optional[float]
    steiner: dict

    @property
    def dim(self) -> int:
        return self.integrand.dim

    def body_map(self):
        return dict(self.bodies)


def _require(mapping, key, where):
    if key not in mapping:
        raise SceneError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _parse_integrand(spec, where="integrand") -> Integrand:
    if not isinstance(spec, dict):
        raise SceneError(f"{where}: expected an object")
    family = _require(spec, "family", where)
    try:
        if family == "euclidean":
            return EuclideanNorm(int(_require(spec, "dimension", where)))
        if family == "quadratic":
            return QuadraticNorm(np.asarray(_require(spec, "matrix", where), dtype=float))
        if family == "weighted-sum":
            terms = _require(spec, "terms", where)
            parsed = []
            for k, term in enumerate(terms):
                w = float(_require(term, "weight", f"{where}.terms[{k}]"))
                inner = _parse_integrand(
                    _require(term, "integrand", f"{where}.terms[{k}]"),
                    f"{where}.terms[{k}].integrand",
                )
                parsed.append((w, inner))
            return WeightedSum(tuple(parsed))
    except SceneError:
        raise
    except Exception as exc:
        raise SceneError(f"{where}: {exc}") from exc
    raise SceneError(f"{where}: unknown family {family!r}")


def _parse_body(spec, dual: DualNorm, index: int) -> tuple:
    where = f"bodies[{index}]"
    if not isinstance(spec, dict):
        raise SceneError(f"{where}: expected an object")
    kind = _require(spec, "kind", where)
    body_id = str(spec.get("id", f"body{index}"))
    center = np.asarray(_require(spec, "center", where), dtype=float)
    try:
        if kind == "wulff":
            body: StarBody = WulffBody(
                dual=dual, center=center, radius=float(_require(spec, "radius", where))
            )
        elif kind == "ellipsoid":
            body = Ellipsoid(
                matrix=np.asarray(_require(spec, "matrix", where), dtype=float),
                center=center,
            )
        elif kind == "superellipse":
            body = Superellipse(
                semi_axes=tuple(_require(spec, "semi_axes", where)),
                exponent=float(_require(spec, "exponent", where)),
                center=center,
            )
        else:
            raise SceneError(f"{where}: unknown kind {kind!r}")
    except SceneError:
        raise
    except Exception as exc:
        raise SceneError(f"{where}: {exc}") from exc
    return body_id, body


def parse_scene(raw: dict) -> Scene:
    if not isinstance(raw, dict):
        raise SceneError("scene root must be an object")
    integrand = _parse_integrand(_require(raw, "integrand", "scene"))
    dual = DualNorm(integrand)

    bodies = []
    for k, spec in enumerate(raw.get("bodies", [])):
        bodies.append(_parse_body(spec, dual, k))
    ids = [b[0] for b in bodies]
    if len(set(ids)) != len(ids):
        raise SceneError("bodies: ids must be unique")
    for body_id, body in bodies:
        if body.dim != integrand.dim:
            raise SceneError(f"bodies[{body_id}]: dimension differs from the integrand")

    resolution = raw.get("resolution", 4096 if integrand.dim == 2 else [64, 128])
    if isinstance(resolution, list):
        resolution = tuple(int(v) for v in resolution)
    else:
        resolution = int(resolution)

    grid = None
    if "grid" in raw:
        gspec = raw["grid"]
        bounds = np.asarray(_require(gspec, "bounds", "grid"), dtype=float)
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise SceneError("grid.bounds: expected [[lo, hi], ...] per axis")
        cells = gspec.get("cells", 256)
        grid = GridSpec(lo=bounds[:, 0], hi=bounds[:, 1], cells=cells)
        if grid.dim != integrand.dim:
            raise SceneError("grid: dimension differs from the integrand")

    suites = tuple(raw.get("suites", SUITE_NAMES))
    for s in suites:
        if s not in SUITE_NAMES:
            raise SceneError(f"suites: unknown suite {s!r}")

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in raw.get("tolerances", {}).items():
        if key not in DEFAULT_TOLERANCES:
            raise SceneError(f"tolerances: unknown key {key!r}")
        tolerances[key] = value

    steiner = dict(DEFAULT_STEINER)
    for key, value in raw.get("steiner", {}).items():
        if key not in ("lo_frac", "hi_frac", "samples", "reference_radius", "source_resolution"):
            raise SceneError(f"steiner: unknown key {key!r}")
        steiner[key] = value

    hk_c = raw.get("hk", {}).get("c")
    return Scene(
        integrand=integrand,
        dual=dual,
        bodies=tuple(bodies),
        resolution=resolution,
        grid=grid,
        seed=int(raw.get("seed", 0)),
        suites=suites,
        tolerances=tolerances,
        hk_c=None if hk_c is None else float(hk_c),
        steiner=steiner,
    )


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise SceneError(f"scene file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SceneError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return parse_scene(raw)
