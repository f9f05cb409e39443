"""Named verification suites executed by the CLI batch runner.

Each suite runs a bundle of identity and inequality checks at the scene's
resolutions, writes CSV tables next to the JSON report, and contributes a
pass/fail entry; the runner's exit code encodes the first failing suite.
Every suite carries a ``verifies`` slug naming the mathematical property
it exercises, as machine-checkable report metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import distance as dist
from . import steiner as st
from .curvature import curvature_table, umbilicity_classify
from .duality import wulff_sample
from .errors import WulffkitError
from .hk import equality_classifier, hk_evaluate, montiel_ros_integral
from .hypersurface import WulffBody, perimeter_F, sample_surface, volume
from .integrand import EuclideanNorm
from .scene import Scene
from .variation import (
    PolynomialField,
    criticality_residual,
    first_variation,
    flow_energy_derivative,
)

__all__ = ["SUITE_ORDER", "run_suite", "SuiteResult"]

SUITE_ORDER = ("dual", "wulff", "curv", "hk", "mr", "steiner", "reach", "var")

VERIFIES = {
    "dual": "conjugate-norm-duality-identities",
    "wulff": "wulff-boundary-gauss-map-inversion",
    "curv": "anisotropic-curvature-and-umbilicity",
    "hk": "volume-vs-curvature-integral-inequality",
    "mr": "normal-flow-tube-volume-bound",
    "steiner": "tube-polynomial-positive-reach",
    "reach": "anisotropic-reach-rolling-ball-bound",
    "var": "first-variation-and-criticality",
}


@dataclass
class SuiteResult:
    name: str
    verifies: str
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    skipped: bool = False
    skip_reason: str = ""

    def check(self, name: str, value: float, tol: float, two_sided: bool = False):
        value = float(value)
        passed = abs(value) <= tol if two_sided else value <= tol
        self.checks.append(
            {"name": name, "value": value, "tol": float(tol), "passed": bool(passed)}
        )
        return passed

    def flag(self, name: str, ok: bool):
        self.checks.append(
            {"name": name, "value": 1.0 if ok else 0.0, "tol": 1.0, "passed": bool(ok)}
        )
        return ok

    @property
    def passed(self) -> bool:
        return self.skipped or all(c["passed"] for c in self.checks)


def _rng(scene: Scene, salt: int):
    return np.random.default_rng([scene.seed, salt])


def _random_points(rng, dim, count, scale=1.0):
    pts = rng.standard_normal((count, dim)) * scale
    norms = np.linalg.norm(pts, axis=1)
    return pts[norms > 1e-6]


def _wulff_bodies(scene: Scene):
    return [(bid, b) for bid, b in scene.bodies if isinstance(b, WulffBody)]


def suite_dual(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("dual", VERIFIES["dual"])
    f = scene.integrand
    dual = scene.dual
    rng = _rng(scene, 1)
    x = _random_points(rng, f.dim, 1000)

    fx = f.value(x)
    gx = f.grad(x)
    res.check(
        "euler_identity",
        np.abs(np.einsum("ni,ni->n", x, gx) - fx).max() / fx.min(),
        1e-12,
    )
    res.check("unit_level_Fstar_of_G", np.abs(dual.batch_value(gx) - 1.0).max(), 1e-8)
    u = x / fx[:, None]
    res.check(
        "inverse_pair_Gstar_after_G",
        np.linalg.norm(dual.batch_grad(f.grad(u)) - u, axis=1).max(),
        1e-8,
    )

    theta = np.arange(360) * (2 * np.pi / 360)
    if f.dim == 2:
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    else:
        dirs = _random_points(_rng(scene, 11), f.dim, 360)
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    if dual.has_closed_form:
        iterative = f.value(dual._polar_minimize(dirs))
        closed = dual.batch_value(dirs)
        res.check(
            "iterative_vs_closed_form", np.abs(iterative - closed).max(), 1e-6
        )
        np.savetxt(
            out / "dual.csv",
            np.hstack([dirs, closed[:, None], iterative[:, None]]),
            delimiter=",",
            header=",".join([f"w{i+1}" for i in range(f.dim)] + ["Fstar", "Fstar_iterative"]),
            comments="",
        )

    pairs = _random_points(rng, f.dim, 400).reshape(-1, 2, f.dim)
    a, b = pairs[:, 0], pairs[:, 1]
    if f.dim == 2:
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    else:
        cross = np.linalg.norm(np.cross(a, b), axis=1)
    keep = cross > 1e-9
    sub = dual.batch_value(a[keep] + b[keep])
    parts = dual.batch_value(a[keep]) + dual.batch_value(b[keep])
    res.flag("strict_triangle_inequality", bool(np.all(sub < parts)))
    res.metrics["points"] = int(len(x))
    return res


def suite_wulff(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("wulff", VERIFIES["wulff"])
    dual = scene.dual
    bodies = _wulff_bodies(scene) or [
        ("unit", WulffBody(dual=dual, center=np.zeros(scene.dim), radius=1.0))
    ]
    resolution = scene.resolution if scene.dim == 2 else 4096
    worst_radius, worst_gauss = 0.0, 0.0
    r_max = max(body.radius for _, body in bodies)
    for bid, body in bodies:
        ws = wulff_sample(dual, body.center, body.radius, int(np.prod(np.atleast_1d(resolution))))
        r_err = np.abs(
            dual.batch_value(ws.points - body.center) - body.radius
        ).max()
        g_err = np.linalg.norm(
            scene.integrand.grad(ws.normals)
            - (ws.points - body.center) / body.radius,
            axis=1,
        ).max()
        worst_radius = max(worst_radius, float(r_err))
        worst_gauss = max(worst_gauss, float(g_err))
        ws.to_csv(out / f"wulff_{bid}.csv")
    res.check("boundary_on_conjugate_sphere", worst_radius, 1e-10 * max(1.0, r_max))
    res.check("gauss_map_inversion", worst_gauss, 1e-8)
    res.metrics["bodies"] = [bid for bid, _ in bodies]
    return res


def suite_curv(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("curv", VERIFIES["curv"])
    f, dual = scene.integrand, scene.dual
    kappa_tol = 1e-4 if scene.dim == 2 else 1e-3
    for bid, body in scene.bodies:
        quad = sample_surface(body, scene.resolution)
        table = curvature_table(body, f, quad)
        res.check(
            f"trace_vs_eigensum[{bid}]",
            np.abs(table.kappa.sum(axis=1) - table.mean).max()
            / (1.0 + np.abs(table.mean).max()),
            1e-8,
        )
        eta = f.grad(quad.normals)
        res.check(
            f"eta_on_unit_conjugate_sphere[{bid}]",
            np.abs(dual.batch_value(eta) - 1.0).max(),
            1e-8,
        )
        umb = umbilicity_classify(body, f, quad, tol_fit=scene.tolerances["tol_fit"])
        res.metrics[f"umbilicity[{bid}]"] = {
            "verdict": umb.verdict,
            "lambda": umb.lam,
            "radius": umb.radius,
            "center": None if umb.center is None else list(umb.center),
            "dispersion": umb.dispersion,
        }
        if isinstance(body, WulffBody):
            res.check(
                f"wulff_constant_curvature[{bid}]",
                np.abs(table.kappa - 1.0 / body.radius).max(),
                kappa_tol,
            )
            res.flag(f"wulff_verdict[{bid}]", umb.verdict == "wulff")
            res.check(
                f"wulff_center_recovery[{bid}]",
                np.linalg.norm(umb.center - body.center),
                1e-3,
            )
            res.check(
                f"wulff_radius_recovery[{bid}]",
                abs(umb.radius - body.radius),
                1e-3,
            )
        header = ",".join(
            [f"x{i+1}" for i in range(scene.dim)]
            + [f"kappaF{i+1}" for i in range(scene.dim - 1)]
            + ["H"]
        )
        np.savetxt(
            out / f"curv_{bid}.csv",
            np.hstack([quad.points, table.kappa, table.mean[:, None]]),
            delimiter=",",
            header=header,
            comments="",
        )
    return res


def suite_hk(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("hk", VERIFIES["hk"])
    bodies = [b for _, b in scene.bodies]
    if not bodies:
        res.skipped, res.skip_reason = True, "no bodies in scene"
        return res
    report = hk_evaluate(
        bodies,
        scene.integrand,
        scene.resolution,
        tol_eq=scene.tolerances["tol_eq"],
        tol_fit=scene.tolerances["tol_fit"],
    )
    rhs = (scene.dim - 1) / scene.dim * report.integral
    res.check("ratio_at_most_one", report.ratio, 1.0 + 1e-3)
    res.check("volume_below_tube_integral", report.vol / report.mr_integral, 1.0 + 1e-3)
    res.check("tube_integral_below_rhs", report.mr_integral / rhs, 1.0 + 1e-3)
    c = scene.hk_c if scene.hk_c is not None else report.h_max
    verdict = equality_classifier(
        report, report.umbilicity, c, tol_r=scene.tolerances["tol_r"]
    )
    res.metrics.update(
        {
            "vol": report.vol,
            "integral": report.integral,
            "mr_integral": report.mr_integral,
            "ratio": report.ratio,
            "H_min": report.h_min,
            "H_max": report.h_max,
            "hk_verdict": report.verdict,
            "class_verdict": verdict.verdict,
            "failing_condition": verdict.failing_condition,
            "radii": [float(r) for r in verdict.radii],
            "centers": [list(map(float, c)) for c in verdict.centers],
            "equal_radii": verdict.equal_radii,
            "curvature_bound": c,
        }
    )
    return res


def suite_mr(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("mr", VERIFIES["mr"])
    f = scene.integrand
    n = scene.dim - 1
    for bid, body in scene.bodies:
        quad = sample_surface(body, scene.resolution)
        table = curvature_table(body, f, quad)
        if np.any(table.mean <= 0):
            res.skipped, res.skip_reason = True, f"body {bid} has H <= 0 nodes"
            return res
        mr = montiel_ros_integral(body, f, scene.resolution)
        vol = volume(body, scene.resolution)
        rhs = n / (n + 1) * float((f.value(quad.normals) / table.mean * quad.weights).sum())
        res.check(f"volume_below_tube_integral[{bid}]", vol / mr, 1.0 + 1e-3)
        res.check(f"tube_integral_below_rhs[{bid}]", mr / rhs, 1.0 + 1e-3)
        if isinstance(body, WulffBody):
            res.check(f"am_gm_tight_on_wulff[{bid}]", abs(mr - rhs) / rhs, 1e-6)
        res.metrics[f"mr[{bid}]"] = {"vol": vol, "mr": mr, "rhs": rhs}
    return res


def _complement_field(scene: Scene, body, f, source_resolution):
    source = dist.boundary_source([body], source_resolution, region="complement")
    return dist.build_field(
        source,
        f,
        scene.grid,
        eps_cluster=scene.tolerances["eps_cluster"],
        tol_unique=scene.tolerances["tol_unique"],
    )


def _steiner_source_resolution(scene: Scene, body) -> object:
    if "source_resolution" in scene.steiner:
        return scene.steiner["source_resolution"]
    if scene.dim != 2:
        return scene.resolution
    # boundary sampling must stay denser than the grid spacing
    length = perimeter_F(
        sample_surface(body, 512), EuclideanNorm(2)
    )
    need = int(2 ** np.ceil(np.log2(max(64, 1.5 * length / scene.grid.h))))
    return max(need, 512)


def suite_steiner(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("steiner", VERIFIES["steiner"])
    if scene.grid is None:
        res.skipped, res.skip_reason = True, "scene has no grid"
        return res
    f = scene.integrand
    for bid, body in scene.bodies:
        field_ = _complement_field(
            scene, body, f, _steiner_source_resolution(scene, body)
        )
        reach = dist.estimate_reach_F(field_)
        r_ref = scene.steiner.get("reference_radius") or 0.95 * reach
        t = st.default_t_grid(
            r_ref,
            scene.steiner["lo_frac"],
            scene.steiner["hi_frac"],
            scene.steiner["samples"],
        )
        curve = st.tube_volumes(field_, t)
        fit = st.fit_polynomial(curve, scene.dim)
        reference = st.claim5_coefficients(body, f, scene.resolution)
        verdict = st.positive_reach_test(
            fit, scene.tolerances["steiner_residual"], reference
        )
        res.check(f"fit_residual[{bid}]", fit.residual, scene.tolerances["steiner_residual"])
        res.check(
            f"fit_vs_boundary_coefficients[{bid}]",
            float(verdict.coefficient_agreement.max()),
            0.02,
        )
        res.metrics[f"steiner[{bid}]"] = {
            "coefficients": [float(v) for v in fit.coefficients],
            "reference": [float(v) for v in reference],
            "residual": fit.residual,
            "reach_estimate": reach,
            "verdict": verdict.verdict,
        }
        np.savetxt(
            out / f"steiner_{bid}.csv",
            np.stack([curve.t, curve.volume], axis=1),
            delimiter=",",
            header="t,volume",
            comments="",
        )
    return res


def suite_reach(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("reach", VERIFIES["reach"])
    if scene.grid is None:
        res.skipped, res.skip_reason = True, "scene has no grid"
        return res
    f = scene.integrand
    euclid = EuclideanNorm(scene.dim)
    h = scene.grid.h
    for bid, body in scene.bodies:
        source_res = _steiner_source_resolution(scene, body)
        field_f = _complement_field(scene, body, f, source_res)
        field_e = _complement_field(scene, body, euclid, source_res)
        cmp_ = dist.reach_comparison(field_e, field_f, scene.dual)
        res.flag(f"rolling_ball_bound[{bid}]", cmp_.ok)
        if isinstance(body, WulffBody):
            res.check(
                f"wulff_reach_equals_radius[{bid}]",
                abs(cmp_.reach_anisotropic - body.radius),
                2 * h,
            )
        res.metrics[f"reach[{bid}]"] = {
            "rho": cmp_.rho,
            "euclidean": cmp_.reach_euclidean,
            "anisotropic": cmp_.reach_anisotropic,
            "slack": cmp_.slack,
        }
    return res


def suite_var(scene: Scene, out: Path) -> SuiteResult:
    res = SuiteResult("var", VERIFIES["var"])
    f = scene.integrand
    rng = _rng(scene, 7)
    rows = []
    for bid, body in scene.bodies:
        quad = sample_surface(body, scene.resolution)
        p = perimeter_F(quad, f)
        diameter = 2.0 * float(quad.rho.max())
        h = 1e-4 * diameter
        table = curvature_table(body, f, quad)

        g0 = PolynomialField.constant(np.ones(scene.dim))
        res.check(f"translation_invariance[{bid}]", abs(first_variation(quad, f, g0)), 1e-12 * p)
        gx = PolynomialField.position(scene.dim)
        res.check(
            f"dilation_matches_perimeter[{bid}]",
            abs(first_variation(quad, f, gx) - (scene.dim - 1) * p) / p,
            1e-6,
        )

        worst_consistency = 0.0
        worst_pairing = 0.0
        for k in range(10):
            g = PolynomialField.random(rng, scene.dim, scale=0.4)
            fv = first_variation(quad, f, g)
            flow = flow_energy_derivative(body, f, g, h, scene.resolution)
            worst_consistency = max(
                worst_consistency, abs(fv - flow) / (1.0 + abs(fv))
            )
            paired = float(
                (table.mean * np.einsum("ni,ni->n", g(quad.points), quad.normals) * quad.weights).sum()
            )
            worst_pairing = max(worst_pairing, abs(fv - paired) / max(p, abs(fv)))
            crit = criticality_residual(body, f, g, scene.resolution)
            rows.append((f"{bid}:{k}", crit.residual))
            if isinstance(body, WulffBody):
                res.check(f"wulff_criticality[{bid}:{k}]", abs(crit.residual), 1e-3 * p)
        res.check(f"variation_consistency[{bid}]", worst_consistency, 1e-4)
        res.check(f"mean_curvature_pairing[{bid}]", worst_pairing, 1e-3)
        res.metrics[f"perimeter[{bid}]"] = p
    with open(out / "var_residuals.csv", "w") as fh:
        fh.write("field_id,residual\n")
        for name, val in rows:
            fh.write(f"{name},{val!r}\n")
    return res


_SUITES = {
    "dual": suite_dual,
    "wulff": suite_wulff,
    "curv": suite_curv,
    "hk": suite_hk,
    "mr": suite_mr,
    "steiner": suite_steiner,
    "reach": suite_reach,
    "var": suite_var,
}


def run_suite(name: str, scene: Scene, out: Path) -> SuiteResult:
    if name not in _SUITES:
        raise WulffkitError(f"unknown suite {name!r}")
    out.mkdir(parents=True, exist_ok=True)
    return _SUITES[name](scene, out)
