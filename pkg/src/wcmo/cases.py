"""Benchmark problem definitions (tc1..tc4) and their exact data."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assembly import SubdomainBox, integrate
from .coefficients import Constant, GriddedLogField
from .mesh import Domain
from .space import BoundaryRegion

SIX_PI = 6.0 * np.pi


def eval_u_osc(x, y):
    """Smooth oscillatory solution sin(6 pi x) sin(6 pi y)."""
    return np.sin(SIX_PI * np.asarray(x)) * np.sin(SIX_PI * np.asarray(y))


def f_osc(x, y):
    """-Laplace of eval_u_osc."""
    return 2.0 * SIX_PI ** 2 * np.sin(SIX_PI * np.asarray(x)) * np.sin(SIX_PI * np.asarray(y))


def _polar_angle(x, y):
    """Continuous angle in [0, 3pi/2] on the L-shape (fourth quadrant removed)."""
    th = np.arctan2(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
    return np.where(th < 0, th + 2.0 * np.pi, th)


def eval_u_sing(x, y):
    """Corner-singular function r^(2/3) sin(2 theta / 3) with cosine cutoff."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    th = _polar_angle(x, y)
    cut = np.cos(0.5 * np.pi * x) * np.cos(0.5 * np.pi * y)
    return np.where(r2 == 0.0, 0.0, cut * r2 ** (1.0 / 3.0) * np.sin(2.0 * th / 3.0))


def _grad_w_sing(x, y):
    """Gradient of the harmonic part w = r^(2/3) sin(2 theta/3)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    r = np.sqrt(r2)
    th = _polar_angle(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        wr = (2.0 / 3.0) * r ** (-1.0 / 3.0) * np.sin(2.0 * th / 3.0)
        wt = (2.0 / 3.0) * r ** (2.0 / 3.0) * np.cos(2.0 * th / 3.0) / r
    wx = wr * np.cos(th) - wt * np.sin(th)
    wy = wr * np.sin(th) + wt * np.cos(th)
    return wx, wy


def f_sing(x, y):
    """-Laplace of eval_u_sing; w is harmonic so only cutoff terms remain."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cx = np.cos(0.5 * np.pi * x)
    cy = np.cos(0.5 * np.pi * y)
    sx = np.sin(0.5 * np.pi * x)
    sy = np.sin(0.5 * np.pi * y)
    r2 = x * x + y * y
    th = _polar_angle(x, y)
    w = np.where(r2 == 0.0, 0.0, r2 ** (1.0 / 3.0) * np.sin(2.0 * th / 3.0))
    wx, wy = _grad_w_sing(x, y)
    lap_cut = -0.5 * np.pi ** 2 * cx * cy
    dcx = -0.5 * np.pi * sx * cy
    dcy = -0.5 * np.pi * cx * sy
    return -(lap_cut * w + 2.0 * (dcx * wx + dcy * wy))


def eval_u_tc2(x, y):
    return eval_u_sing(x, y) + eval_u_osc(x, y)


def f_tc2(x, y):
    return f_sing(x, y) + f_osc(x, y)


NU_TC3 = 0.1


def eval_g_tc3(x, y):
    """Nearly singular Dirichlet data on the top/right edges of (0,1)^2.

    The top-edge branches follow the published formula; the right-edge
    branches use the edge coordinate y, restoring continuity at (1,1) and
    the near-singularity at (1, 1/3).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nu = NU_TC3
    on_top = np.abs(y - 1.0) < 1e-12
    on_right = np.abs(x - 1.0) < 1e-12
    if not np.all(on_top | on_right):
        raise ValueError("point off the Dirichlet boundary")
    top = np.where(
        x <= 0.5,
        -np.log(np.maximum((1.0 - 2.0 * x) + nu * 2.0 * x, 1e-300)),
        -np.log(np.maximum((2.0 * x - 1.0) + nu * (2.0 - 2.0 * x), 1e-300)))
    right = np.where(
        y <= 1.0 / 3.0,
        np.log(np.maximum((1.0 - 3.0 * y) + nu * 3.0 * y, 1e-300)),
        np.log(np.maximum((3.0 * y - 1.0) / 2.0 + nu * 3.0 * (1.0 - y) / 2.0, 1e-300)))
    # the shared corner (1,1) gets the (continuous) top-branch value 0
    return np.where(on_top, top, right)


def synth_permeability(seed: int, n: int = 628, m: int = 628) -> GriddedLogField:
    """Deterministic smooth synthetic log-permeability field.

    Sum of 12 Gaussian bumps with seeded centers, widths and amplitudes in
    [-3, 3]; stands in for the (unavailable) geostatistical dataset at the
    same grid resolution.
    """
    if n < 2 or m < 2:
        raise ValueError("grid must be at least 2x2")
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 1.0, m)
    ys = np.linspace(0.0, 1.0, n)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    grid = np.zeros((n, m))
    for _ in range(12):
        cx, cy = rng.uniform(0.0, 1.0, size=2)
        width = rng.uniform(0.08, 0.35)
        amp = rng.uniform(-3.0, 3.0)
        grid += amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * width ** 2))
    return GriddedLogField(grid)


@dataclass(frozen=True)
class ObjectiveSpec:
    """Declarative objective set.

    kind 'operator_ball_l2': L2(omega) worst-case error (unit ball image).
    kind 'boundary_flux': flux worst case on omega inside the Dirichlet
    boundary (trace half-norm machinery).
    Other supported kinds: 'finite_hull', 'dual_unit_ball'.
    """

    kind: str
    region: SubdomainBox | None = None
    flux_region: BoundaryRegion | None = None
    functionals: tuple = ()


@dataclass(frozen=True)
class CaseSpec:
    id: str
    domain: Domain
    f: object            # volume load, callable or None
    g: object            # Dirichlet data, callable or None (homogeneous)
    dirichlet: BoundaryRegion
    eps: object
    objective: ObjectiveSpec
    exact: object        # exact solution callable or None
    initial_level: int

    def with_eps(self, eps) -> "CaseSpec":
        return replace(self, eps=eps)


OMEGA_BOX = SubdomainBox(-0.75, -0.25, -0.75, -0.25)

TC3_DIRICHLET = BoundaryRegion.square_edges("top", "right")
TC3_NEUMANN = TC3_DIRICHLET.complement_edges()


def _registry() -> dict[str, CaseSpec]:
    tc1 = CaseSpec(
        id="tc1",
        domain=Domain.biunit_square(),
        f=f_osc,
        g=None,
        dirichlet=BoundaryRegion.all(),
        eps=Constant(1.0),
        objective=ObjectiveSpec("operator_ball_l2", region=OMEGA_BOX),
        exact=eval_u_osc,
        initial_level=3,   # h = 2^-2 on the bi-unit square
    )
    tc2 = CaseSpec(
        id="tc2",
        domain=Domain.lshape(),
        f=f_tc2,
        g=None,
        dirichlet=BoundaryRegion.all(),
        eps=Constant(1.0),
        objective=ObjectiveSpec("operator_ball_l2", region=OMEGA_BOX),
        exact=eval_u_tc2,
        initial_level=3,
    )
    tc3 = CaseSpec(
        id="tc3",
        domain=Domain.unit_square(),
        f=None,
        g=eval_g_tc3,
        dirichlet=TC3_DIRICHLET,
        eps=Constant(1.0),
        objective=ObjectiveSpec("boundary_flux", flux_region=TC3_NEUMANN),
        exact=None,
        initial_level=2,   # h = 2^-2 on the unit square
    )
    tc4 = replace(tc3, id="tc4")
    return {c.id: c for c in (tc1, tc2, tc3, tc4)}


CASES = _registry()


def get_case(case_id: str) -> CaseSpec:
    try:
        return CASES[case_id]
    except KeyError:
        raise KeyError(f"unknown case {case_id!r}; known: {sorted(CASES)}") from None


def exact_error(case: CaseSpec, u_h, metric: str = "L2",
                region: SubdomainBox | str | None = None) -> float | None:
    """High-order quadrature of the requested error norm, if exact u known."""
    if case.exact is None:
        return None
    if region is None:
        region = case.objective.region if case.objective.region is not None else "all"
    if metric != "L2":
        raise ValueError("only the L2 metric is supported")
    val = integrate(u_h.space, u_h.coeffs, func=case.exact, region=region,
                    order_boost=4)
    return float(np.sqrt(max(val, 0.0)))
