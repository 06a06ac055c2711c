"""Built-in analytic spacetime and initial-data families with exact jets.

Every scenario supplies closed-form metric 2-jets, a time-orientation field,
named embeddings with declared outward directions, and (where applicable)
initial data for a distinguished slice.  Signature is (-, +, ..., +)
throughout.  These families are the single source of ground-truth geometry
for the verification suites:

* ``minkowski``: flat spacetime, round spheres and coordinate planes.
* ``minkowski_torus_quotient``: flat spacetime with compact spatial axes;
  ships the extremal codimension-2 torus {t = x1 = 0} and the flat slice.
* ``einstein_cylinder``: product of a time line with a unit round sphere;
  ships the totally geodesic slice and the equator, a marginally outer
  trapped surface whose stability operator is computed exactly.
* ``schwarzschild_slice_isotropic``: time-symmetric vacuum data in isotropic
  coordinates plus the static exterior spacetime; the minimal sphere at
  r = mass/2 is the marginally outer trapped candidate.
* ``flrw_dust``: decelerating cosmology with strictly positive Ricci form on
  causal directions, exercising the strict energy predicate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadParams, UnknownScenario
from .geometry import MetricJet2, Signature, TangentVector
from .initial_data import InitialData, zero_K_field
from .jets import Jet1, radial_hessian
from .submanifold import EmbeddingJet2

MetricField = Callable[[np.ndarray], MetricJet2]
VectorField = Callable[[np.ndarray], TangentVector]


class ScenarioKind(enum.Enum):
    SPACETIME = "spacetime"
    INITIAL_DATA = "initial_data"
    BOTH = "both"


@dataclass
class SliceSurface:
    """Hypersurface of the initial-data slice with its outward unit normal."""

    embedding: EmbeddingJet2
    nu: Callable[[np.ndarray], np.ndarray]
    mots_candidate: bool = False
    # intrinsic scalar curvature of the surface, needed by the stability
    # operator (identically zero for one-dimensional surfaces)
    scal_sigma: Callable[[np.ndarray], float] = lambda u: 0.0
    measure: Optional[float] = None
    injectivity_scale: float = 1.0
    # period of the curve parameter for one-dimensional surfaces
    param_period: float = 2.0 * math.pi


@dataclass
class Scenario:
    name: str
    kind: ScenarioKind
    dim: int
    metric: Optional[MetricField] = None
    time_orientation: Optional[VectorField] = None
    periods: Optional[tuple[Optional[float], ...]] = None
    embeddings: dict[str, EmbeddingJet2] = field(default_factory=dict)
    initial_data: Optional[InitialData] = None
    slice_surfaces: dict[str, SliceSurface] = field(default_factory=dict)
    energy_points: list[np.ndarray] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def require_spacetime(self):
        if self.metric is None:
            raise BadParams(f"scenario {self.name} has no spacetime metric")
        return self.metric


def _flat_field(dim: int) -> MetricField:
    return lambda p: MetricJet2.flat(dim)


def _coordinate_time_field(dim: int) -> VectorField:
    e0 = np.eye(dim)[0]
    return lambda p: TangentVector(np.asarray(p, dtype=float), e0)


def _latlong_samples(n_theta: int, n_phi: int) -> np.ndarray:
    thetas = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phis = np.arange(n_phi) * 2.0 * math.pi / n_phi
    return np.array([(t, p) for t in thetas for p in phis])


def _grid_samples(count_per_axis: int, dims: int, period: float = 1.0) -> np.ndarray:
    axes = [np.arange(count_per_axis) * period / count_per_axis for _ in range(dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sphere_embedding(
    radius: float,
    ambient_dim: int,
    time_slice: float = 0.0,
    spatial_only: bool = False,
    n_theta: int = 6,
    n_phi: int = 8,
) -> EmbeddingJet2:
    """Round 2-sphere embedding, either into a {t = const} slice of a
    4-dimensional spacetime or directly into 3-space (``spatial_only``)."""
    offset = 0 if spatial_only else 1

    def point(u):
        t, p = float(u[0]), float(u[1])
        x = np.zeros(ambient_dim)
        if not spatial_only:
            x[0] = time_slice
        x[offset + 0] = radius * math.sin(t) * math.cos(p)
        x[offset + 1] = radius * math.sin(t) * math.sin(p)
        x[offset + 2] = radius * math.cos(t)
        return x

    def d_point(u):
        t, p = float(u[0]), float(u[1])
        d = np.zeros((ambient_dim, 2))
        st, ct, sp, cp = math.sin(t), math.cos(t), math.sin(p), math.cos(p)
        d[offset + 0] = (radius * ct * cp, -radius * st * sp)
        d[offset + 1] = (radius * ct * sp, radius * st * cp)
        d[offset + 2] = (-radius * st, 0.0)
        return d

    def dd_point(u):
        t, p = float(u[0]), float(u[1])
        dd = np.zeros((ambient_dim, 2, 2))
        st, ct, sp, cp = math.sin(t), math.cos(t), math.sin(p), math.cos(p)
        dd[offset + 0] = [[-radius * st * cp, -radius * ct * sp], [-radius * ct * sp, -radius * st * cp]]
        dd[offset + 1] = [[-radius * st * sp, radius * ct * cp], [radius * ct * cp, -radius * st * sp]]
        dd[offset + 2] = [[-radius * ct, 0.0], [0.0, 0.0]]
        return dd

    def outward(u):
        t, p = float(u[0]), float(u[1])
        x = np.zeros(ambient_dim)
        x[offset + 0] = math.sin(t) * math.cos(p)
        x[offset + 1] = math.sin(t) * math.sin(p)
        x[offset + 2] = math.cos(t)
        return x

    return EmbeddingJet2(
        sigma_dim=2,
        ambient_dim=ambient_dim,
        chart=point,
        d_chart=d_point,
        dd_chart=dd_point,
        sample_set=_latlong_samples(n_theta, n_phi),
        outward=outward,
        name=f"sphere_r{radius:g}",
    )


def coordinate_plane_embedding(
    ambient_dim: int,
    fixed_axes: tuple[int, ...],
    samples: np.ndarray,
    outward_axis: int,
    fixed_values: Optional[tuple[float, ...]] = None,
) -> EmbeddingJet2:
    """Affine coordinate submanifold {x^a = const for a in fixed_axes}."""
    free = [a for a in range(ambient_dim) if a not in fixed_axes]
    sigma_dim = len(free)
    values = fixed_values if fixed_values is not None else (0.0,) * len(fixed_axes)
    d = np.zeros((ambient_dim, sigma_dim))
    for col, a in enumerate(free):
        d[a, col] = 1.0
    dd = np.zeros((ambient_dim, sigma_dim, sigma_dim))
    e_out = np.eye(ambient_dim)[outward_axis]

    def point(u):
        x = np.zeros(ambient_dim)
        x[list(fixed_axes)] = values
        x[free] = np.asarray(u, dtype=float)
        return x

    return EmbeddingJet2(
        sigma_dim=sigma_dim,
        ambient_dim=ambient_dim,
        chart=point,
        d_chart=lambda u: d,
        dd_chart=lambda u: dd,
        sample_set=samples,
        outward=lambda u: e_out,
        name=f"plane_fixed{fixed_axes}",
    )


# --- round sphere jets -----------------------------------------------------

def round_sphere_jet(n: int, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Metric 2-jet of the unit round n-sphere in nested polar coordinates.

    g_ii = prod_{j<i} sin^2(theta_j); valid away from the coordinate poles.
    """
    angles = np.asarray(angles, dtype=float)
    g = np.zeros((n, n))
    dg = np.zeros((n, n, n))
    ddg = np.zeros((n, n, n, n))
    sin2 = np.sin(angles) ** 2
    # derivatives only ever involve the first n-1 angles (k < i), so the
    # last angle may sit at a coordinate zero without harm
    cot = np.zeros(n)
    csc2 = np.zeros(n)
    cot[: n - 1] = np.cos(angles[: n - 1]) / np.sin(angles[: n - 1])
    csc2[: n - 1] = 1.0 / sin2[: n - 1]
    prods = np.ones(n)
    for i in range(1, n):
        prods[i] = prods[i - 1] * sin2[i - 1]
    for i in range(n):
        a = prods[i]
        g[i, i] = a
        for k in range(i):
            dg[k, i, i] = a * 2.0 * cot[k]
            for l in range(i):
                if k == l:
                    ddg[k, k, i, i] = a * (4.0 * cot[k] ** 2 - 2.0 * csc2[k])
                else:
                    ddg[l, k, i, i] = a * 4.0 * cot[k] * cot[l]
    return g, dg, ddg


def _cylinder_metric_field(n: int) -> MetricField:
    dim = n + 1

    def metric(p: np.ndarray) -> MetricJet2:
        p = np.asarray(p, dtype=float)
        gs, dgs, ddgs = round_sphere_jet(n, p[1:])
        g = np.zeros((dim, dim))
        g[0, 0] = -1.0
        g[1:, 1:] = gs
        dg = np.zeros((dim,) * 3)
        dg[1:, 1:, 1:] = dgs
        ddg = np.zeros((dim,) * 4)
        ddg[1:, 1:, 1:, 1:] = ddgs
        return MetricJet2(dim, g, dg, ddg, Signature.LORENTZIAN)

    return metric


def _sphere_slice_field(n: int) -> MetricField:
    def metric(p: np.ndarray) -> MetricJet2:
        g, dg, ddg = round_sphere_jet(n, np.asarray(p, dtype=float))
        return MetricJet2(n, g, dg, ddg, Signature.RIEMANNIAN)

    return metric


def circle_embedding(
    ambient_dim: int,
    build_point: Callable[[float], np.ndarray],
    build_d: Callable[[float], np.ndarray],
    build_dd: Callable[[float], np.ndarray],
    outward_vec: Callable[[float], np.ndarray],
    n_samples: int,
    period: float = 2.0 * math.pi,
    name: str = "circle",
) -> EmbeddingJet2:
    samples = (np.arange(n_samples) * period / n_samples).reshape(-1, 1)
    return EmbeddingJet2(
        sigma_dim=1,
        ambient_dim=ambient_dim,
        chart=lambda u: build_point(float(u[0])),
        d_chart=lambda u: build_d(float(u[0])).reshape(ambient_dim, 1),
        dd_chart=lambda u: build_dd(float(u[0])).reshape(ambient_dim, 1, 1),
        sample_set=samples,
        outward=lambda u: outward_vec(float(u[0])),
        name=name,
    )


# --- scenario builders -----------------------------------------------------

def _build_minkowski(params: dict) -> Scenario:
    dim = int(params.get("dim", 4))
    if dim < 2:
        raise BadParams("minkowski needs dim >= 2")
    sc = Scenario(
        name="minkowski",
        kind=ScenarioKind.BOTH,
        dim=dim,
        metric=_flat_field(dim),
        time_orientation=_coordinate_time_field(dim),
        params={"dim": dim},
    )
    slice_dim = dim - 1
    sc.initial_data = InitialData(
        dim=slice_dim,
        h_field=lambda p: MetricJet2.flat(slice_dim, Signature.RIEMANNIAN),
        K_field=zero_K_field(slice_dim),
    )
    if dim == 4:
        radius = float(params.get("radius", 1.0))
        if radius <= 0:
            raise BadParams("radius must be positive")
        sc.embeddings["sphere"] = sphere_embedding(radius, dim)
        sc.embeddings["plane"] = coordinate_plane_embedding(
            dim, (0, 1), _grid_samples(4, 2), outward_axis=1
        )
        slice_sphere = sphere_embedding(radius, slice_dim, spatial_only=True)

        def nu(u):
            t, p = float(u[0]), float(u[1])
            return np.array(
                [math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)]
            )

        sc.slice_surfaces["sphere"] = SliceSurface(
            embedding=slice_sphere,
            nu=nu,
            mots_candidate=False,
            scal_sigma=lambda u: 2.0 / radius**2,
            measure=4.0 * math.pi * radius**2,
        )
    sc.energy_points = [np.zeros(dim), 0.1 * np.arange(1, dim + 1., dtype=float)]
    return sc


def _build_torus_quotient(params: dict) -> Scenario:
    m = int(params.get("m", 3))
    if m < 2:
        raise BadParams("torus quotient needs at least 2 spatial dimensions")
    dim = m + 1
    periods = (None,) + (1.0,) * m
    sc = Scenario(
        name="minkowski_torus_quotient",
        kind=ScenarioKind.BOTH,
        dim=dim,
        metric=_flat_field(dim),
        time_orientation=_coordinate_time_field(dim),
        periods=periods,
        params={"m": m},
    )
    per_axis = int(params.get("samples_per_axis", 8))
    sigma_samples = _grid_samples(per_axis, m - 1) if m > 1 else np.zeros((1, 0))
    sc.embeddings["Sigma"] = coordinate_plane_embedding(dim, (0, 1), sigma_samples, outward_axis=1)
    sc.initial_data = InitialData(
        dim=m,
        h_field=lambda p: MetricJet2.flat(m, Signature.RIEMANNIAN),
        K_field=zero_K_field(m),
    )
    slice_sigma = coordinate_plane_embedding(m, (0,), sigma_samples, outward_axis=0)
    e_nu = np.eye(m)[0]
    sc.slice_surfaces["Sigma"] = SliceSurface(
        embedding=slice_sigma,
        nu=lambda u: e_nu,
        mots_candidate=True,
        measure=1.0,
        injectivity_scale=0.5,
        param_period=1.0,
    )
    rng = np.random.default_rng(7)
    sc.energy_points = [np.concatenate(([0.0], rng.uniform(0, 1, m))) for _ in range(3)]
    return sc


def _build_einstein_cylinder(params: dict) -> Scenario:
    n = int(params.get("n", 2))
    if n not in (2, 3):
        raise BadParams("einstein_cylinder supports sphere dimension n in {2, 3}")
    dim = n + 1
    sc = Scenario(
        name="einstein_cylinder",
        kind=ScenarioKind.BOTH,
        dim=dim,
        metric=_cylinder_metric_field(n),
        time_orientation=_coordinate_time_field(dim),
        periods=(None,) * n + (2.0 * math.pi,),
        params={"n": n},
    )
    sc.initial_data = InitialData(
        dim=n, h_field=_sphere_slice_field(n), K_field=zero_K_field(n)
    )
    n_samples = int(params.get("equator_samples", 16))
    if n == 2:
        # equator circle of the sphere slice, theta = pi/2
        sc.embeddings["equator"] = circle_embedding(
            ambient_dim=dim,
            build_point=lambda s: np.array([0.0, math.pi / 2.0, s]),
            build_d=lambda s: np.array([0.0, 0.0, 1.0]),
            build_dd=lambda s: np.zeros(3),
            outward_vec=lambda s: np.array([0.0, 1.0, 0.0]),
            n_samples=n_samples,
            name="equator",
        )
        slice_equator = circle_embedding(
            ambient_dim=n,
            build_point=lambda s: np.array([math.pi / 2.0, s]),
            build_d=lambda s: np.array([0.0, 1.0]),
            build_dd=lambda s: np.zeros(2),
            outward_vec=lambda s: np.array([1.0, 0.0]),
            n_samples=n_samples,
            name="equator_slice",
        )
        sc.slice_surfaces["equator"] = SliceSurface(
            embedding=slice_equator,
            nu=lambda u: np.array([1.0, 0.0]),
            mots_candidate=True,
            scal_sigma=lambda u: 0.0,
            measure=2.0 * math.pi,
            injectivity_scale=math.pi / 2.0,
        )
        sc.energy_points = [
            np.array([0.0, math.pi / 3.0, 0.3]),
            np.array([0.4, 2.0, 1.1]),
        ]
    else:
        # equatorial 2-sphere {t = 0, theta_1 = pi/2} of the 3-sphere slice
        sc.embeddings["equator"] = coordinate_plane_embedding(
            dim, (0, 1), _latlong_samples(5, 8), outward_axis=1,
            fixed_values=(0.0, math.pi / 2.0),
        )
        slice_eq = coordinate_plane_embedding(
            n, (0,), _latlong_samples(5, 8), outward_axis=0,
            fixed_values=(math.pi / 2.0,),
        )
        sc.slice_surfaces["equator"] = SliceSurface(
            embedding=slice_eq,
            nu=lambda u: np.eye(n)[0],
            mots_candidate=True,
            scal_sigma=lambda u: 2.0,
            measure=4.0 * math.pi,
            injectivity_scale=math.pi / 2.0,
        )
        sc.energy_points = [
            np.array([0.0, math.pi / 3.0, math.pi / 2.5, 0.3]),
            np.array([0.4, 2.0, 1.1, 1.0]),
        ]
    return sc


def _schwarzschild_psi4(mass: float, r: float) -> Jet1:
    rj = Jet1.variable(r)
    psi = Jet1.const(1.0) + Jet1.const(mass / 2.0) / rj
    return psi**4


def _schwarzschild_lapse_sq(mass: float, r: float) -> Jet1:
    rj = Jet1.variable(r)
    half = Jet1.const(mass / 2.0) / rj
    num = Jet1.const(1.0) - half
    den = Jet1.const(1.0) + half
    return (num / den) ** 2


def _build_schwarzschild(params: dict) -> Scenario:
    mass = float(params.get("mass", 1.0))
    if mass <= 0:
        raise BadParams("mass must be positive")
    slice_dim = 3
    dim = 4

    def h_field(p: np.ndarray) -> MetricJet2:
        p = np.asarray(p, dtype=float)
        v, grad, hess = radial_hessian(_schwarzschild_psi4(mass, float(np.linalg.norm(p))), p)
        g = v * np.eye(slice_dim)
        dg = np.einsum("k,ij->kij", grad, np.eye(slice_dim))
        ddg = np.einsum("lk,ij->lkij", hess, np.eye(slice_dim))
        return MetricJet2(slice_dim, g, dg, ddg, Signature.RIEMANNIAN)

    def metric(p: np.ndarray) -> MetricJet2:
        p = np.asarray(p, dtype=float)
        x = p[1:]
        r = float(np.linalg.norm(x))
        v4, grad4, hess4 = radial_hessian(_schwarzschild_psi4(mass, r), x)
        vn, gradn, hessn = radial_hessian(_schwarzschild_lapse_sq(mass, r), x)
        g = np.zeros((dim, dim))
        g[0, 0] = -vn
        g[1:, 1:] = v4 * np.eye(slice_dim)
        dg = np.zeros((dim,) * 3)
        ddg = np.zeros((dim,) * 4)
        dg[1:, 0, 0] = -gradn
        ddg[1:, 1:, 0, 0] = -hessn
        dg[1:, 1:, 1:] += np.einsum("k,ij->kij", grad4, np.eye(slice_dim))
        ddg[1:, 1:, 1:, 1:] += np.einsum("lk,ij->lkij", hess4, np.eye(slice_dim))
        return MetricJet2(dim, g, dg, ddg, Signature.LORENTZIAN)

    sc = Scenario(
        name="schwarzschild_slice_isotropic",
        kind=ScenarioKind.BOTH,
        dim=dim,
        metric=metric,
        time_orientation=_coordinate_time_field(dim),
        params={"mass": mass},
    )
    sc.initial_data = InitialData(dim=slice_dim, h_field=h_field, K_field=zero_K_field(slice_dim))

    def add_sphere(name: str, r0: float, candidate: bool):
        emb = sphere_embedding(r0, slice_dim, spatial_only=True)
        psi_sq = (1.0 + mass / (2.0 * r0)) ** 2

        def nu(u):
            t, p = float(u[0]), float(u[1])
            return np.array(
                [math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)]
            ) / psi_sq

        area_radius = psi_sq * r0
        sc.slice_surfaces[name] = SliceSurface(
            embedding=emb,
            nu=nu,
            mots_candidate=candidate,
            scal_sigma=lambda u: 2.0 / area_radius**2,
            measure=4.0 * math.pi * area_radius**2,
        )

    add_sphere("horizon_sphere", mass / 2.0, True)
    add_sphere("sphere", float(params.get("radius", 1.0)), False)
    # the static chart degenerates at r = mass/2 (vanishing lapse), so the
    # horizon surface is only carried on the slice; spacetime spheres must
    # stay outside it
    exterior_r = float(params.get("spacetime_sphere_radius", 1.0))
    if exterior_r <= mass / 2.0:
        raise BadParams("spacetime sphere radius must exceed mass/2")
    sc.embeddings["sphere"] = sphere_embedding(exterior_r, dim)
    sc.energy_points = [
        np.array([0.0, 0.9, 0.0, 0.0]),
        np.array([0.0, 0.7, 1.1, 0.4]),
        np.array([0.0, -0.3, 0.5, 1.6]),
    ]
    return sc


def _build_flrw_dust(params: dict) -> Scenario:
    dim = int(params.get("dim", 4))
    if dim < 3:
        raise BadParams("flrw_dust needs dim >= 3")
    ns = dim - 1

    def metric(p: np.ndarray) -> MetricJet2:
        t = float(p[0])
        if t <= 0:
            raise BadParams("flrw_dust chart requires t > 0")
        a2 = t ** (4.0 / 3.0)
        da2 = (4.0 / 3.0) * t ** (1.0 / 3.0)
        dda2 = (4.0 / 9.0) * t ** (-2.0 / 3.0)
        g = np.eye(dim) * a2
        g[0, 0] = -1.0
        dg = np.zeros((dim,) * 3)
        ddg = np.zeros((dim,) * 4)
        for i in range(1, dim):
            dg[0, i, i] = da2
            ddg[0, 0, i, i] = dda2
        return MetricJet2(dim, g, dg, ddg, Signature.LORENTZIAN)

    sc = Scenario(
        name="flrw_dust",
        kind=ScenarioKind.SPACETIME,
        dim=dim,
        metric=metric,
        time_orientation=_coordinate_time_field(dim),
        params={"dim": dim},
    )
    sc.energy_points = [
        np.concatenate(([0.8], np.zeros(ns))),
        np.concatenate(([1.0], 0.3 * np.ones(ns))),
        np.concatenate(([1.4], np.linspace(0, 1, ns))),
    ]
    return sc


_BUILDERS = {
    "minkowski": _build_minkowski,
    "minkowski_torus_quotient": _build_torus_quotient,
    "einstein_cylinder": _build_einstein_cylinder,
    "schwarzschild_slice_isotropic": _build_schwarzschild,
    "flrw_dust": _build_flrw_dust,
}


def scenario_names() -> list[str]:
    return sorted(_BUILDERS)


def build_scenario(name: str, params: Optional[dict] = None) -> Scenario:
    """Construct a named scenario; raises UnknownScenario / BadParams."""
    if name not in _BUILDERS:
        raise UnknownScenario(f"unknown scenario {name!r}; available: {scenario_names()}")
    return _BUILDERS[name](dict(params or {}))
