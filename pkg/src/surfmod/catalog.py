"""Worked surface families with closed-form moduli.

Each constructor returns a :class:`CatalogEntry` bundling a
parametrized family, an optional submersion describing the same
surfaces as level sets, and the exact modulus as a function of the
exponent.  These entries anchor the test suite: the quadrature-based
computation must reproduce the closed forms, and the two computation
routes must agree on them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError, InconsistentSubmersion
from .family import (
    AmbientMap,
    BoxDomain,
    ParametrizedFamily,
    Submersion,
    compose,
    key_relation_residual,
)
from .modulus import conjugate_exponent, modulus_p
from .quadrature import QuadratureScheme

__all__ = [
    "CatalogEntry",
    "default_quadrature",
    "make_parallel",
    "make_shear",
    "make_polar_annulus",
    "make_pq_map",
    "make_condenser",
    "build_entry",
    "available_families",
    "standard_entries",
]

# Largest area-factor residual tolerated when probing that a catalog
# submersion really describes the family's surfaces.
_PROBE_TOL = 1e-5


def default_quadrature() -> QuadratureScheme:
    """Gauss-Legendre rule of order 12 on 4 cells per axis."""
    return QuadratureScheme(order=12, subdivisions=4, kind="gauss")


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """A named family together with its exact modulus.

    ``expected_modulus`` maps any exponent p > 1 to the closed-form
    modulus (for the condenser entry, to a direct numerical evaluation,
    since no closed form exists).  ``expected_density`` is the constant
    value of the extremal density as a function of p for families whose
    extremal density is constant, and None otherwise.  ``transverse``
    links to the family swept in the complementary directions when the
    construction provides one.
    """

    name: str
    family: ParametrizedFamily
    expected_modulus: Callable[[float], float]
    parameters: Mapping
    submersion: Submersion | None = None
    transverse: "CatalogEntry | None" = None
    expected_density: Callable[[float], float] | None = None


def _box(spec) -> BoxDomain:
    if isinstance(spec, BoxDomain):
        return spec
    bounds = np.atleast_2d(np.asarray(spec, dtype=float))
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise ValueError(
            "box argument must be a BoxDomain or a sequence of (lower, upper) pairs"
        )
    return BoxDomain(bounds[:, 0], bounds[:, 1])


def _bounds(box: BoxDomain) -> list:
    return [[float(lo), float(hi)] for lo, hi in zip(box.lower, box.upper)]


def _probe_consistency(fam: ParametrizedFamily, sub: Submersion, label: str):
    x_probes = np.vstack([fam.param_box.grid(2), fam.param_box.grid(1)])
    y_probes = np.vstack([fam.surface_box.grid(2), fam.surface_box.grid(1)])
    worst = 0.0
    for x in x_probes:
        for y in y_probes:
            worst = max(worst, key_relation_residual(fam, sub, x, y))
    if worst > _PROBE_TOL:
        raise InconsistentSubmersion(
            f"catalog entry {label!r}: area-factor residual {worst:.3e} exceeds "
            f"{_PROBE_TOL:.1e}"
        )


def make_parallel(param_box, surface_box) -> CatalogEntry:
    """Flat surfaces {x} x V swept by the identity map.

    Closed form: modulus_p = vol(U) * vol(V)^(1-p), attained by the
    constant density 1/vol(V).  The entry's ``transverse`` is the family
    of complementary slices U x {y}, with modulus vol(V) * vol(U)^(1-q)
    at the conjugate exponent.
    """
    u = _box(param_box)
    v = _box(surface_box)
    k, m = u.dim, v.dim
    n = k + m
    eye = np.eye(n)
    flip = np.zeros((n, n))
    flip[:k, m:] = np.eye(k)
    flip[k:, :m] = np.eye(m)

    family = ParametrizedFamily(
        n=n,
        m=m,
        param_box=u,
        surface_box=v,
        map=lambda x, y: np.concatenate([x, y]),
        jacobian=lambda x, y: eye,
    )
    sub = Submersion(
        n=n,
        k=k,
        map=lambda z: z[:k],
        jacobian=lambda z: eye[:k],
    )
    transverse_family = ParametrizedFamily(
        n=n,
        m=k,
        param_box=v,
        surface_box=u,
        map=lambda x, y: np.concatenate([y, x]),
        jacobian=lambda x, y: flip,
    )
    transverse_sub = Submersion(
        n=n,
        k=m,
        map=lambda z: z[k:],
        jacobian=lambda z: eye[k:],
    )
    transverse = CatalogEntry(
        name="parallel-transverse",
        family=transverse_family,
        expected_modulus=lambda e: v.volume * u.volume ** (1.0 - e),
        parameters={"u": _bounds(u), "v": _bounds(v)},
        submersion=transverse_sub,
        expected_density=lambda e: 1.0 / u.volume,
    )
    entry = CatalogEntry(
        name="parallel",
        family=family,
        expected_modulus=lambda e: u.volume * v.volume ** (1.0 - e),
        parameters={"u": _bounds(u), "v": _bounds(v)},
        submersion=sub,
        transverse=transverse,
        expected_density=lambda e: 1.0 / v.volume,
    )
    _probe_consistency(family, sub, "parallel")
    _probe_consistency(transverse_family, transverse_sub, "parallel-transverse")
    return entry


def make_shear(param_box, surface_box, shear) -> CatalogEntry:
    """Parallel surfaces tilted by a linear shear: (x, y) -> (x + S y, y).

    With G = S^T S + I, the closed form is

        modulus_p = vol(U) * vol(V)^(1-p) * det(G)^(-p/2),

    attained by the constant density 1 / (vol(V) * sqrt(det G)).  The
    shear matrix has one row per parameter axis and one column per
    surface axis.
    """
    u = _box(param_box)
    v = _box(surface_box)
    k, m = u.dim, v.dim
    n = k + m
    s = np.atleast_2d(np.asarray(shear, dtype=float))
    if s.shape != (k, m):
        raise ValueError(
            f"shear matrix must have shape ({k}, {m}) for these boxes, got {s.shape}"
        )
    gram_det = float(np.linalg.det(s.T @ s + np.eye(m)))

    jac = np.zeros((n, n))
    jac[:k, :k] = np.eye(k)
    jac[:k, k:] = s
    jac[k:, k:] = np.eye(m)
    sub_jac = np.zeros((k, n))
    sub_jac[:, :k] = np.eye(k)
    sub_jac[:, k:] = -s

    family = ParametrizedFamily(
        n=n,
        m=m,
        param_box=u,
        surface_box=v,
        map=lambda x, y: np.concatenate([x + s @ y, y]),
        jacobian=lambda x, y: jac,
    )
    sub = Submersion(
        n=n,
        k=k,
        map=lambda z: z[:k] - s @ z[k:],
        jacobian=lambda z: sub_jac,
    )
    entry = CatalogEntry(
        name="shear",
        family=family,
        expected_modulus=lambda e: u.volume
        * v.volume ** (1.0 - e)
        * gram_det ** (-e / 2.0),
        parameters={"u": _bounds(u), "v": _bounds(v), "b": s.tolist()},
        submersion=sub,
        expected_density=lambda e: 1.0 / (v.volume * np.sqrt(gram_det)),
    )
    _probe_consistency(family, sub, "shear")
    return entry


def _annulus_radial(inner: float, outer: float) -> CatalogEntry:
    u = _box([(0.0, 2.0 * np.pi)])
    v = _box([(inner, outer)])

    def polar_map(x, y):
        return np.array([y[0] * np.cos(x[0]), y[0] * np.sin(x[0])])

    def polar_jac(x, y):
        c, sn = np.cos(x[0]), np.sin(x[0])
        return np.array([[-y[0] * sn, c], [y[0] * c, sn]])

    def angle(z):
        return np.array([np.arctan2(z[1], z[0]) % (2.0 * np.pi)])

    def angle_jac(z):
        rr = z[0] ** 2 + z[1] ** 2
        return np.array([[-z[1] / rr, z[0] / rr]])

    def expected(e):
        q = conjugate_exponent(e)
        if abs(q - 2.0) < 1e-8:
            weight = np.log(outer / inner)
        else:
            weight = (outer ** (2.0 - q) - inner ** (2.0 - q)) / (2.0 - q)
        return 2.0 * np.pi * weight ** (1.0 - e)

    family = ParametrizedFamily(
        n=2, m=1, param_box=u, surface_box=v, map=polar_map, jacobian=polar_jac
    )
    sub = Submersion(n=2, k=1, map=angle, jacobian=angle_jac)
    return CatalogEntry(
        name="annulus-radial",
        family=family,
        expected_modulus=expected,
        parameters={"r0": float(inner), "r1": float(outer)},
        submersion=sub,
    )


def _annulus_circular(inner: float, outer: float) -> CatalogEntry:
    u = _box([(inner, outer)])
    v = _box([(0.0, 2.0 * np.pi)])

    def polar_map(x, y):
        return np.array([x[0] * np.cos(y[0]), x[0] * np.sin(y[0])])

    def polar_jac(x, y):
        c, sn = np.cos(y[0]), np.sin(y[0])
        return np.array([[c, -x[0] * sn], [sn, x[0] * c]])

    def radius(z):
        return np.array([np.hypot(z[0], z[1])])

    def radius_jac(z):
        r = np.hypot(z[0], z[1])
        return np.array([[z[0] / r, z[1] / r]])

    def expected(e):
        if abs(e - 2.0) < 1e-8:
            weight = np.log(outer / inner)
        else:
            weight = (outer ** (2.0 - e) - inner ** (2.0 - e)) / (2.0 - e)
        return (2.0 * np.pi) ** (1.0 - e) * weight

    family = ParametrizedFamily(
        n=2, m=1, param_box=u, surface_box=v, map=polar_map, jacobian=polar_jac
    )
    sub = Submersion(n=2, k=1, map=radius, jacobian=radius_jac)
    return CatalogEntry(
        name="annulus-circular",
        family=family,
        expected_modulus=expected,
        parameters={"r0": float(inner), "r1": float(outer)},
        submersion=sub,
    )


def make_polar_annulus(inner_radius: float, outer_radius: float, mode: str = "radial") -> CatalogEntry:
    """Annulus families in the plane: radial segments or concentric circles.

    mode="radial" sweeps the segments {angle fixed, radius in (r0, r1)};
    at p=2 the modulus is 2*pi / log(r1/r0) and the extremal density is
    1 / (|z| log(r1/r0)).  mode="circular" sweeps the concentric circles
    and at p=2 yields the reciprocal-type value log(r1/r0) / (2*pi).
    Each entry's ``transverse`` is the other one.
    """
    inner = float(inner_radius)
    outer = float(outer_radius)
    if not (np.isfinite(inner) and np.isfinite(outer)) or not 0.0 < inner < outer:
        raise ValueError(f"radii must satisfy 0 < r0 < r1, got ({inner_radius}, {outer_radius})")
    if mode not in ("radial", "circular"):
        raise ValueError(f"mode must be 'radial' or 'circular', got {mode!r}")
    radial = _annulus_radial(inner, outer)
    circular = _annulus_circular(inner, outer)
    _probe_consistency(radial.family, radial.submersion, "annulus-radial")
    _probe_consistency(circular.family, circular.submersion, "annulus-circular")
    if mode == "radial":
        return replace(radial, transverse=replace(circular, transverse=radial))
    return replace(circular, transverse=replace(radial, transverse=circular))


def make_pq_map(p: float, scale: float = 2.0, param_box=((0.0, 1.0),), surface_box=((0.0, 1.0),)) -> CatalogEntry:
    """Planar linear family whose two directional area factors are conjugate.

    The map (x, y) -> (a x, b y) with a = scale^(1/q), b = scale^(1/p)
    satisfies a^q = b^p = a*b = |det J|, which makes the surface weight
    of the vertical family equal to vol(V) and that of the horizontal
    transverse family equal to vol(U).  Consequently

        modulus_p(vertical) = vol(U) * vol(V)^(1-p),
        modulus_q(horizontal) = vol(V) * vol(U)^(1-q),

    and the product of the 1/p and 1/q powers is exactly one.
    """
    p = float(p)
    q = conjugate_exponent(p)
    scale = float(scale)
    if not scale > 0.0:
        raise ValueError(f"scale must be positive, got {scale}")
    u = _box(param_box)
    v = _box(surface_box)
    if u.dim != 1 or v.dim != 1:
        raise ValueError("this construction is planar; both boxes must be 1-d")
    a = scale ** (1.0 / q)
    b = scale ** (1.0 / p)

    jac = np.array([[a, 0.0], [0.0, b]])
    flip = np.array([[0.0, a], [b, 0.0]])

    family = ParametrizedFamily(
        n=2,
        m=1,
        param_box=u,
        surface_box=v,
        map=lambda x, y: np.array([a * x[0], b * y[0]]),
        jacobian=lambda x, y: jac,
    )
    sub = Submersion(
        n=2, k=1, map=lambda z: np.array([z[0] / a]), jacobian=lambda z: np.array([[1.0 / a, 0.0]])
    )
    transverse_family = ParametrizedFamily(
        n=2,
        m=1,
        param_box=v,
        surface_box=u,
        map=lambda x, y: np.array([a * y[0], b * x[0]]),
        jacobian=lambda x, y: flip,
    )
    transverse_sub = Submersion(
        n=2, k=1, map=lambda z: np.array([z[1] / b]), jacobian=lambda z: np.array([[0.0, 1.0 / b]])
    )

    def expected_vertical(e):
        conj = conjugate_exponent(e)
        weight = v.volume * b * a ** (1.0 - conj)
        return u.volume * weight ** (1.0 - e)

    def expected_horizontal(e):
        conj = conjugate_exponent(e)
        weight = u.volume * a * b ** (1.0 - conj)
        return v.volume * weight ** (1.0 - e)

    transverse = CatalogEntry(
        name="pq-map-transverse",
        family=transverse_family,
        expected_modulus=expected_horizontal,
        parameters={"p": p, "scale": scale},
        submersion=transverse_sub,
    )
    entry = CatalogEntry(
        name="pq-map",
        family=family,
        expected_modulus=expected_vertical,
        parameters={"p": p, "scale": scale},
        submersion=sub,
        transverse=transverse,
    )
    _probe_consistency(family, sub, "pq-map")
    _probe_consistency(transverse_family, transverse_sub, "pq-map-transverse")
    return entry


def make_condenser(base: ParametrizedFamily, outer: AmbientMap, quad: QuadratureScheme | None = None) -> CatalogEntry:
    """Image of a family under a diffeomorphism of the ambient space.

    The composed map parametrizes the image family directly, with the
    chain rule supplying its Jacobian.  No closed form exists in
    general, so ``expected_modulus`` evaluates the composed family with
    the reduction formula at the given (default: catalog default)
    quadrature; tests compare it against special cases and the discrete
    oracle.
    """
    if isinstance(base, CatalogEntry):
        base = base.family
    composed = compose(base, outer)
    quad = quad or default_quadrature()
    return CatalogEntry(
        name="condenser",
        family=composed,
        expected_modulus=lambda e: modulus_p(composed, e, quad).modulus,
        parameters={},
    )


# -- registry for the command-line front end ---------------------------

_FAMILY_NAMES = (
    "parallel",
    "shear",
    "annulus-radial",
    "annulus-circular",
    "pq-map",
    "condenser",
)


def available_families() -> tuple:
    """Names accepted by :func:`build_entry`."""
    return _FAMILY_NAMES


def build_entry(name: str, parameters: Mapping | None = None, p: float = 2.0) -> CatalogEntry:
    """Build a catalog entry by name with a flat parameter mapping.

    Unknown names and malformed parameters raise ConfigError so the
    command-line layer can report them as configuration problems.
    """
    params = dict(parameters or {})
    try:
        if name == "parallel":
            return make_parallel(params.get("u", [(0.0, 1.0)]), params.get("v", [(0.0, 1.0)]))
        if name == "shear":
            u = _box(params.get("u", [(0.0, 1.0)]))
            v = _box(params.get("v", [(0.0, 1.0)]))
            shear = params.get("b", np.ones((u.dim, v.dim)))
            return make_shear(u, v, shear)
        if name == "annulus-radial":
            return make_polar_annulus(params.get("r0", 1.0), params.get("r1", 2.0), mode="radial")
        if name == "annulus-circular":
            return make_polar_annulus(params.get("r0", 1.0), params.get("r1", 2.0), mode="circular")
        if name == "pq-map":
            return make_pq_map(params.get("p", p), scale=params.get("scale", 2.0))
        if name == "condenser":
            sx = float(params.get("sx", 2.0))
            sy = float(params.get("sy", 1.0))
            base = make_parallel([(0.0, 1.0)], [(0.0, 1.0)]).family
            diag = np.array([[sx, 0.0], [0.0, sy]])
            outer = AmbientMap(n=2, map=lambda z: diag @ z, jacobian=lambda z: diag)
            return make_condenser(base, outer)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid parameters for family {name!r}: {exc}") from exc
    raise ConfigError(
        f"unknown family {name!r}; choose one of {', '.join(_FAMILY_NAMES)}"
    )


def standard_entries(include_condenser: bool = False) -> list:
    """The canonical entries used throughout the test suite."""
    entries = [
        make_parallel([(0.0, 2.0)], [(0.0, 3.0)]),
        make_shear([(0.0, 1.0)], [(0.0, 1.0)], [[1.0]]),
        make_polar_annulus(1.0, 2.0, mode="radial"),
        make_polar_annulus(1.0, 2.0, mode="circular"),
        make_pq_map(2.0),
    ]
    if include_condenser:
        entries.append(build_entry("condenser"))
    return entries
