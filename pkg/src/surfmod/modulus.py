"""p-modulus of a surface family and its extremal density.

Everything here rests on one reduction.  Write the full Jacobian
determinant of the parametrizing map as J and the area factor of the
y-block as A.  The weight of one surface is

    l(x) = integral over V of (A / J)^q * J dy,

with q the conjugate exponent of p, and the p-modulus of the family is
the integral over U of l(x)^(1-p) dx.  The infimum over admissible
densities is attained by

    density(x, y) = (1 / l(x)) * (A / J)^(q-1),

expressed here in parameter coordinates; composing with the inverse map
gives the ambient form.  Admissibility means every surface integral of
the density is at least one, and the Hoelder inequality shows no
admissible competitor can have smaller p-energy.

An alternative route starts from a submersion whose level sets are the
surfaces; both are implemented and cross-checked.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateJacobian,
    InconsistentSubmersion,
    InversionFailure,
    NonFiniteIntegrand,
)
from .family import (
    BoxDomain,
    ParametrizedFamily,
    Submersion,
    evaluate_map,
    jacobian_full,
    key_relation_residual,
    submersion_jacobian,
)
from .linalg import generalized_norm
from .quadrature import QuadratureScheme

__all__ = [
    "ModulusReport",
    "ExtremalDensity",
    "conjugate_exponent",
    "jacobian_floor",
    "l_of_x",
    "modulus_p",
    "extremal_density",
    "admissibility_check",
    "coarea_check",
    "submersion_modulus",
    "extremality_probe",
]

# Exponents this close to 1 make the conjugate exponent blow up; reject them.
_MIN_P_GAP = 1e-9

# Relative factor applied to the median |det J| of a probe grid; nodes
# below the resulting floor are treated as degenerate.
_DEGENERACY_FACTOR = 1e-12

# l(x) values below this are numerically meaningless underflow.
_L_FLOOR = 1e-300


def conjugate_exponent(p: float) -> float:
    """Conjugate exponent q with 1/p + 1/q = 1.  Requires p > 1."""
    p = float(p)
    if not np.isfinite(p) or p <= 1.0 + _MIN_P_GAP:
        raise ValueError(f"exponent p must exceed 1, got p={p}")
    return p / (p - 1.0)


def jacobian_floor(fam: ParametrizedFamily, probes_per_axis: int = 5) -> float:
    """Degeneracy threshold for |det J| on this family.

    The median of |det J| over a coarse interior grid sets the scale;
    quadrature nodes whose determinant falls below a tiny fraction of it
    are reported as degenerate rather than silently amplified by the
    q-power in the integrand.
    """
    x_grid = fam.param_box.grid(probes_per_axis)
    y_grid = fam.surface_box.grid(probes_per_axis)
    vals = []
    for x in x_grid:
        for y in y_grid:
            vals.append(abs(float(np.linalg.det(jacobian_full(fam, x, y)))))
    return _DEGENERACY_FACTOR * float(np.median(vals))


def _l_at(fam, x, q, nodes, weights, floor):
    """Surface weight l(x) plus the smallest |det J| seen on the way."""
    split = fam.n - fam.m
    total = 0.0
    min_det = np.inf
    for y, w in zip(nodes, weights):
        full = jacobian_full(fam, x, y)
        det = abs(float(np.linalg.det(full)))
        if det <= floor:
            raise DegenerateJacobian(
                f"|det J| = {det:.3e} at x={x}, y={y} is below the degeneracy "
                f"floor {floor:.3e}"
            )
        min_det = min(min_det, det)
        area = generalized_norm(full[:, split:])
        try:
            value = (area / det) ** q * det
        except OverflowError:
            value = np.inf
        if not np.isfinite(value):
            raise NonFiniteIntegrand(
                f"surface-weight integrand is non-finite at x={x}, y={y}"
            )
        total += w * value
    return total, min_det


def l_of_x(
    fam: ParametrizedFamily,
    x,
    p: float,
    quad: QuadratureScheme,
    floor: float | None = None,
) -> float:
    """Weight of the surface through parameter x.

    Parameters
    ----------
    fam : ParametrizedFamily
    x : array_like
        Parameter point in the family's parameter box.
    p : float
        Modulus exponent, p > 1.
    quad : QuadratureScheme
        Rule used on the surface coordinate box.
    floor : float, optional
        Precomputed degeneracy threshold; computed from a probe grid
        when omitted.

    Returns
    -------
    float
        integral over V of (area factor / |det J|)^q * |det J| dy, with
        q conjugate to p.
    """
    q = conjugate_exponent(p)
    if floor is None:
        floor = jacobian_floor(fam)
    nodes, weights = quad.box_rule(fam.surface_box)
    value, _ = _l_at(fam, np.atleast_1d(np.asarray(x, float)), q, nodes, weights, floor)
    return value


@dataclass(frozen=True)
class ModulusReport:
    """Result of a modulus computation.

    ``l_samples`` holds one (parameter point, surface weight) pair per
    outer quadrature node, ``min_jacobian`` the smallest |det J| visited,
    and ``node_count`` the total number of integrand evaluations.
    """

    p: float
    q: float
    modulus: float
    l_samples: tuple
    min_jacobian: float
    node_count: int

    def __post_init__(self):
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
            raise ValueError(f"p={self.p} and q={self.q} are not conjugate")
        if not all(l > 0.0 for _, l in self.l_samples):
            raise ValueError("every sampled surface weight must be positive")


def modulus_p(
    fam: ParametrizedFamily,
    p: float,
    quad: QuadratureScheme,
    threads: int | None = None,
) -> ModulusReport:
    """p-modulus of the family by the closed-form reduction.

    Integrates l(x)^(1-p) over the parameter box, where l is the surface
    weight computed by :func:`l_of_x` with the same quadrature scheme on
    the surface box.

    Parameters
    ----------
    fam : ParametrizedFamily
    p : float
        Exponent, p > 1.
    quad : QuadratureScheme
        Used for both the outer (parameter) and inner (surface) integrals.
    threads : int, optional
        When > 1, surface weights at distinct outer nodes are computed in
        a thread pool of at most this many workers.  Results and their
        order are identical to the serial path.
    """
    q = conjugate_exponent(p)
    floor = jacobian_floor(fam)
    x_nodes, x_weights = quad.box_rule(fam.param_box)
    y_nodes, y_weights = quad.box_rule(fam.surface_box)

    def weight_at(x):
        return _l_at(fam, x, q, y_nodes, y_weights, floor)

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(weight_at, x_nodes))
    else:
        results = [weight_at(x) for x in x_nodes]

    modulus = 0.0
    min_det = np.inf
    samples = []
    for (x, w), (l_val, node_min) in zip(zip(x_nodes, x_weights), results):
        if not np.isfinite(l_val) or l_val < _L_FLOOR:
            raise NonFiniteIntegrand(
                f"surface weight l(x) = {l_val!r} at x={x} is unusable"
            )
        samples.append((tuple(float(c) for c in x), float(l_val)))
        modulus += w * l_val ** (1.0 - p)
        min_det = min(min_det, node_min)
    if not np.isfinite(modulus):
        raise NonFiniteIntegrand("modulus integral is non-finite")
    return ModulusReport(
        p=float(p),
        q=float(q),
        modulus=float(modulus),
        l_samples=tuple(samples),
        min_jacobian=float(min_det),
        node_count=len(x_nodes) * len(y_nodes),
    )


class ExtremalDensity:
    """Minimizing density of the p-energy among admissible densities.

    Instances are built by :func:`extremal_density`.  The density can be
    evaluated in parameter coordinates through :meth:`evaluate_param` or
    at ambient points through :meth:`evaluate_ambient`; the latter uses a
    user-supplied inverse of the parametrizing map when one is given and
    otherwise falls back to damped Newton iteration seeded from a coarse
    forward grid.
    """

    def __init__(
        self,
        family: ParametrizedFamily,
        p: float,
        quad: QuadratureScheme,
        inverse=None,
        tabulate: bool = False,
        table_points: int = 33,
    ):
        self.family = family
        self.p = float(p)
        self.q = conjugate_exponent(p)
        self.inverse = inverse
        self._floor = jacobian_floor(family)
        self._inner_nodes, self._inner_weights = quad.box_rule(family.surface_box)
        self._cache: dict[bytes, float] = {}
        self._interp = None
        if tabulate:
            self._build_table(table_points)
        self._seed_params = None
        self._seed_images = None
        self._diameter = None

    # -- surface weight ------------------------------------------------

    def _build_table(self, table_points: int):
        from scipy.interpolate import RegularGridInterpolator

        box = self.family.param_box
        axes = [
            np.linspace(box.lower[i], box.upper[i], table_points)
            for i in range(box.dim)
        ]
        # Clamp the grid just inside the open box so map evaluation stays legal.
        for i, axis in enumerate(axes):
            pad = 1e-9 * (box.upper[i] - box.lower[i])
            axis[0] += pad
            axis[-1] -= pad
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([g.ravel() for g in mesh], axis=-1)
        values = np.array([self._compute_l(x) for x in points]).reshape(
            [table_points] * box.dim
        )
        self._interp = RegularGridInterpolator(axes, values, method="linear")

    def _compute_l(self, x):
        value, _ = _l_at(
            self.family, x, self.q, self._inner_nodes, self._inner_weights, self._floor
        )
        if not np.isfinite(value) or value < _L_FLOOR:
            raise NonFiniteIntegrand(f"surface weight l(x) = {value!r} is unusable")
        return value

    def l_value(self, x) -> float:
        """Surface weight l(x), interpolated if tabulation was requested."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self._interp is not None:
            return float(self._interp(x)[0])
        key = x.tobytes()
        if key not in self._cache:
            self._cache[key] = self._compute_l(x)
        return self._cache[key]

    # -- evaluation ----------------------------------------------------

    def evaluate_param(self, x, y) -> float:
        """Density value at the surface point with parameter coordinates (x, y)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        full = jacobian_full(self.family, x, y)
        det = abs(float(np.linalg.det(full)))
        if det <= self._floor:
            raise DegenerateJacobian(
                f"|det J| = {det:.3e} at x={x}, y={y} is below the degeneracy floor"
            )
        area = generalized_norm(full[:, self.family.n - self.family.m :])
        try:
            return (area / det) ** (self.q - 1.0) / self.l_value(x)
        except OverflowError as exc:
            raise NonFiniteIntegrand(
                f"density value overflows at x={x}, y={y}"
            ) from exc

    def evaluate_ambient(self, z) -> float:
        """Density value at an ambient point of the swept region."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if self.inverse is not None:
            x, y = self.inverse(z)
        else:
            x, y = self._invert(z)
        return self.evaluate_param(x, y)

    # -- Newton inversion ----------------------------------------------

    def _ensure_seeds(self):
        if self._seed_params is not None:
            return
        fam = self.family
        per_axis = 8
        x_grid = fam.param_box.grid(per_axis)
        y_grid = fam.surface_box.grid(per_axis)
        params = []
        images = []
        for x in x_grid:
            for y in y_grid:
                params.append(np.concatenate([x, y]))
                images.append(evaluate_map(fam, x, y))
        self._seed_params = np.array(params)
        self._seed_images = np.array(images)
        span = self._seed_images.max(axis=0) - self._seed_images.min(axis=0)
        self._diameter = float(np.linalg.norm(span))

    def _invert(self, z):
        self._ensure_seeds()
        fam = self.family
        split = fam.n - fam.m
        lower = np.concatenate([fam.param_box.lower, fam.surface_box.lower])
        upper = np.concatenate([fam.param_box.upper, fam.surface_box.upper])
        inset = 1e-9 * (upper - lower)
        tol = 1e-10 * self._diameter

        start = int(np.argmin(np.sum((self._seed_images - z) ** 2, axis=1)))
        w = self._seed_params[start].copy()
        residual = evaluate_map(fam, w[:split], w[split:]) - z
        norm = float(np.linalg.norm(residual))
        for _ in range(50):
            if norm <= tol:
                return w[:split].copy(), w[split:].copy()
            jac = jacobian_full(fam, w[:split], w[split:])
            try:
                step = np.linalg.solve(jac, -residual)
            except np.linalg.LinAlgError as exc:
                raise InversionFailure(
                    f"Jacobian is singular during inversion at {w}"
                ) from exc
            scale = 1.0
            for _ in range(30):
                trial = np.clip(w + scale * step, lower + inset, upper - inset)
                trial_residual = evaluate_map(fam, trial[:split], trial[split:]) - z
                trial_norm = float(np.linalg.norm(trial_residual))
                if trial_norm < norm:
                    w, residual, norm = trial, trial_residual, trial_norm
                    break
                scale *= 0.5
            else:
                raise InversionFailure(
                    f"damped Newton stalled at residual {norm:.3e} for z={z}"
                )
        if norm <= tol:
            return w[:split].copy(), w[split:].copy()
        raise InversionFailure(
            f"no convergence after 50 Newton iterations for z={z} (residual {norm:.3e})"
        )


def extremal_density(
    fam: ParametrizedFamily,
    p: float,
    quad: QuadratureScheme,
    inverse=None,
    tabulate: bool = False,
    table_points: int = 33,
) -> ExtremalDensity:
    """Construct the extremal density of the family for exponent p.

    ``inverse``, when given, must map an ambient point z to the pair
    (x, y) of parameter coordinates with map(x, y) = z.  With
    ``tabulate=True`` the surface weight l is precomputed on a uniform
    grid of ``table_points`` per axis and evaluated by linear
    interpolation; by default it is recomputed (and cached) on demand.
    """
    return ExtremalDensity(
        fam, p, quad, inverse=inverse, tabulate=tabulate, table_points=table_points
    )


def admissibility_check(
    fam: ParametrizedFamily,
    density: ExtremalDensity,
    quad: QuadratureScheme,
    x_samples,
) -> list:
    """Surface integrals of a density over the surfaces through ``x_samples``.

    Each returned entry is (x, integral); admissibility of the extremal
    density shows up as integrals equal to one up to quadrature error.
    """
    nodes, weights = quad.box_rule(fam.surface_box)
    split = fam.n - fam.m
    out = []
    for x in x_samples:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        total = 0.0
        for y, w in zip(nodes, weights):
            area = generalized_norm(jacobian_full(fam, x, y)[:, split:])
            total += w * density.evaluate_param(x, y) * area
        out.append((x.copy(), float(total)))
    return out


def coarea_check(
    fam: ParametrizedFamily,
    sub: Submersion,
    integrand,
    quad: QuadratureScheme,
) -> tuple[float, float]:
    """Both sides of the change-of-variables identity for a scalar integrand g.

    The left side integrates g times the submersion's area factor over
    the swept region (pulled back through the map); the right side first
    integrates g over each surface and then over the parameter box.  For
    a consistent (family, submersion) pair the two agree up to
    quadrature and rounding error.
    """
    if sub.n != fam.n or sub.k != fam.n - fam.m:
        raise ValueError("submersion dimensions do not match the family")
    x_nodes, x_weights = quad.box_rule(fam.param_box)
    y_nodes, y_weights = quad.box_rule(fam.surface_box)
    split = fam.n - fam.m
    lhs = 0.0
    rhs = 0.0
    for x, wx in zip(x_nodes, x_weights):
        for y, wy in zip(y_nodes, y_weights):
            full = jacobian_full(fam, x, y)
            det = abs(float(np.linalg.det(full)))
            area = generalized_norm(full[:, split:])
            z = evaluate_map(fam, x, y)
            g = float(integrand(z))
            grad = generalized_norm(submersion_jacobian(sub, z))
            lhs += wx * wy * g * grad * det
            rhs += wx * wy * g * area
    return float(lhs), float(rhs)


def submersion_modulus(
    sub: Submersion,
    levelset_param: ParametrizedFamily,
    p: float,
    quad: QuadratureScheme,
    residual_tol: float = 1e-4,
) -> ModulusReport:
    """p-modulus computed through a submersion describing the level sets.

    The surface weight is obtained by integrating the (q-1) power of the
    submersion's area factor over each level set; consistency of the
    submersion with the parametrization is probed first and an
    InconsistentSubmersion error is raised when the area-factor identity
    fails at any probe point.
    """
    q = conjugate_exponent(p)
    fam = levelset_param
    if sub.n != fam.n or sub.k != fam.n - fam.m:
        raise ValueError("submersion dimensions do not match the level-set family")

    x_probes = np.vstack([fam.param_box.grid(2), fam.param_box.grid(1)])
    y_probes = np.vstack([fam.surface_box.grid(2), fam.surface_box.grid(1)])
    worst = 0.0
    for x in x_probes:
        for y in y_probes:
            worst = max(worst, key_relation_residual(fam, sub, x, y))
    if worst > residual_tol:
        raise InconsistentSubmersion(
            f"area-factor residual {worst:.3e} exceeds {residual_tol:.1e}; the "
            f"submersion's level sets do not match the family"
        )

    floor = jacobian_floor(fam)
    x_nodes, x_weights = quad.box_rule(fam.param_box)
    y_nodes, y_weights = quad.box_rule(fam.surface_box)
    split = fam.n - fam.m
    modulus = 0.0
    min_det = np.inf
    samples = []
    for x, wx in zip(x_nodes, x_weights):
        level_weight = 0.0
        for y, wy in zip(y_nodes, y_weights):
            full = jacobian_full(fam, x, y)
            det = abs(float(np.linalg.det(full)))
            if det <= floor:
                raise DegenerateJacobian(
                    f"|det J| = {det:.3e} at x={x}, y={y} is below the degeneracy floor"
                )
            min_det = min(min_det, det)
            area = generalized_norm(full[:, split:])
            z = evaluate_map(fam, x, y)
            grad = generalized_norm(submersion_jacobian(sub, z))
            if not grad > 0.0:
                raise DegenerateJacobian(
                    f"submersion differential is rank-deficient at z={z}"
                )
            level_weight += wy * grad ** (q - 1.0) * area
        if not np.isfinite(level_weight) or level_weight < _L_FLOOR:
            raise NonFiniteIntegrand(
                f"level-set weight {level_weight!r} at x={x} is unusable"
            )
        samples.append((tuple(float(c) for c in x), float(level_weight)))
        modulus += wx * level_weight ** (1.0 - p)
    return ModulusReport(
        p=float(p),
        q=float(q),
        modulus=float(modulus),
        l_samples=tuple(samples),
        min_jacobian=float(min_det),
        node_count=len(x_nodes) * len(y_nodes),
    )


def extremality_probe(
    fam: ParametrizedFamily,
    p: float,
    quad: QuadratureScheme,
    trials: int = 50,
    seed: int = 0,
    amplitude: float = 0.3,
) -> float:
    """Worst p-energy gap of random admissible competitors.

    Each trial perturbs the extremal density by a product of low-order
    cosine waves in the parameter coordinates, with amplitude capped at
    ``amplitude`` times the density's minimum over the quadrature nodes
    (so competitors stay positive), then rescales by the smallest surface
    integral to restore admissibility and evaluates the p-energy by
    pullback.  Returns min over trials of (competitor energy - modulus);
    extremality of the density makes this nonnegative up to rounding.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    q = conjugate_exponent(p)
    floor = jacobian_floor(fam)
    x_nodes, x_weights = quad.box_rule(fam.param_box)
    y_nodes, y_weights = quad.box_rule(fam.surface_box)
    split = fam.n - fam.m

    dets = np.empty((len(x_nodes), len(y_nodes)))
    areas = np.empty_like(dets)
    for i, x in enumerate(x_nodes):
        for j, y in enumerate(y_nodes):
            full = jacobian_full(fam, x, y)
            det = abs(float(np.linalg.det(full)))
            if det <= floor:
                raise DegenerateJacobian(
                    f"|det J| = {det:.3e} at x={x}, y={y} is below the degeneracy floor"
                )
            dets[i, j] = det
            areas[i, j] = generalized_norm(full[:, split:])

    l_vals = ((areas / dets) ** q * dets) @ y_weights
    if not (np.all(np.isfinite(l_vals)) and np.all(l_vals >= _L_FLOOR)):
        raise NonFiniteIntegrand("a sampled surface weight is unusable")
    modulus = float(x_weights @ l_vals ** (1.0 - p))
    density = (areas / dets) ** (q - 1.0) / l_vals[:, None]
    floor_value = float(density.min())

    # Normalized coordinates of the nodes, for building the cosine waves.
    u_box, v_box = fam.param_box, fam.surface_box
    tx = (x_nodes - u_box.lower) / u_box.widths
    ty = (y_nodes - v_box.lower) / v_box.widths

    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(trials):
        orders = rng.integers(1, 4, size=fam.n)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=fam.n)
        amp = amplitude * floor_value * rng.uniform(0.1, 1.0)
        wave_x = np.ones(len(x_nodes))
        for axis in range(u_box.dim):
            wave_x *= np.cos(2.0 * np.pi * orders[axis] * tx[:, axis] + phases[axis])
        wave_y = np.ones(len(y_nodes))
        for axis in range(v_box.dim):
            wave_y *= np.cos(
                2.0 * np.pi * orders[u_box.dim + axis] * ty[:, axis]
                + phases[u_box.dim + axis]
            )
        competitor = density + amp * np.outer(wave_x, wave_y)
        surface_integrals = (competitor * areas) @ y_weights
        competitor = competitor / surface_integrals.min()
        energy = float(x_weights @ ((competitor**p * dets) @ y_weights))
        worst = min(worst, energy - modulus)
    return float(worst)
