"""Parametrized families of surfaces and their Jacobian blocks.

A family is described by a map f defined on a product of two boxes
U x V in R^{n-m} x R^m and taking values in R^n.  For each parameter
value x in U, the slice y -> f(x, y) parametrizes one m-dimensional
surface; sweeping x over U produces the whole family.  The Jacobian of
f splits into an x-block (how surfaces move as the parameter varies)
and a y-block (how each surface is stretched internally), and most of
the modulus machinery is built from the determinant of the full matrix
together with the generalized norm of the y-block.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import DegenerateJacobian, EvaluationFailure
from .linalg import generalized_norm

__all__ = [
    "BoxDomain",
    "ParametrizedFamily",
    "Submersion",
    "AmbientMap",
    "jacobian_full",
    "jacobian_partial_x",
    "jacobian_partial_y",
    "submersion_jacobian",
    "key_relation_residual",
    "compose",
]

# Central-difference step scale: cube root of machine epsilon balances
# truncation against rounding for second-order-accurate differences.
_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Open axis-aligned box, stored as per-axis lower and upper bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("box bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("each lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, point, margin: float = 0.0) -> bool:
        """True if ``point`` lies inside the open box, inset by ``margin``."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        pad = margin * self.widths
        return bool(
            np.all(point > self.lower + pad) and np.all(point < self.upper - pad)
        )

    def grid(self, per_axis: int, inset: float = 0.0) -> np.ndarray:
        """Uniform grid of cell midpoints, ``per_axis`` points on each axis.

        With ``inset`` > 0 the grid is built on the box shrunk by that
        fraction of its width on every side.
        """
        lo = self.lower + inset * self.widths
        hi = self.upper - inset * self.widths
        axes = [
            lo[i] + (hi[i] - lo[i]) * (np.arange(per_axis) + 0.5) / per_axis
            for i in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)


@dataclass(frozen=True, eq=False)
class ParametrizedFamily:
    """Family of m-dimensional surfaces in R^n swept by a parametrizing map.

    Attributes
    ----------
    n : int
        Ambient dimension.
    m : int
        Dimension of each surface, 1 <= m <= n-1.
    param_box : BoxDomain
        Parameter box U of dimension n-m; one surface per point of U.
    surface_box : BoxDomain
        Coordinate box V of dimension m on which every surface is
        parametrized.
    map : callable
        ``map(x, y) -> array of shape (n,)`` with x in U, y in V.
    jacobian : callable or None
        Optional analytic Jacobian ``jacobian(x, y) -> (n, n) array``
        with columns ordered as the n-m x-derivatives followed by the m
        y-derivatives.  When absent, central finite differences are used.

    The map is expected to be injective with nonvanishing Jacobian
    determinant; this is not checked at construction and violations
    surface as DegenerateJacobian errors in downstream operations.
    """

    n: int
    m: int
    param_box: BoxDomain
    surface_box: BoxDomain
    map: Callable
    jacobian: Callable | None = None

    def __post_init__(self):
        if not 1 <= self.m <= self.n - 1:
            raise ValueError(f"need 1 <= m <= n-1, got n={self.n}, m={self.m}")
        if self.param_box.dim != self.n - self.m:
            raise ValueError(
                f"parameter box has dimension {self.param_box.dim}, expected {self.n - self.m}"
            )
        if self.surface_box.dim != self.m:
            raise ValueError(
                f"surface box has dimension {self.surface_box.dim}, expected {self.m}"
            )


@dataclass(frozen=True, eq=False)
class Submersion:
    """Map F from R^n onto R^k whose level sets are (n-k)-surfaces.

    ``map(z) -> array of shape (k,)``; the optional analytic ``jacobian``
    returns the (k, n) derivative matrix at z.  The differential is
    expected to have full rank wherever it is evaluated.
    """

    n: int
    k: int
    map: Callable
    jacobian: Callable | None = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise ValueError(f"need 1 <= k <= n-1, got n={self.n}, k={self.k}")


@dataclass(frozen=True, eq=False)
class AmbientMap:
    """Diffeomorphism of R^n used to push a family forward.

    ``map(z) -> array of shape (n,)``; optional ``jacobian(z) -> (n, n)``.
    """

    n: int
    map: Callable
    jacobian: Callable | None = None


def _point(vec, dim: int, label: str) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(vec, dtype=float))
    if vec.shape != (dim,):
        raise ValueError(f"{label} must have shape ({dim},), got {vec.shape}")
    return vec


def evaluate_map(fam: ParametrizedFamily, x, y) -> np.ndarray:
    """Evaluate fam.map with shape and finiteness checks."""
    x = _point(x, fam.n - fam.m, "x")
    y = _point(y, fam.m, "y")
    z = np.asarray(fam.map(x, y), dtype=float)
    if z.shape != (fam.n,):
        raise EvaluationFailure(
            f"map returned shape {z.shape}, expected ({fam.n},)"
        )
    if not np.all(np.isfinite(z)):
        raise EvaluationFailure(f"map returned non-finite values at x={x}, y={y}")
    return z


def _fd_columns(func, w0, lower, upper, coords, out_dim):
    """Central-difference derivative columns of ``func`` at ``w0``.

    One column per index in ``coords``.  When bounds are given, the
    differencing center is clamped so both sample points stay inside the
    open box (the derivative is then taken at the inset point, an O(h)
    perturbation that preserves second-order accuracy in the interior).
    """
    cols = np.empty((out_dim, len(coords)))
    for pos, j in enumerate(coords):
        h = _FD_STEP * max(1.0, abs(w0[j]))
        center = w0[j]
        if lower is not None:
            if lower[j] + h > upper[j] - h:
                raise EvaluationFailure(
                    f"axis {j} is too narrow for finite differences"
                )
            center = min(max(center, lower[j] + h), upper[j] - h)
        wp = w0.copy()
        wm = w0.copy()
        wp[j] = center + h
        wm[j] = center - h
        cols[:, pos] = (func(wp) - func(wm)) / (wp[j] - wm[j])
    return cols


def _family_fd(fam: ParametrizedFamily, x, y, coords) -> np.ndarray:
    k = fam.n - fam.m
    w0 = np.concatenate([x, y])
    lower = np.concatenate([fam.param_box.lower, fam.surface_box.lower])
    upper = np.concatenate([fam.param_box.upper, fam.surface_box.upper])
    func = lambda w: evaluate_map(fam, w[:k], w[k:])
    return _fd_columns(func, w0, lower, upper, coords, fam.n)


def _analytic_jacobian(fam: ParametrizedFamily, x, y) -> np.ndarray:
    jac = np.asarray(fam.jacobian(x, y), dtype=float)
    if jac.shape != (fam.n, fam.n):
        raise EvaluationFailure(
            f"jacobian returned shape {jac.shape}, expected ({fam.n}, {fam.n})"
        )
    if not np.all(np.isfinite(jac)):
        raise EvaluationFailure(f"jacobian returned non-finite values at x={x}, y={y}")
    return jac


def jacobian_full(fam: ParametrizedFamily, x, y) -> np.ndarray:
    """Full (n, n) Jacobian of the parametrizing map at (x, y).

    Columns are ordered as the n-m derivatives along the parameter axes
    followed by the m derivatives along the surface axes.  Uses the
    analytic Jacobian when the family carries one, otherwise central
    finite differences with per-axis steps scaled to the coordinate
    magnitude and inset at the box boundary.
    """
    x = _point(x, fam.n - fam.m, "x")
    y = _point(y, fam.m, "y")
    if fam.jacobian is not None:
        return _analytic_jacobian(fam, x, y)
    return _family_fd(fam, x, y, range(fam.n))


def jacobian_partial_x(fam: ParametrizedFamily, x, y) -> np.ndarray:
    """The n x (n-m) block of x-derivative columns of the map."""
    x = _point(x, fam.n - fam.m, "x")
    y = _point(y, fam.m, "y")
    if fam.jacobian is not None:
        return _analytic_jacobian(fam, x, y)[:, : fam.n - fam.m]
    return _family_fd(fam, x, y, range(fam.n - fam.m))


def jacobian_partial_y(fam: ParametrizedFamily, x, y) -> np.ndarray:
    """The n x m block of y-derivative columns of the map.

    Its generalized norm is the m-dimensional area-distortion factor of
    the surface through x at the point y.
    """
    x = _point(x, fam.n - fam.m, "x")
    y = _point(y, fam.m, "y")
    if fam.jacobian is not None:
        return _analytic_jacobian(fam, x, y)[:, fam.n - fam.m :]
    return _family_fd(fam, x, y, range(fam.n - fam.m, fam.n))


def submersion_jacobian(sub: Submersion, z) -> np.ndarray:
    """The (k, n) derivative matrix of a submersion at the ambient point z."""
    z = _point(z, sub.n, "z")

    def func(w):
        val = np.asarray(sub.map(w), dtype=float)
        val = np.atleast_1d(val)
        if val.shape != (sub.k,):
            raise EvaluationFailure(
                f"submersion returned shape {val.shape}, expected ({sub.k},)"
            )
        if not np.all(np.isfinite(val)):
            raise EvaluationFailure(f"submersion returned non-finite values at z={w}")
        return val

    if sub.jacobian is not None:
        jac = np.atleast_2d(np.asarray(sub.jacobian(z), dtype=float))
        if jac.shape != (sub.k, sub.n):
            raise EvaluationFailure(
                f"submersion jacobian has shape {jac.shape}, expected ({sub.k}, {sub.n})"
            )
        if not np.all(np.isfinite(jac)):
            raise EvaluationFailure(
                f"submersion jacobian returned non-finite values at z={z}"
            )
        return jac
    return _fd_columns(func, z.copy(), None, None, range(sub.n), sub.k)


def key_relation_residual(fam: ParametrizedFamily, sub: Submersion, x, y) -> float:
    """Relative defect of the area-factor identity tying a family to a submersion.

    When the level sets of ``sub`` are exactly the surfaces of ``fam``,
    the y-block area factor of the map coincides with |det Df| times the
    generalized norm of the submersion's derivative at the image point.
    The returned residual is |lhs - rhs| / lhs with lhs the y-block
    factor; it is zero (up to rounding or finite-difference error) for
    consistent pairs.
    """
    if sub.n != fam.n or sub.k != fam.n - fam.m:
        raise ValueError(
            f"submersion of shape ({sub.n} -> {sub.k}) does not match a family "
            f"with n={fam.n}, m={fam.m}"
        )
    x = _point(x, fam.n - fam.m, "x")
    y = _point(y, fam.m, "y")
    full = jacobian_full(fam, x, y)
    area = generalized_norm(full[:, fam.n - fam.m :])
    if not area > 1e-300:
        raise DegenerateJacobian(f"surface area factor vanishes at x={x}, y={y}")
    det = abs(float(np.linalg.det(full)))
    z = evaluate_map(fam, x, y)
    grad = generalized_norm(submersion_jacobian(sub, z))
    return abs(area - det * grad) / area


def compose(fam: ParametrizedFamily, outer: AmbientMap) -> ParametrizedFamily:
    """Push a family forward through a diffeomorphism of the ambient space.

    The image family keeps the same parameter and surface boxes; its map
    is the composition, and when both factors carry analytic Jacobians
    the chain rule provides one for the composition too.
    """
    if outer.n != fam.n:
        raise ValueError(
            f"ambient map acts on R^{outer.n} but the family lives in R^{fam.n}"
        )

    def composed(x, y):
        return np.asarray(outer.map(evaluate_map(fam, x, y)), dtype=float)

    jac = None
    if fam.jacobian is not None and outer.jacobian is not None:
        def jac(x, y, _fam=fam, _outer=outer):
            z = evaluate_map(_fam, x, y)
            return np.asarray(_outer.jacobian(z), dtype=float) @ _analytic_jacobian(
                _fam, x, y
            )

    return replace(fam, map=composed, jacobian=jac)
