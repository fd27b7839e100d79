"""Closed-form transform rules, gauges, and dual derivatives.

The rule factories build oracles for the transform of a composite function
out of transforms of its pieces: positive scaling, composition with a
linear map, pointwise min/max, and k-th order statistics.  Rules whose
derivation passes through a pointwise maximum require every operand's base
function to be declared (or checked) ray-monotone; the others hold
unconditionally.  Each factory is the programmatic form of one rule
record: kind plus operand handles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import INF, ZERO, ExtPos
from .errors import (
    DegenerateNormalError,
    OriginNotInSetError,
    RadialityRequiredError,
    StrictnessViolatedError,
)
from .oracle import (
    DECLARED_UPPER,
    FunctionOracle,
    Provenance,
    RadialityMeta,
    Trilean,
    gradient,
)
from .sets import NormalVector
from .transform import DEFAULT_TOL, DualHandle, Sense

#: Denominators this close to zero (or positive) violate the strictness
#: precondition of the dual derivative formulas.
STRICTNESS_FLOOR = -1e-12


def _scaled(value: ExtPos, factor: float) -> ExtPos:
    if not value.is_finite:
        return value
    return ExtPos.finite(value.value * factor)


def rule_scale(lam: float, dual: FunctionOracle) -> FunctionOracle:
    """Transform of lam * f from the transform of f: y -> dual(lam y) / lam."""
    lam = float(lam)
    if not (lam > 0.0) or not math.isfinite(lam):
        raise ValueError("scale factor must be finite and > 0")

    def ev(y):
        return _scaled(dual.eval(lam * y), 1.0 / lam)

    return FunctionOracle(dual.dim, ev, meta=DECLARED_UPPER, name=f"scale({lam:g}, {dual.name})")


def rule_linear(a: np.ndarray, dual: FunctionOracle) -> FunctionOracle:
    """Transform of f composed with a linear map: y -> dual(A y)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] != dual.dim:
        raise ValueError(f"linear map has {a.shape[0]} rows, oracle dimension is {dual.dim}")

    def ev(y):
        return dual.eval(a @ y)

    return FunctionOracle(a.shape[1], ev, meta=DECLARED_UPPER, name=f"linear({dual.name})")


def _dual_operands(handles, op_name: str, gate: bool):
    handles = tuple(handles)
    if not handles:
        raise ValueError(f"{op_name} needs at least one operand")
    for h in handles:
        if not isinstance(h, DualHandle):
            raise TypeError(f"{op_name} operands must be DualHandles, got {type(h).__name__}")
    dims = {h.dim for h in handles}
    if len(dims) > 1:
        raise ValueError(f"{op_name} operands have mixed dimensions")
    if gate:
        for h in handles:
            if h.base.meta.upper_radial is not Trilean.YES:
                raise RadialityRequiredError(
                    f"{op_name} requires ray-monotone operands; "
                    f"{h.base.name or 'operand'} has upper_radial={h.base.meta.upper_radial.value}"
                )
    return handles


def rule_min(dual1: DualHandle, dual2: DualHandle) -> FunctionOracle:
    """Transform of min{f1, f2}: the pointwise max of the two transforms.
    Holds unconditionally."""
    d1, d2 = _dual_operands((dual1, dual2), "rule_min", gate=False)

    def ev(y):
        return max(d1.value(y), d2.value(y))

    return FunctionOracle(d1.dim, ev, meta=DECLARED_UPPER, name="min-rule")


def rule_max(dual1: DualHandle, dual2: DualHandle) -> FunctionOracle:
    """Transform of max{f1, f2}: the pointwise min of the two transforms.
    Requires both base functions ray-monotone."""
    d1, d2 = _dual_operands((dual1, dual2), "rule_max", gate=True)

    def ev(y):
        return min(d1.value(y), d2.value(y))

    return FunctionOracle(d1.dim, ev, meta=DECLARED_UPPER, name="max-rule")


class KthKind:
    KMIN = "kmin"
    KMAX = "kmax"
    KMINAVG = "kminavg"
    KMAXAVG = "kmaxavg"


def _avg_oracle(bases, idxs) -> FunctionOracle:
    k = len(idxs)
    chosen = [bases[i] for i in idxs]
    upper = all(b.meta.upper_radial is Trilean.YES for b in chosen)
    strictly = all(b.meta.strictly_radial is Trilean.YES for b in chosen)
    meta = RadialityMeta(
        Trilean.YES if upper else Trilean.UNKNOWN,
        Trilean.YES if upper and strictly else Trilean.UNKNOWN,
        Provenance.DECLARED,
    )

    def ev(x):
        total = 0.0
        for b in chosen:
            v = b.eval(x)
            if v.is_infinite:
                return INF
            total += v.as_float()
        return ExtPos.finite(total / k) if total > 0.0 else ZERO

    return FunctionOracle(chosen[0].dim, ev, meta=meta, name=f"avg{tuple(idxs)}")


def rule_kth(kind: str, k: int, duals, tol: float = DEFAULT_TOL) -> FunctionOracle:
    """Transform of a k-th order statistic of n functions.

    The k-th smallest of the primals transforms into the k-th largest of
    the operand transforms, and symmetrically for the k-th largest.  The
    averaged variants have no order-statistic shortcut: they expand into a
    min (resp. max) over subset averages, where each subset-average
    transform is evaluated by bisection on an oracle assembled from the
    operands' base functions.  Variants whose expansion passes through a
    pointwise max require ray-monotone operands.
    """
    if kind not in (KthKind.KMIN, KthKind.KMAX, KthKind.KMINAVG, KthKind.KMAXAVG):
        raise ValueError(f"unknown k-th rule kind {kind!r}")
    gate = kind in (KthKind.KMAX, KthKind.KMAXAVG) or (kind == KthKind.KMIN and k >= 2)
    handles = _dual_operands(duals, f"rule_kth({kind})", gate=gate)
    n = len(handles)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")

    if kind in (KthKind.KMIN, KthKind.KMAX):
        pick = n - k if kind == KthKind.KMIN else k - 1

        def ev(y):
            values = sorted(h.value(y) for h in handles)
            return values[pick]

        return FunctionOracle(handles[0].dim, ev, meta=DECLARED_UPPER, name=f"{kind}[{k}/{n}]")

    bases = [h.base for h in handles]
    subset_handles = [
        DualHandle(_avg_oracle(bases, idxs), Sense.UPPER, tol=tol)
        for idxs in itertools.combinations(range(n), k)
    ]
    outer = max if kind == KthKind.KMINAVG else min

    def ev(y):
        return outer(h.value(y) for h in subset_handles)

    return FunctionOracle(handles[0].dim, ev, meta=DECLARED_UPPER, name=f"{kind}[{k}/{n}]")


# -- gauges ---------------------------------------------------------------


@dataclass(frozen=True)
class SetOracle:
    """Membership handle for a set in decision space.  Gauge evaluation
    requires contains_origin (the caller asserts convexity)."""

    dim: int
    member: Callable[[np.ndarray], bool]
    contains_origin: bool


def indicator_oracle(s: SetOracle) -> FunctionOracle:
    """The indicator taking value +inf inside the set and 0 outside, so
    that intersecting a constraint means taking a pointwise min.  For a
    star-shaped set around the origin this is ray-monotone, which is what
    makes its transform a plain bisection."""

    def ev(x):
        return INF if s.member(x) else ZERO

    return FunctionOracle(s.dim, ev, meta=DECLARED_UPPER, name="indicator")


def gauge(
    s: SetOracle,
    y,
    tol: float = DEFAULT_TOL,
    v_min: float = 1e-12,
    v_max: float = 1e12,
) -> ExtPos:
    """inf{lam > 0 : y in lam S}, evaluated by the same bracketing as the
    upper transform applied to the indicator oracle.

    Zero exactly when y stays inside every shrinking copy of S down to the
    search floor (in particular at y = 0); infinite when y is outside every
    enlarged copy up to the cap.
    """
    if not s.contains_origin:
        raise OriginNotInSetError("gauge requires a set containing the origin")
    handle = DualHandle(indicator_oracle(s), Sense.UPPER, tol=tol, v_min=v_min, v_max=v_max)
    return handle.value(y)


def ball_set(dim: int, radius: float) -> SetOracle:
    if not radius > 0:
        raise ValueError("radius must be positive")
    return SetOracle(dim, lambda x: float(x @ x) <= radius * radius, True)


def box_set(lo: np.ndarray, hi: np.ndarray) -> SetOracle:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or not np.all(lo < hi):
        raise ValueError("box requires lo < hi componentwise")
    contains_origin = bool(np.all((lo <= 0.0) & (0.0 <= hi)))
    return SetOracle(lo.shape[0], lambda x: bool(np.all((x >= lo) & (x <= hi))), contains_origin)


def halfspace_set(a: np.ndarray, b: float) -> SetOracle:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    return SetOracle(a.shape[0], lambda x: float(a @ x) <= b, 0.0 <= b)


# -- dual derivatives ------------------------------------------------------


def _mapped_point(f: FunctionOracle, y, f_dual_y: float):
    f_dual_y = float(f_dual_y)
    if not (f_dual_y > 0.0) or not math.isfinite(f_dual_y):
        raise ValueError("dual value must be finite and > 0")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x = y / f_dual_y
    fx = f.eval(x)
    if not fx.is_finite:
        raise ValueError("mapped point y / dual(y) lies outside the effective domain")
    return x, fx.value


def dual_gradient(f: FunctionOracle, y, f_dual_y: float) -> np.ndarray:
    """Gradient of the transform at y from the gradient of f at the mapped
    point x = y / dual(y):  grad f(x) / (grad f(x).x - f(x)).

    The denominator is the strictness quantity; it must be strictly
    negative for the formula (and the transform's differentiability) to
    hold.  The dual value is an explicit argument so the caller controls
    the bisection tolerance once; the mapping amplifies its error when the
    dual value is small.
    """
    x, fx = _mapped_point(f, y, f_dual_y)
    g = np.atleast_1d(np.asarray(f.grad(x), dtype=float)) if f.grad is not None else gradient(f, x)
    denom = float(g @ x) - fx
    if denom >= STRICTNESS_FLOOR:
        raise StrictnessViolatedError(f"strictness denominator {denom:g} is not strictly negative")
    return g / denom


def dual_hessian(f: FunctionOracle, y, f_dual_y: float) -> np.ndarray:
    """Hessian of the transform at y:
    (f(x) / denom) * J hess(x) J^T with J = I - grad(x) x^T / denom."""
    x, fx = _mapped_point(f, y, f_dual_y)
    if f.hess is None:
        raise ValueError("dual_hessian requires an analytic Hessian callback")
    g = np.atleast_1d(np.asarray(f.grad(x), dtype=float)) if f.grad is not None else gradient(f, x)
    denom = float(g @ x) - fx
    if denom >= STRICTNESS_FLOOR:
        raise StrictnessViolatedError(f"strictness denominator {denom:g} is not strictly negative")
    h = np.asarray(f.hess(x), dtype=float)
    j = np.eye(f.dim) - np.outer(g, x) / denom
    out = (fx / denom) * (j @ h @ j.T)
    return 0.5 * (out + out.T)


def dual_subgradient(n: NormalVector) -> np.ndarray:
    """Map a normal (zeta, delta) of the hypograph of f at (x, f(x)) to the
    subgradient zeta / ((zeta, delta)^T (x, u)) of the transform at the
    transformed point.  Normals with a nonpositive pairing are excluded
    from the transformed subdifferential."""
    s = float(n.zeta @ n.at.x) + n.delta * n.at.u
    if s <= 0.0:
        raise DegenerateNormalError(f"pairing (zeta, delta)^T (x, u) = {s:g} must be > 0")
    return n.zeta / s


def general_transform(a: np.ndarray, alpha: np.ndarray, d: float, dual: FunctionOracle) -> FunctionOracle:
    """The unique epigraph-reshaping transform family beyond the basic one:
    value function y -> dual(A^{-1} (y - alpha)) / d, i.e. the reshaping
    whose point map is G(x, u) = (A x + alpha u, 1/d) / u (so that
    G^{-1}(y, v) = (A^{-1}(y - alpha), 1) / (d v))."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] != a.shape[1] or a.shape[0] != dual.dim:
        raise ValueError("A must be square with the oracle's dimension")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.shape != (dual.dim,):
        raise ValueError("alpha has the wrong dimension")
    d = float(d)
    if not (d > 0.0) or not math.isfinite(d):
        raise ValueError("d must be finite and > 0")
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("A must be invertible") from exc

    def ev(y):
        return _scaled(dual.eval(a_inv @ (y - alpha)), 1.0 / d)

    return FunctionOracle(dual.dim, ev, meta=DECLARED_UPPER, name=f"fractional({dual.name})")


def general_point_map(a: np.ndarray, alpha: np.ndarray, d: float, x: np.ndarray, u: float) -> tuple[np.ndarray, float]:
    """Apply the point map G(x, u) = (A x + alpha u, 1/d) / u paired with
    general_transform: it carries the epigraph of the base function into
    the hypograph of the transformed value function."""
    if not u > 0:
        raise ValueError("height must be positive")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return (a @ x + alpha * u) / u, 1.0 / (float(d) * u)
