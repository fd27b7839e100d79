"""Exact transformation of halfspaces, polyhedra, ellipsoids, and normals.

All sets live in the lifted space (vectors paired with positive heights)
and are closed under the projective point transform.  The transforms here
are exact formulas, not sampling approximations; membership predicates use
strict arithmetic with tolerance zero and serve as the sampling oracles in
the test suite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import LiftedPoint, gamma_point
from .errors import SchemaError

SCHEMA_VERSION = "radial/v1"

#: Pivot threshold factor for the positive-definiteness certificate.
PIVOT_FACTOR = 1e-12


def positive_definite_pivots(m: np.ndarray, pivot_factor: float = PIVOT_FACTOR) -> bool:
    """Certify positive definiteness by a symmetric (Cholesky-style)
    factorization, requiring every pivot to exceed pivot_factor * trace.

    Deterministic and dimension-independent; returns False instead of
    raising so callers can phrase their own errors.
    """
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        return False
    threshold = pivot_factor * float(np.trace(a))
    for k in range(n):
        pivot = a[k, k]
        if not (pivot > threshold):
            return False
        root = math.sqrt(pivot)
        a[k, k:] /= root
        for j in range(k + 1, n):
            a[j, j:] -= a[k, j] * a[k, j:]
    return True


def _check_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    scale = max(1.0, float(np.max(np.abs(m))))
    if float(np.max(np.abs(m - m.T))) > 1e-12 * scale:
        raise ValueError(f"{name} must be symmetric")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class Halfspace:
    """The set {(x', u') : (zeta, delta)^T ((x', u') - anchor) <= 0},
    intersected with the positive-height slab.

    Anchored representation: the transform formula is stated at an anchor
    point, and keeping the anchor makes the double transform exact.
    """

    normal_x: np.ndarray
    normal_u: float
    anchor: LiftedPoint

    def __post_init__(self):
        zeta = np.atleast_1d(np.asarray(self.normal_x, dtype=float))
        if zeta.ndim != 1 or not np.all(np.isfinite(zeta)):
            raise ValueError("normal_x must be a finite vector")
        delta = float(self.normal_u)
        if not math.isfinite(delta):
            raise ValueError("normal_u must be finite")
        if np.all(zeta == 0.0) and delta == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        if zeta.shape[0] != self.anchor.dim:
            raise ValueError("normal and anchor dimensions differ")
        zeta = zeta.copy()
        zeta.flags.writeable = False
        object.__setattr__(self, "normal_x", zeta)
        object.__setattr__(self, "normal_u", delta)

    @property
    def dim(self) -> int:
        return self.anchor.dim

    def contains(self, p: LiftedPoint) -> bool:
        gap = float(self.normal_x @ (p.x - self.anchor.x)) + self.normal_u * (p.u - self.anchor.u)
        return gap <= 0.0


@dataclass(frozen=True)
class Ellipsoid:
    """The set {(x', u') : ((x', u') - center)^T H ((x', u') - center) <= 1}
    for a symmetric positive definite shape H over the lifted space.

    Canonical radius is fixed at 1; rescaling (H, radius) simultaneously
    describes the same set.  The ellipsoid must lie entirely at positive
    heights, which is equivalent to the Schur-complement bound
    H22 - H12^T H11^{-1} H12 > 1/u^2 at the center height u.
    """

    center: LiftedPoint
    shape: np.ndarray

    def __post_init__(self):
        n = self.center.dim
        h = _check_symmetric(self.shape, "shape")
        if h.shape != (n + 1, n + 1):
            raise ValueError("shape must be (dim+1) x (dim+1)")
        if not positive_definite_pivots(h):
            raise ValueError("shape matrix is not positive definite")
        h11 = h[:n, :n]
        h12 = h[:n, n]
        h22 = h[n, n]
        schur = h22 - float(h12 @ np.linalg.solve(h11, h12))
        if not schur * self.center.u**2 > 1.0:
            raise ValueError(
                "ellipsoid is not contained in the positive-height halfspace: "
                f"need H22 - H12^T H11^-1 H12 > 1/u^2, got {schur:g} <= {1.0 / self.center.u ** 2:g}"
            )
        h = h.copy()
        h.flags.writeable = False
        object.__setattr__(self, "shape", h)

    @property
    def dim(self) -> int:
        return self.center.dim

    def contains(self, p: LiftedPoint) -> bool:
        d = p.as_array() - self.center.as_array()
        return float(d @ self.shape @ d) <= 1.0


@dataclass(frozen=True)
class Polyhedron:
    """Intersection of finitely many halfspaces with the positive-height
    slab.  An empty list denotes the whole slab."""

    halfspaces: tuple[Halfspace, ...]

    def __post_init__(self):
        hs = tuple(self.halfspaces)
        dims = {h.dim for h in hs}
        if len(dims) > 1:
            raise ValueError("halfspaces have mixed dimensions")
        object.__setattr__(self, "halfspaces", hs)

    def contains(self, p: LiftedPoint) -> bool:
        return all(h.contains(p) for h in self.halfspaces)


class NormalKind(enum.Enum):
    CONVEX = "convex"
    PROXIMAL = "proximal"


@dataclass(frozen=True)
class NormalVector:
    """An outward normal (zeta, delta) of a set at the lifted point `at`.

    Whether `at` actually lies in the set it is a normal of is the
    caller's responsibility; the tests assert it via membership oracles.
    """

    zeta: np.ndarray
    delta: float
    kind: NormalKind
    at: LiftedPoint

    def __post_init__(self):
        zeta = np.atleast_1d(np.asarray(self.zeta, dtype=float))
        if zeta.ndim != 1 or not np.all(np.isfinite(zeta)):
            raise ValueError("zeta must be a finite vector")
        delta = float(self.delta)
        if not math.isfinite(delta):
            raise ValueError("delta must be finite")
        if np.all(zeta == 0.0) and delta == 0.0:
            raise ValueError("normal vector must be nonzero")
        if zeta.shape[0] != self.at.dim:
            raise ValueError("normal and point dimensions differ")
        zeta = zeta.copy()
        zeta.flags.writeable = False
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "delta", delta)


def _dual_normal(zeta: np.ndarray, delta: float, at: LiftedPoint) -> tuple[np.ndarray, float]:
    # (zeta, delta) at (x, u)  ->  (zeta, -(zeta, delta)^T (x, u))
    return zeta, -(float(zeta @ at.x) + delta * at.u)


def transform_halfspace(h: Halfspace) -> Halfspace:
    """Image of a halfspace under the point transform: the halfspace with
    normal (zeta, -(zeta, delta)^T (x, u)) anchored at the transformed
    anchor.  Membership is preserved pointwise, and applying the transform
    twice reproduces the original normal and anchor exactly up to round-off.
    """
    zeta, delta = _dual_normal(h.normal_x, h.normal_u, h.anchor)
    return Halfspace(zeta, delta, gamma_point(h.anchor))


def transform_polyhedron(p: Polyhedron) -> Polyhedron:
    """Halfspace-wise image; the transform distributes over intersections,
    so this equals the image of the intersection."""
    return Polyhedron(tuple(transform_halfspace(h) for h in p.halfspaces))


def transform_normal(n: NormalVector) -> NormalVector:
    """Map a convex or proximal normal through the point transform.

    The image normal is (zeta, -(zeta, delta)^T (x, u)) of the same kind at
    the transformed point.  It can never vanish: zeta = 0 forces delta != 0
    at construction, and then the new height component is -delta * u != 0.
    """
    zeta, delta = _dual_normal(n.zeta, n.delta, n.at)
    return NormalVector(zeta, delta, n.kind, gamma_point(n.at))


def _dual_ellipsoid_pieces(h: np.ndarray, x: np.ndarray, u: float):
    """The block matrix driving the ellipsoid transform, plus the linear
    part of the transformed quadratic.  Split out so the positive
    definiteness boundary can be probed on raw data in tests."""
    n = x.shape[0]
    h11 = h[:n, :n]
    h12 = h[:n, n]
    h22 = h[n, n]
    z = np.concatenate([x, [u]])
    col = h11 @ x + h12 * u
    g = np.empty((n + 1, n + 1))
    g[:n, :n] = h11
    g[:n, n] = -col
    g[n, :n] = -col
    g[n, n] = float(z @ h @ z) - 1.0
    rhs = np.concatenate([-h12, [float(h12 @ x) + h22 * u]])
    return g, rhs, h22


def transform_ellipsoid(e: Ellipsoid) -> Ellipsoid:
    """Exact image of an ellipsoid under the point transform.

    The image is again an ellipsoid, with center G^{-1} (-H12, H12^T x + H22 u)
    and shape G / ((y, v)^T G (y, v) - H22); its center is not the transformed
    center point.  G is positive definite exactly when the containment
    invariant holds, which the constructor guarantees.
    """
    g, rhs, h22 = _dual_ellipsoid_pieces(e.shape, e.center.x, e.center.u)
    if not positive_definite_pivots(g):
        raise ValueError("transform produced a non-definite quadratic; containment violated")
    c = np.linalg.solve(g, rhs)
    denom = float(c @ g @ c) - h22
    if not denom > 0.0:
        raise ValueError("transformed ellipsoid has empty interior; containment violated")
    n = e.dim
    return Ellipsoid(LiftedPoint(c[:n], float(c[n])), g / denom)


def membership(p: LiftedPoint, s) -> bool:
    """Exact membership predicate (tolerance 0, boundary included)."""
    if isinstance(s, (Halfspace, Ellipsoid, Polyhedron)):
        return s.contains(p)
    raise TypeError(f"unsupported set type {type(s).__name__}")


# --- JSON schemas (radial/v1) used by the CLI set-transform subcommand ---


def _point_to_json(p: LiftedPoint) -> dict:
    return {"x": [float(v) for v in p.x], "u": p.u}


def _point_from_json(obj) -> LiftedPoint:
    try:
        return LiftedPoint(np.asarray(obj["x"], dtype=float), float(obj["u"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad lifted point: {exc}") from exc


def set_to_json(s) -> dict:
    """Encode a set as a radial/v1 JSON document (matrices row-major)."""
    if isinstance(s, Halfspace):
        return {
            "schema": SCHEMA_VERSION,
            "type": "halfspace",
            "normal_x": [float(v) for v in s.normal_x],
            "normal_u": s.normal_u,
            "anchor": _point_to_json(s.anchor),
        }
    if isinstance(s, Ellipsoid):
        return {
            "schema": SCHEMA_VERSION,
            "type": "ellipsoid",
            "center": _point_to_json(s.center),
            "shape": [[float(v) for v in row] for row in s.shape],
        }
    if isinstance(s, Polyhedron):
        return {
            "schema": SCHEMA_VERSION,
            "type": "polyhedron",
            "halfspaces": [set_to_json(h) for h in s.halfspaces],
        }
    raise TypeError(f"unsupported set type {type(s).__name__}")


def set_from_json(obj) -> Halfspace | Ellipsoid | Polyhedron:
    """Decode a radial/v1 set document, raising SchemaError on violations."""
    if not isinstance(obj, dict):
        raise SchemaError("set document must be a JSON object")
    if obj.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f'missing or unsupported "schema" (expected "{SCHEMA_VERSION}")')
    kind = obj.get("type")
    try:
        if kind == "halfspace":
            return Halfspace(
                np.asarray(obj["normal_x"], dtype=float),
                float(obj["normal_u"]),
                _point_from_json(obj["anchor"]),
            )
        if kind == "ellipsoid":
            return Ellipsoid(_point_from_json(obj["center"]), np.asarray(obj["shape"], dtype=float))
        if kind == "polyhedron":
            parts = obj["halfspaces"]
            if not isinstance(parts, list):
                raise SchemaError("halfspaces must be a list")
            return Polyhedron(tuple(set_from_json(h) for h in parts))
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad {kind} document: {exc}") from exc
    raise SchemaError(f"unknown set type {kind!r}")


def transform_set(s):
    if isinstance(s, Halfspace):
        return transform_halfspace(s)
    if isinstance(s, Ellipsoid):
        return transform_ellipsoid(s)
    if isinstance(s, Polyhedron):
        return transform_polyhedron(s)
    raise TypeError(f"unsupported set type {type(s).__name__}")
