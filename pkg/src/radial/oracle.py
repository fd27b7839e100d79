"""Function oracles over the extended positive reals.

A FunctionOracle is an evaluation handle for f mapping vectors to extended
positive values, total on the whole space (value zero outside the
effective domain, never an exception), with optional analytic gradient
and Hessian callbacks that are only queried where the value is finite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import ExtPos
from .errors import NotDifferentiableError, OverflowRiskError


class Trilean(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class Provenance(enum.Enum):
    DECLARED = "declared"
    CHECKED = "checked"


@dataclass(frozen=True)
class RadialityMeta:
    """What is known about ray-monotonicity of the perspective profile."""

    upper_radial: Trilean = Trilean.UNKNOWN
    strictly_radial: Trilean = Trilean.UNKNOWN
    provenance: Provenance = Provenance.DECLARED

    def __post_init__(self):
        if self.strictly_radial is Trilean.YES and self.upper_radial is not Trilean.YES:
            raise ValueError("strictly_radial = YES implies upper_radial = YES")


UNKNOWN_META = RadialityMeta()
DECLARED_STRICT = RadialityMeta(Trilean.YES, Trilean.YES, Provenance.DECLARED)
DECLARED_UPPER = RadialityMeta(Trilean.YES, Trilean.UNKNOWN, Provenance.DECLARED)


class FunctionOracle:
    """Evaluation handle for f: R^dim -> {0} | (0, inf) | {inf}.

    eval_fn must accept a 1-D float array of length dim and return ExtPos.
    Oracles are immutable after construction and callbacks must be
    reentrant; concurrent evaluation over grids is permitted.
    """

    def __init__(self, dim, eval_fn, grad=None, hess=None, meta=UNKNOWN_META, name=None):
        if int(dim) < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        self._eval_fn = eval_fn
        self.grad = grad
        self.hess = hess
        self.meta = meta
        self.name = name

    def eval(self, x) -> ExtPos:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x[None]
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        value = self._eval_fn(x)
        if not isinstance(value, ExtPos):
            raise TypeError(f"oracle callback must return ExtPos, got {type(value).__name__}")
        return value

    __call__ = eval

    def with_meta(self, meta: RadialityMeta) -> "FunctionOracle":
        return FunctionOracle(self.dim, self._eval_fn, self.grad, self.hess, meta, self.name)

    def gradient(self, x) -> np.ndarray:
        return gradient(self, x)

    def __repr__(self):
        label = self.name or "<callback>"
        return f"FunctionOracle(dim={self.dim}, {label})"


def perspective(f: FunctionOracle, y, v: float) -> ExtPos:
    """The profile v * f(y/v) for v > 0, with tag conventions:
    f(y/v) = inf gives inf and f(y/v) = 0 gives 0 regardless of v."""
    v = float(v)
    if not (v > 0.0) or not math.isfinite(v):
        raise ValueError(f"perspective height must be finite and > 0, got {v!r}")
    y = np.asarray(y, dtype=float)
    value = f.eval(y / v)
    if not value.is_finite:
        return value
    scaled = v * value.value
    if scaled == 0.0 or math.isinf(scaled):
        raise OverflowRiskError(f"perspective product {v!r} * {value.value!r} left the finite range")
    return ExtPos.finite(scaled)


#: Relative disagreement between one-sided difference quotients above which
#: the point is reported as not differentiable.
FD_AGREEMENT = 1e-3


def _fd_step(t: float) -> float:
    return max(1e-6, 1e-8 * abs(t))


def gradient(f: FunctionOracle, x) -> np.ndarray:
    """Gradient of f at an interior point: the analytic callback if present,
    otherwise central differences with per-coordinate step
    h = max(1e-6, 1e-8 |x_i|).

    The fallback compares forward and backward quotients first and raises
    NotDifferentiableError when they disagree by more than 1e-3 relative to
    max(1, |quotients|), or when a probed value is not finite.  Boundary
    points are therefore reported rather than extrapolated.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    f0 = f.eval(x)
    if f0.is_infinite:
        raise ValueError("gradient requires a point with finite value")
    if f.grad is not None:
        return np.atleast_1d(np.asarray(f.grad(x), dtype=float))

    # The zero tag is a legitimate value (kinks like |x| at the origin are
    # reported by the quotient disagreement below, not rejected up front).
    base = f0.as_float()
    out = np.empty(f.dim)
    for i in range(f.dim):
        h = _fd_step(x[i])
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        fp = f.eval(xp).as_float()
        fm = f.eval(xm).as_float()
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NotDifferentiableError(f"non-finite probe next to coordinate {i}")
        forward = (fp - base) / h
        backward = (base - fm) / h
        scale = max(1.0, abs(forward), abs(backward))
        if abs(forward - backward) > FD_AGREEMENT * scale:
            raise NotDifferentiableError(
                f"one-sided quotients disagree at coordinate {i}: {forward:g} vs {backward:g}"
            )
        out[i] = (fp - fm) / (2.0 * h)
    return out
