"""Heisenberg group structure on R^{2n+1}.

Points are stored as coordinate arrays ``(x_1..x_n, y_1..y_n, t)``.  Every
function here accepts either a :class:`HeisenbergPoint` or a numpy array whose
last axis has length ``2n + 1`` (so batches of points broadcast naturally).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "HeisenbergPoint",
    "VectorFieldId",
    "group_mul",
    "group_inv",
    "dilate",
    "koranyi_norm",
    "koranyi_dist",
    "apply_vector_field",
    "horizontal_gradient",
    "heisenberg_index",
    "homogeneous_dimension",
]


@dataclass(frozen=True)
class HeisenbergPoint:
    """A point ``(x, y, t)`` of the Heisenberg group H^n."""

    x: tuple
    y: tuple
    t: float

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y) or len(x) < 1:
            raise ValueError("x and y must have the same length n >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.isfinite(self.t)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_coords(cls, coords) -> "HeisenbergPoint":
        c = np.asarray(coords, dtype=float)
        if c.ndim != 1 or c.size % 2 != 1 or c.size < 3:
            raise ValueError(f"expected 2n+1 coordinates, got shape {c.shape}")
        n = (c.size - 1) // 2
        return cls(c[:n], c[n:2 * n], c[-1])

    @classmethod
    def identity(cls, n: int = 1) -> "HeisenbergPoint":
        return cls((0.0,) * n, (0.0,) * n, 0.0)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def coords(self) -> np.ndarray:
        return np.array(self.x + self.y + (self.t,))

    def __mul__(self, other: "HeisenbergPoint") -> "HeisenbergPoint":
        return group_mul(self, other)

    def inv(self) -> "HeisenbergPoint":
        return group_inv(self)

    def norm(self) -> float:
        return koranyi_norm(self)


PointLike = Union[HeisenbergPoint, np.ndarray]


@dataclass(frozen=True)
class VectorFieldId:
    """One of the left-invariant fields ``X_i``, ``Y_i`` (1-based ``i``) or ``T``."""

    kind: str
    index: int | None = None

    def __post_init__(self):
        if self.kind not in ("X", "Y", "T"):
            raise ValueError(f"unknown vector field kind {self.kind!r}")
        if self.kind == "T":
            if self.index is not None:
                raise ValueError("T takes no index")
        elif self.index is None or self.index < 1:
            raise ValueError(f"{self.kind} needs an index >= 1")

    def check(self, n: int) -> None:
        if self.index is not None and self.index > n:
            raise ValueError(f"{self.kind}_{self.index} out of range for n={n}")


def _as_array(p: PointLike) -> np.ndarray:
    if isinstance(p, HeisenbergPoint):
        return p.coords
    a = np.asarray(p, dtype=float)
    if a.shape[-1] % 2 != 1 or a.shape[-1] < 3:
        raise ValueError(f"last axis must have length 2n+1, got {a.shape[-1]}")
    return a


def _wrap(result: np.ndarray, *inputs) -> PointLike:
    if any(isinstance(p, HeisenbergPoint) for p in inputs):
        return HeisenbergPoint.from_coords(result)
    return result


def heisenberg_index(p: PointLike) -> int:
    """Return ``n`` for a point (or batch) of H^n."""
    return (_as_array(p).shape[-1] - 1) // 2


def homogeneous_dimension(n: int) -> int:
    return 2 * n + 2


def _symplectic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = (a.shape[-1] - 1) // 2
    return 0.5 * np.sum(a[..., :n] * b[..., n:2 * n] - a[..., n:2 * n] * b[..., :n], axis=-1)


def group_mul(p: PointLike, q: PointLike) -> PointLike:
    """Group product ``p . q``."""
    a, b = _as_array(p), _as_array(q)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError("points belong to Heisenberg groups of different dimension")
    out = a + b
    out[..., -1] = a[..., -1] + b[..., -1] + _symplectic(a, b)
    return _wrap(out, p, q)


def group_inv(p: PointLike) -> PointLike:
    return _wrap(-_as_array(p), p)


def dilate(lam, p: PointLike) -> PointLike:
    """Heisenberg dilation ``delta_lam(z, t) = (lam z, lam^2 t)``.

    ``lam`` may be an array broadcasting against the point batch shape, one
    factor per point.
    """
    lam = np.asarray(lam, dtype=float)
    if not np.all(lam > 0):
        raise ValueError("dilation factor must be positive")
    lam = lam[..., None]
    out = _as_array(p) * lam
    out[..., -1:] *= lam
    return _wrap(out, p)


def koranyi_norm(p: PointLike):
    """Koranyi gauge ``(|z|^4 + 16 t^2)^(1/4)``."""
    a = _as_array(p)
    # factor out the homogeneous size so |z|^4 neither underflows nor overflows
    m = np.maximum(np.max(np.abs(a[..., :-1]), axis=-1), np.sqrt(np.abs(a[..., -1])))
    safe = np.where(m > 0, m, 1.0)
    z2 = np.sum((a[..., :-1] / safe[..., None]) ** 2, axis=-1)
    tt = a[..., -1] / safe / safe
    val = m * (z2 * z2 + 16.0 * tt * tt) ** 0.25
    return float(val) if np.ndim(val) == 0 else val


def koranyi_dist(p: PointLike, q: PointLike):
    """Left-invariant distance ``d(p, q) = ||q^{-1} p||``."""
    a, b = _as_array(p), _as_array(q)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError("points belong to Heisenberg groups of different dimension")
    return koranyi_norm(group_mul(-b, a))


def _default_step(a: np.ndarray) -> float:
    return 1e-5 * max(1.0, float(np.max(np.abs(a))))


def _partial(func: Callable, a: np.ndarray, axis: int, h: float) -> float:
    e = np.zeros_like(a)
    e[axis] = h
    fp, fm = func(a + e), func(a - e)
    if not (np.isfinite(fp) and np.isfinite(fm)):
        raise FloatingPointError("non-finite function value in finite difference")
    return float(np.real(fp - fm)) / (2 * h)


def _evaluator(f) -> Callable:
    return f.evaluate if hasattr(f, "evaluate") else f


def apply_vector_field(f, v: VectorFieldId, p: PointLike, h: float | None = None) -> float:
    """Apply a left-invariant vector field to ``f`` at ``p``.

    Uses the coordinate formulas ``X_i = d/dx_i - (y_i/2) d/dt``,
    ``Y_i = d/dy_i + (x_i/2) d/dt`` and ``T = d/dt`` with central differences
    of step ``h`` on each Euclidean partial.

    Parameters
    ----------
    f : CallableField or callable
        Anything with ``evaluate(coords)`` or a plain callable on coordinate arrays.
    v : VectorFieldId
    p : HeisenbergPoint or array
    h : float, optional
        Difference step; defaults to ``1e-5 * max(1, |p|_inf)``.
    """
    a = _as_array(p).astype(float)
    n = (a.size - 1) // 2
    v.check(n)
    if h is None:
        h = _default_step(a)
    if not (1e-8 <= h <= 1e-2):
        raise ValueError("finite-difference step must lie in [1e-8, 1e-2]")
    func = _evaluator(f)
    dt = _partial(func, a, 2 * n, h)
    if v.kind == "T":
        return dt
    i = v.index - 1
    if v.kind == "X":
        return _partial(func, a, i, h) - 0.5 * a[n + i] * dt
    return _partial(func, a, n + i, h) + 0.5 * a[i] * dt


def horizontal_gradient(f, p: PointLike, h: float | None = None) -> np.ndarray:
    """``(X_1 f, .., X_n f, Y_1 f, .., Y_n f)`` at ``p``."""
    n = heisenberg_index(p)
    fields = [VectorFieldId("X", i) for i in range(1, n + 1)]
    fields += [VectorFieldId("Y", i) for i in range(1, n + 1)]
    return np.array([apply_vector_field(f, v, p, h) for v in fields])
