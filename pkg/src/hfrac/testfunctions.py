"""Closed-form test functions and a sampler for the region near the centre."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .fields import CallableField
from .geometry import group_inv, group_mul, koranyi_norm

__all__ = [
    "gaussian",
    "sheared_gaussian",
    "breathing_gaussian",
    "bump",
    "bump_wave",
    "vertical_wave",
    "lipschitz_cap",
    "translated",
    "dilated",
    "default_family",
    "random_smooth_field",
    "OmegaSampler",
]


def _z2(c: np.ndarray) -> np.ndarray:
    return np.sum(c[..., :-1] ** 2, axis=-1)


def gaussian(a: float = 1.0, b: float = 1.0, n: int = 1) -> CallableField:
    """``exp(-a |z|^2 - b t^2)``."""
    if a <= 0 or b <= 0:
        raise ValueError("gaussian parameters must be positive")
    return CallableField(lambda c: np.exp(-a * _z2(c) - b * c[..., -1] ** 2), n=n,
                         bound=1.0, name=f"gaussian(a={a:g},b={b:g})")


def sheared_gaussian(a: float = 1.0, b: float = 1.0, c: float = 1.0, n: int = 1) -> CallableField:
    """``exp(-a |z|^2 - b (t - c x_1 y_1)^2)``: not a product of a horizontal and a vertical factor."""
    def func(x):
        return np.exp(-a * _z2(x) - b * (x[..., -1] - c * x[..., 0] * x[..., n]) ** 2)
    return CallableField(func, n=n, bound=1.0, name=f"sheared_gaussian(a={a:g},b={b:g},c={c:g})")


def breathing_gaussian(a: float = 1.0, b: float = 1.0, k: float = 4.0, n: int = 1) -> CallableField:
    """``exp(-a |z|^2 - b (1 + k |z|^2) t^2)``: the vertical width changes with ``z``.

    Shears and products only move or rescale vertical lines as a whole; here
    the line profiles differ in shape, which is what makes the order of the
    ``z`` and ``s`` integrals matter.
    """
    if a <= 0 or b <= 0 or k < 0:
        raise ValueError("need a, b > 0 and k >= 0")
    return CallableField(lambda c: np.exp(-a * _z2(c) - b * (1 + k * _z2(c)) * c[..., -1] ** 2),
                         n=n, bound=1.0, name=f"breathing_gaussian(a={a:g},b={b:g},k={k:g})")


def _bump1(u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) < 1
    out = np.zeros_like(u, dtype=float)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def bump(radius: float = 1.0, height: float = 1.0, n: int = 1) -> CallableField:
    """Smooth compactly supported bump ``b(|z|/radius) b(t/height)``."""
    def func(c):
        return _bump1(np.sqrt(_z2(c)) / radius) * _bump1(c[..., -1] / height)
    return CallableField(func, n=n, support_radius=(radius ** 4 + 16 * height ** 2) ** 0.25,
                         bound=1.0, name=f"bump(r={radius:g},h={height:g})")


def bump_wave(tau0: float = 1.0, radius: float = 1.0, height: float = 1.5, n: int = 1) -> CallableField:
    """Bump times the vertical oscillation ``cos(2 pi tau0 t)``."""
    if tau0 <= 0:
        raise ValueError("tau0 must be positive")
    b = bump(radius, height, n)
    return CallableField(lambda c: b.func(c) * np.cos(2 * np.pi * tau0 * c[..., -1]), n=n,
                         support_radius=b.support_radius, bound=1.0,
                         name=f"bump_wave(tau0={tau0:g})")


def vertical_wave(w: float = 1.0, tau0: float = 1.0, n: int = 1) -> CallableField:
    """``exp(-w |z|^2) cos(2 pi tau0 t)``, an eigenfunction of every vertical multiplier."""
    return CallableField(lambda c: np.exp(-w * _z2(c)) * np.cos(2 * np.pi * tau0 * c[..., -1]),
                         n=n, bound=1.0, name=f"vertical_wave(w={w:g},tau0={tau0:g})")


def lipschitz_cap(R: float = 3.0, n: int = 1) -> CallableField:
    """``min(||x||, R)``: 1-Lipschitz for the Koranyi distance, constant ``R`` off the ball."""
    if R <= 0:
        raise ValueError("R must be positive")

    def kinks(c):
        z2 = float(np.sum(c[:-1] ** 2))
        out = [0.0]
        v = R ** 4 - z2 * z2
        if v > 0:
            out += [math.sqrt(v) / 4, -math.sqrt(v) / 4]
        if z2 > 0:
            out += [z2 / 4, -z2 / 4]  # scale of the smoothed cusp
        return out

    return CallableField(lambda c: np.minimum(koranyi_norm(c), R), n=n, support_radius=R,
                         smoothness="lipschitz", far_value=R, bound=R, lipschitz=1.0,
                         vertical_kinks=kinks, name=f"lipschitz_cap(R={R:g})")


def translated(f: CallableField, g) -> CallableField:
    """Left translate ``x -> f(g^{-1} x)``."""
    g = np.asarray(g, dtype=float)
    gi = group_inv(g)
    return CallableField(lambda c: f.func(group_mul(gi, c)), n=f.n, bound=f.bound,
                         smoothness=f.smoothness, lipschitz=f.lipschitz,
                         name=f"{f.name}@{tuple(np.round(g, 3))}")


def dilated(f: CallableField, r: float) -> CallableField:
    """``f o delta_r``; Lipschitz constants scale by ``r`` and support radii by ``1/r``."""
    if r <= 0:
        raise ValueError("r must be positive")

    def func(c):
        d = np.array(c, dtype=float, copy=True)
        d[..., :-1] *= r
        d[..., -1] *= r * r
        return f.func(d)

    kinks = None
    if f.vertical_kinks is not None:
        def kinks(c):
            d = np.array(c, dtype=float, copy=True)
            d[:-1] *= r
            return [s / (r * r) for s in f.vertical_kinks(d)]

    return CallableField(func, n=f.n, support_radius=f.support_radius / r,
                         smoothness=f.smoothness, far_value=f.far_value, bound=f.bound,
                         lipschitz=None if f.lipschitz is None else f.lipschitz * r,
                         vertical_kinks=kinks, name=f"{f.name}o(delta_{r:g})")


def default_family(n: int = 1) -> List[CallableField]:
    """Ten smooth, rapidly decaying test functions.

    Six Gaussians (one left-translated), two sheared Gaussians and two
    bump waves; all stay below ``2e-2`` once ``|z| >= 2.5`` or ``|t| >= 2``.
    """
    fam = [
        gaussian(1.0, 1.0, n),
        gaussian(2.0, 1.0, n),
        gaussian(1.0, 3.0, n),
        gaussian(1.5, 2.0, n),
        gaussian(3.0, 4.0, n),
        translated(gaussian(2.0, 2.0, n), np.r_[0.4, np.zeros(n - 1), -0.3, np.zeros(n - 1), 0.2]),
        sheared_gaussian(1.5, 2.0, 1.0, n),
        sheared_gaussian(2.0, 3.0, -1.5, n),
        bump_wave(0.5, 1.6, 1.6, n),
        bump_wave(1.0, 1.8, 1.8, n),
    ]
    return fam


def random_smooth_field(seed: int, n: int = 1, terms: int = 4) -> CallableField:
    """Sum of ``terms`` randomly placed, randomly shaped and sheared Gaussians."""
    rng = np.random.default_rng(seed)
    amp = rng.normal(size=terms)
    a = rng.uniform(1.0, 3.0, terms)
    b = rng.uniform(1.0, 4.0, terms)
    sh = rng.uniform(-1.5, 1.5, terms)
    ctr = rng.uniform(-0.6, 0.6, (terms, 2 * n + 1))

    def func(c):
        out = 0.0
        for k in range(terms):
            d = c - ctr[k]
            out = out + amp[k] * np.exp(-a[k] * _z2(d) - b[k] * (d[..., -1] - sh[k] * d[..., 0] * d[..., n]) ** 2)
        return out

    return CallableField(func, n=n, bound=float(np.abs(amp).sum()), name=f"random_smooth(seed={seed})")


@dataclass
class OmegaSampler:
    """Points ``(z, t)`` with ``t > 0``, ``|z|^4 < 16 t^2`` and ``||(z, t)|| < 1``.

    For each requested ``t`` the horizontal parts are spread over radii
    ``rho * 2 sqrt(t)`` with ``rho`` in ``[0, rho_max]``; the first point is
    always on the axis ``z = 0``.
    """

    n: int = 1
    per_t: int = 8
    rho_max: float = 0.9
    seed: int = 0

    @staticmethod
    def contains(p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        t = p[..., -1]
        z2 = _z2(p)
        return (t > 0) & (z2 * z2 < 16 * t * t) & (koranyi_norm(p) < 1)

    def points(self, ts: Sequence[float]) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        out = []
        for t in ts:
            if not 0 < t < 0.25:
                raise ValueError("t must lie in (0, 1/4) for the region to be non-trivial")
            rho = np.concatenate([[0.0], rng.uniform(0, self.rho_max, self.per_t - 1)])
            d = rng.normal(size=(self.per_t, 2 * self.n))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            z = d * (rho * 2 * math.sqrt(t))[:, None]
            pts = np.concatenate([z, np.full((self.per_t, 1), t)], axis=1)
            out.append(pts[self.contains(pts)])
        return np.concatenate(out)
