"""Function-space gauges: vertical Sobolev, Besov-type seminorms and BMO.

Every shift-based seminorm is assembled from one matrix
``N[z, s] = || f(z, . + s) - f(z, .) ||_{L^p(dt)}`` sampled on an
:class:`SShiftGrid`; the seminorms differ only in the order in which the
``z`` and ``s`` integrations are carried out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import beta as beta_fn
from scipy.special import gamma
from scipy.stats import qmc

from .fields import GridField, GridSpec, lp_norm
from .geometry import dilate, group_inv, group_mul, homogeneous_dimension, koranyi_norm
from .vertical import VerticalSymbol, vertical_multiplier

__all__ = [
    "SShiftGrid",
    "BallFamily",
    "BesovMC",
    "vertical_sobolev_norm",
    "shift_difference_norms",
    "besov_line",
    "besov_I",
    "vhp_seminorm",
    "besov_heisenberg",
    "koranyi_ball_volume",
    "bmo_norm",
    "seminorms_from_differences",
]


@dataclass(frozen=True)
class SShiftGrid:
    """Symmetric shift nodes ``+-s_k``, geometric in ``s``, trapezoidal in ``log s``."""

    s_min: float
    s_max: float
    per_decade: int = 16

    def __post_init__(self):
        if not 0 < self.s_min < self.s_max:
            raise ValueError("need 0 < s_min < s_max")
        if self.per_decade < 1:
            raise ValueError("per_decade must be >= 1")

    @classmethod
    def for_grid(cls, spec: GridSpec, per_decade: int = 16) -> "SShiftGrid":
        """From the vertical spacing up to half the box height."""
        return cls(spec.h_vert, spec.height / 2, per_decade)

    @property
    def count(self) -> int:
        return max(2, int(math.ceil(math.log10(self.s_max / self.s_min) * self.per_decade)) + 1)

    def nodes(self) -> np.ndarray:
        """Positive shift magnitudes."""
        return np.geomspace(self.s_min, self.s_max, self.count)

    def weights(self) -> np.ndarray:
        """Trapezoid weights in ``log s`` for each positive node (used for both signs)."""
        m = self.count
        w = np.full(m, math.log(self.s_max / self.s_min) / (m - 1))
        w[[0, -1]] *= 0.5
        return w

    def signed(self):
        """``(shifts, weights)`` over both signs."""
        s, w = self.nodes(), self.weights()
        return np.concatenate([s, -s]), np.concatenate([w, w])

    def refined(self, factor: int = 2) -> "SShiftGrid":
        return SShiftGrid(self.s_min, self.s_max, self.per_decade * factor)

    def scaled(self, c: float) -> "SShiftGrid":
        """All shifts multiplied by ``c`` (use ``r**2`` under a dilation by ``r``)."""
        return SShiftGrid(self.s_min * c, self.s_max * c, self.per_decade)

    def check(self, spec: GridSpec) -> None:
        if self.s_min < spec.h_vert * (1 - 1e-9) or self.s_max > spec.height / 2 * (1 + 1e-9):
            raise ValueError("shift grid must lie within [vertical spacing, half box height]")


def vertical_sobolev_norm(f: GridField, p: float, alpha: float) -> float:
    """Mixed norm ``(int ||f_z||_{S^p_alpha}^p dz)^{1/p}`` through the Bessel symbol."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    if alpha == 0:
        return lp_norm(f, p)
    return lp_norm(vertical_multiplier(f, VerticalSymbol.one_plus_absT(alpha)), p)


def _shifted_lines(v: np.ndarray, s: float, h: float, periodic: bool) -> np.ndarray:
    N = v.shape[-1]
    m = s / h
    if periodic:
        if abs(m - round(m)) < 1e-12:
            return np.roll(v, -int(round(m)), axis=-1)
        tau = np.fft.fftfreq(N, d=h)
        return np.fft.ifft(np.fft.fft(v, axis=-1) * np.exp(2j * np.pi * tau * s), axis=-1)
    j0 = math.floor(m)
    th = m - j0
    out = np.zeros_like(v)
    for j, wt in ((j0, 1 - th), (j0 + 1, th)):
        if wt == 0 or abs(j) >= N:
            continue
        if j >= 0:
            out[..., :N - j] += wt * v[..., j:]
        else:
            out[..., -j:] += wt * v[..., :N + j]
    return out


def shift_difference_norms(f: GridField, p: float, sgrid: SShiftGrid) -> tuple:
    """``(N, shifts, weights)`` with ``N[z, k] = ||f_z(. + s_k) - f_z||_{L^p(dt)}``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    sgrid.check(f.spec)
    lines = f.lines()
    h = f.spec.h_vert
    periodic = f.spec.mode == "periodic"
    shifts, weights = sgrid.signed()
    N = np.empty((lines.shape[0], shifts.size))
    for k, s in enumerate(shifts):
        d = np.abs(_shifted_lines(lines, s, h, periodic) - lines)
        N[:, k] = _line_lp(d, p, h)
    return N, shifts, weights


def _line_lp(d: np.ndarray, p: float, h: float) -> np.ndarray:
    scale = d.max(axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * (np.sum((d / safe[:, None]) ** p, axis=-1) * h) ** (1 / p)


def _check_exponents(p, q, alpha):
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")


def _s_integral(vals: np.ndarray, shifts, weights, q: float, alpha: float) -> np.ndarray:
    """``(sum_s w_s (vals / |s|^alpha)^q)^{1/q}`` along the last axis."""
    x = vals / np.abs(shifts) ** alpha
    scale = x.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return scale[..., 0] * (np.sum(weights * (x / safe) ** q, axis=-1)) ** (1 / q)


def besov_line(psi, p: float, q: float, alpha: float, sgrid: SShiftGrid,
               h: Optional[float] = None, periodic: bool = True) -> float:
    """Besov seminorm ``||psi||_{Lambda^{p,q}_alpha(R)}`` of one line.

    ``psi`` is a sample array (spacing ``h``) or a
    :class:`~hfrac.fields.VerticalLineView`.
    """
    _check_exponents(p, q, alpha)
    if hasattr(psi, "spacing"):
        h = psi.spacing
        psi = psi.values
    if h is None:
        raise ValueError("line spacing required")
    v = np.asarray(psi, dtype=complex)[None, :]
    if sgrid.s_min < h * (1 - 1e-9) or sgrid.s_max > v.shape[-1] * h / 2 * (1 + 1e-9):
        raise ValueError("shift grid must lie within [spacing, half line length]")
    shifts, weights = sgrid.signed()
    N = np.array([_line_lp(np.abs(_shifted_lines(v, s, h, periodic) - v), p, h)[0] for s in shifts])
    return float(_s_integral(N, shifts, weights, q, alpha))


def _far_tail(norm_p, p: float, q: float, alpha: float, s_max: float):
    # shifts beyond the support: ||g(. + s) - g||_p = 2^{1/p} ||g||_p, integrated in closed form
    return 2 * (2 ** (1 / p) * norm_p) ** q * s_max ** (-alpha * q) / (alpha * q)


def besov_I(f: GridField, p: float, q: float, alpha: float, sgrid: SShiftGrid,
            far_tail: bool = False) -> float:
    """``(int ||f_z||_{Lambda^{p,q}_alpha}^p dz)^{1/p}``: the s-integral is inside.

    ``far_tail=True`` adds the shifts ``|s| > s_max`` in closed form,
    assuming every line is supported in an interval shorter than ``s_max``.
    """
    _check_exponents(p, q, alpha)
    N, shifts, weights = shift_difference_norms(f, p, sgrid)
    per_line = _s_integral(N, shifts, weights, q, alpha)
    if far_tail:
        line_norm = _line_lp(np.abs(f.lines()), p, f.spec.h_vert)
        per_line = (per_line ** q + _far_tail(line_norm, p, q, alpha, sgrid.s_max)) ** (1 / q)
    return float((np.sum(per_line ** p) * f.spec.horizontal_cell_area) ** (1 / p))


def vhp_seminorm(f: GridField, p: float, q: float, alpha: float, sgrid: SShiftGrid,
                 far_tail: bool = False) -> float:
    """``(int (int |f(x.(0,0,s)) - f(x)|^p dx)^{q/p} |s|^{-1-alpha q} ds)^{1/q}``.

    The ``H^n`` integral is carried out first for every shift, then the
    ``q/p`` power is applied, then the shift integral.  By default the shift
    integral stops at ``sgrid.s_max``; ``far_tail=True`` adds the remainder
    in closed form for data whose vertical support is shorter than ``s_max``.
    """
    _check_exponents(p, q, alpha)
    N, shifts, weights = shift_difference_norms(f, p, sgrid)
    inner = (np.sum(N ** p, axis=0) * f.spec.horizontal_cell_area) ** (1 / p)
    v = float(_s_integral(inner[None, :], shifts, weights, q, alpha)[0])
    if far_tail:
        v = (v ** q + _far_tail(lp_norm(f, p), p, q, alpha, sgrid.s_max)) ** (1 / q)
    return v


# ---------------------------------------------------------------- Monte Carlo Besov

def koranyi_ball_volume(n: int) -> float:
    """Lebesgue measure of the unit Koranyi ball in H^n."""
    return float(math.pi ** n * beta_fn(n / 2, 1.5) / (4 * gamma(n)))


@dataclass(frozen=True)
class BesovMC:
    """Monte-Carlo estimate of the double-integral Besov gauge."""

    value: float
    stderr: float
    integral: float
    integral_stderr: float
    samples: int
    tail: float


def _unit_ball_samples(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    out = []
    got = 0
    while got < m:
        u = rng.uniform(-1, 1, size=(2 * m, 2 * n + 1))
        u[:, -1] *= 0.25
        u = u[koranyi_norm(u) < 1]
        out.append(u)
        got += len(u)
    return np.concatenate(out)[:m]


def besov_heisenberg(f: GridField, p: float, alpha: float, budget: int = 200_000,
                     seed: int = 0, shells: int = 16, rho_min: Optional[float] = None,
                     target_se: Optional[float] = None) -> BesovMC:
    """Estimate ``(int int |f(x) - f(y)|^p ||y^{-1} x||^{-Q - alpha p} dx dy)^{1/p}``.

    Writing ``y = x . delta_rho(omega)`` with ``omega`` on the unit sphere,
    the integral becomes ``Q |B_1| int_x int rho^{-1-alpha p} E_omega |...|^p``.
    ``x`` is uniform on the box, ``log rho`` is stratified into ``shells``
    equal cells between ``rho_min`` (default: smallest spacing) and the box
    diameter, and directions come from rejection sampling of the unit ball.
    Off-box partners count twice (the mirror pair has ``x`` off the box).
    The part ``rho > rho_max`` is added in closed form.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if p < 1:
        raise ValueError("p must be >= 1")
    per = budget // shells
    if per < 2:
        raise ValueError("budget too small: need at least two samples per shell")
    spec = f.spec
    n = spec.n
    Q = homogeneous_dimension(n)
    vol_b = koranyi_ball_volume(n)
    lo = np.array([a for a, _ in spec.extents])
    hi = np.array([b for _, b in spec.extents])
    corner = np.maximum(np.abs(lo), np.abs(hi))
    rho_max = koranyi_norm(np.concatenate([2 * corner[:-1], [2 * corner[-1] + np.sum(corner[:n] * corner[n:2 * n])]]))
    rho_min = min(spec.spacing[:-1]) if rho_min is None else rho_min
    axes = [spec.centers(k) for k in range(spec.ndim)]
    interp = RegularGridInterpolator(axes, f.values, bounds_error=False, fill_value=None)
    inside = lambda x: np.all((x >= lo) & (x <= hi), axis=-1)

    def fval(x):
        v = interp(np.clip(x, [a[0] for a in axes], [a[-1] for a in axes]))
        return np.where(inside(x), v, 0.0)

    rng = np.random.default_rng(seed)
    edges = np.linspace(math.log(rho_min), math.log(rho_max), shells + 1)
    width = edges[1] - edges[0]
    vol_box = float(np.prod(hi - lo))
    pref = Q * vol_b * vol_box
    total, var = 0.0, 0.0
    for a in range(shells):
        x = lo + (hi - lo) * rng.random((per, spec.ndim))
        u = _unit_ball_samples(n, per, rng)
        nu = koranyi_norm(u)[:, None]
        omega = u.copy()
        omega[:, :-1] /= nu
        omega[:, -1] /= nu[:, 0] ** 2
        rho = np.exp(edges[a] + width * rng.random(per))
        w = omega.copy()
        w[:, :-1] *= rho[:, None]
        w[:, -1] *= rho ** 2
        y = group_mul(x, w)
        weight = np.where(inside(y), 1.0, 2.0)
        g = weight * np.abs(fval(x) - fval(y)) ** p * rho ** (-alpha * p) * width
        total += pref * g.mean()
        var += pref ** 2 * g.var(ddof=1) / per
    tail = 2 * lp_norm(f, p) ** p * Q * vol_b * rho_max ** (-alpha * p) / (alpha * p)
    integral = total + tail
    se_int = math.sqrt(var)
    value = integral ** (1 / p)
    se = se_int / (p * integral ** (1 - 1 / p)) if integral > 0 else se_int
    if target_se is not None and se > target_se:
        raise ValueError(f"standard error {se:.3g} exceeds target {target_se:.3g}; raise the budget")
    return BesovMC(value, se, integral, se_int, per * shells, tail)


# ---------------------------------------------------------------- BMO

@dataclass
class BallFamily:
    """Koranyi balls ``B(c, r)`` given as arrays of centres and radii."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.radii = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii differ in length")
        if np.any(self.radii <= 0):
            raise ValueError("radii must be positive")

    @classmethod
    def lattice(cls, extents: Sequence, j_min: int = 0, j_max: int = 5,
                per_axis: int = 5) -> "BallFamily":
        """Centres on a ``per_axis^{2n+1}`` lattice over ``extents``, radii ``2^{-j}``."""
        axes = [a + (np.arange(per_axis) + 0.5) * (b - a) / per_axis for a, b in extents]
        c = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(extents))
        r = 2.0 ** -np.arange(j_min, j_max + 1)
        return cls(np.repeat(c, len(r), axis=0), np.tile(r, len(c)))

    def __len__(self) -> int:
        return len(self.radii)

    def dilated(self, r: float) -> "BallFamily":
        return BallFamily(dilate(r, self.centers), self.radii * r)

    def restrict(self, mask) -> "BallFamily":
        return BallFamily(self.centers[mask], self.radii[mask])


def _ball_cells(spec: GridSpec, c: np.ndarray, r: float):
    """Index slices of a box containing ``B(c, r)`` and the membership mask inside it."""
    n = spec.n
    half = [r] * (2 * n) + [r * r / 4 + r * np.linalg.norm(c[:-1]) / 2]
    sl = []
    for k in range(spec.ndim):
        (a, _), h, N = spec.extents[k], spec.spacing[k], spec.counts[k]
        i0 = max(0, int(math.floor((c[k] - half[k] - a) / h - 0.5)))
        i1 = min(N, int(math.ceil((c[k] + half[k] - a) / h + 0.5)) + 1)
        sl.append(slice(i0, max(i0, i1)))
    axes = [spec.centers(k)[sl[k]] for k in range(spec.ndim)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    d = koranyi_norm(group_mul(group_inv(c), pts))
    return tuple(sl), d < r


def bmo_norm(f, balls: BallFamily, min_cells: int = 32, min_points: int = 1024,
             on_unresolved: str = "raise", seed: int = 0, return_ball: bool = False):
    """``sup_B (1/|B|) int_B |f - f_B|`` over the family.

    For a :class:`GridField` a ball is the set of cell centres within Koranyi
    distance ``r`` of its centre and must contain ``min_cells`` of them.  For a
    :class:`CallableField`, ``min_points`` scrambled Sobol points of the unit
    ball are mapped onto each ball by ``x -> c . delta_r(x)``.  Unresolved
    balls raise, or are skipped with ``on_unresolved="skip"``.
    """
    if on_unresolved not in ("raise", "skip"):
        raise ValueError("on_unresolved must be 'raise' or 'skip'")
    best, arg = 0.0, None
    if isinstance(f, GridField):
        vals = f.values
        for i, (c, r) in enumerate(zip(balls.centers, balls.radii)):
            sl, mask = _ball_cells(f.spec, c, r)
            if mask.sum() < min_cells:
                if on_unresolved == "raise":
                    raise ValueError(f"ball {i} (r={r:g}) holds {int(mask.sum())} cells < {min_cells}")
                continue
            v = vals[sl][mask]
            osc = float(np.mean(np.abs(v - v.mean())))
            if osc > best:
                best, arg = osc, i
    else:
        n = f.n
        m = 1 << int(math.ceil(math.log2(max(min_points, 2))))
        sob = qmc.Sobol(2 * n + 1, scramble=True, seed=seed).random(4 * m)
        u = 2 * sob - 1
        u[:, -1] *= 0.25
        u = u[koranyi_norm(u) < 1]
        if len(u) < min_points:
            raise ValueError("not enough quadrature points in the unit ball")
        for i, (c, r) in enumerate(zip(balls.centers, balls.radii)):
            v = np.asarray(f.evaluate(group_mul(c, dilate(r, u))))
            osc = float(np.mean(np.abs(v - v.mean())))
            if osc > best:
                best, arg = osc, i
    return (best, arg) if return_ball else best


def seminorms_from_differences(N: np.ndarray, shifts: np.ndarray, weights: np.ndarray,
                               p: float, q: float, alpha: float, dz: float) -> tuple:
    """``(vhp, besov_I)`` from a precomputed difference matrix (same ``p``).

    Lets one :func:`shift_difference_norms` call serve a whole ``(q, alpha)``
    lattice, with both seminorms seeing identical quadrature.
    """
    _check_exponents(p, q, alpha)
    inner = (np.sum(N ** p, axis=0) * dz) ** (1 / p)
    vhp = float(_s_integral(inner[None, :], shifts, weights, q, alpha)[0])
    per_line = _s_integral(N, shifts, weights, q, alpha)
    bI = float((np.sum(per_line ** p) * dz) ** (1 / p))
    return vhp, bI
