"""Line-wise vertical operators.

Two families live here.  Spectral multipliers act on each vertical line of a
periodic :class:`~hfrac.fields.GridField` through the FFT.  Principal-value
truncations

    T^{a,eps} f(z, t) = int_{|r| > eps} (f(z, t + r) - f(z, t)) |r|^{-1-a} dr

are available both on grids (as a lattice sum) and at single points of a
:class:`~hfrac.fields.CallableField` (adaptive quadrature).  The two are tied
together by ``T^a = -c(a) |T|^a`` with ``c`` from :func:`frac_pv_constant`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
from scipy import integrate
from scipy.special import zeta

from .fields import CallableField, GridField
from .geometry import HeisenbergPoint, koranyi_norm

__all__ = [
    "VerticalSymbol",
    "TruncationSchedule",
    "PVResult",
    "PointTruncation",
    "vertical_multiplier",
    "spectral_tderiv",
    "hilbert_involution_check",
    "truncation_weights",
    "truncated_tderiv_grid",
    "grid_tail_bound",
    "truncated_tderiv_point",
    "pv_tderiv",
    "duality_pairing",
    "frac_pv_constant",
]

_KINDS = ("abs_power", "hilbert", "bessel", "one_plus_absT")


@dataclass(frozen=True)
class VerticalSymbol:
    """Fourier symbol ``m(tau)`` of a line-wise multiplier.

    ``abs_power`` takes a (possibly complex) exponent, ``bessel`` a positive
    order, ``one_plus_absT`` a real order; ``hilbert`` has no parameter.
    """

    kind: str
    param: complex = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if self.kind == "bessel" and not (np.isreal(self.param) and np.real(self.param) > 0):
            raise ValueError("bessel order must be real and positive")
        if self.kind == "one_plus_absT" and not np.isreal(self.param):
            raise ValueError("one_plus_absT order must be real")

    @classmethod
    def abs_power(cls, alpha: complex) -> "VerticalSymbol":
        return cls("abs_power", alpha)

    @classmethod
    def hilbert(cls) -> "VerticalSymbol":
        return cls("hilbert")

    @classmethod
    def bessel(cls, alpha: float) -> "VerticalSymbol":
        return cls("bessel", alpha)

    @classmethod
    def one_plus_absT(cls, beta: float) -> "VerticalSymbol":
        return cls("one_plus_absT", beta)

    def __call__(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        if self.kind == "hilbert":
            return np.sign(tau)
        if self.kind == "bessel":
            return (1.0 + 4 * np.pi ** 2 * tau ** 2) ** (-np.real(self.param) / 2)
        if self.kind == "one_plus_absT":
            return (1.0 + 4 * np.pi ** 2 * tau ** 2) ** (np.real(self.param) / 2)
        a = complex(self.param)
        w = 2 * np.pi * np.abs(tau)
        if a == 0:
            return np.ones_like(w)
        out = np.empty(w.shape, dtype=complex if a.imag else float)
        nz = w > 0
        out[nz] = w[nz] ** (a if a.imag else a.real)
        out[~nz] = 0.0 if a.real > 0 else np.inf
        return out


def _require_periodic(f: GridField) -> None:
    if f.spec.mode != "periodic":
        raise ValueError("vertical multipliers and grid truncations need a periodic grid")


def vertical_multiplier(f: GridField, sym) -> GridField:
    """Apply the symbol ``sym`` (callable of physical frequency) along every vertical line."""
    _require_periodic(f)
    tau = np.fft.fftfreq(f.spec.n_vert, d=f.spec.h_vert)
    m = np.asarray(sym(tau))
    if not np.all(np.isfinite(m)):
        raise ValueError("symbol is not finite at every grid frequency")
    return f.with_values(np.fft.ifft(np.fft.fft(f.values, axis=-1) * m, axis=-1))


def spectral_tderiv(f: GridField, alpha: float) -> GridField:
    """Principal-value derivative through the spectral route, ``-c(a) |T|^a f``."""
    return vertical_multiplier(f, VerticalSymbol.abs_power(alpha)) * (-frac_pv_constant(alpha))


def hilbert_involution_check(f: GridField, tol: float = 1e-10) -> float:
    """Relative defect ``||H(Hf) - f||_2 / ||f||_2`` for line-wise mean-zero ``f``."""
    means = f.lines().mean(axis=-1)
    scale = max(float(np.abs(f.values).max()), 1e-300)
    if np.abs(means).max() > tol * scale:
        raise ValueError("hilbert involution check needs mean-zero vertical lines")
    H = VerticalSymbol.hilbert()
    g = vertical_multiplier(vertical_multiplier(f, H), H)
    nrm = np.linalg.norm(f.values)
    return 0.0 if nrm == 0 else float(np.linalg.norm(g.values - f.values) / nrm)


# ---------------------------------------------------------------- constants

def frac_pv_constant(alpha: float, tol: float = 1e-11) -> float:
    """``c(a) = int_R (1 - cos u) |u|^{-1-a} du`` by quadrature.

    The range ``[0, A]`` is integrated directly; beyond ``A`` the ``1`` term
    is exact and the oscillatory ``cos u`` part uses a Fourier-weighted rule.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    A = 8 * np.pi
    head, err1 = integrate.quad(lambda u: (1 - np.cos(u)) * u ** (-1 - alpha), 0, A,
                                epsabs=tol, epsrel=tol, limit=400,
                                points=[2 * np.pi * k for k in range(1, 4)])
    osc, err2 = integrate.quad(lambda u: u ** (-1 - alpha), A, np.inf, weight="cos", wvar=1.0,
                               epsabs=tol, limlst=200)
    if err1 + err2 > 1e3 * tol:
        raise RuntimeError("quadrature for the principal-value constant did not converge")
    return float(2 * (head + A ** (-alpha) / alpha - osc))


# ---------------------------------------------------------------- grid truncation

def _periodized_kernel(r: np.ndarray, alpha: float, period: float) -> np.ndarray:
    """``sum_k |r + k L|^{-1-a}`` for ``0 < r < L`` via the Hurwitz zeta function."""
    s = 1 + alpha
    x = r / period
    return period ** (-s) * (zeta(s, x) + zeta(s, 1 - x))


def truncation_weights(n_vert: int, h: float, alpha: float, eps: float,
                       periodize: bool = True) -> np.ndarray:
    """Lattice weights ``w_j`` for circular offsets ``j h`` (index ``j`` in ``[0, N)``).

    Offsets with ``|r| < eps`` get zero weight and ``|r| = eps`` gets half
    weight, the trapezoid cut.  With ``periodize`` each offset carries the
    kernel summed over all periodic images, so the lattice sum is the exact
    truncation of the periodic extension; otherwise it carries ``|r|^{-1-a}``.
    """
    j = np.arange(n_vert)
    r = np.minimum(j, n_vert - j) * h
    w = np.zeros(n_vert)
    keep = r >= eps * (1 - 1e-12)
    keep[0] = False
    if periodize:
        w[keep] = _periodized_kernel(r[keep], alpha, n_vert * h)
    else:
        w[keep] = r[keep] ** (-1 - alpha)
    edge = keep & (np.abs(r - eps) <= 1e-12 * eps)
    w[edge] *= 0.5
    return w * h


def truncated_tderiv_grid(f: GridField, alpha: float, eps: float,
                          periodize: bool = True) -> GridField:
    """Lattice truncation ``T^{a,eps} f`` on every vertical line (periodic grids).

    Raises
    ------
    ValueError
        If ``eps`` is below the vertical spacing or the grid is not periodic.
    """
    _require_periodic(f)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    h = f.spec.h_vert
    if eps < h * (1 - 1e-12):
        raise ValueError(f"eps={eps:g} is below the vertical spacing {h:g}")
    w = truncation_weights(f.spec.n_vert, h, alpha, eps, periodize)
    sym = np.fft.fft(w).real - w.sum()
    return f.with_values(np.fft.ifft(np.fft.fft(f.values, axis=-1) * sym, axis=-1))


def grid_tail_bound(f: GridField, alpha: float) -> float:
    """Bound on the part of the line integral beyond half a period, ``4 ||f||_inf (L/2)^{-a} / a``."""
    half = f.spec.height / 2
    return float(4 * np.abs(f.values).max() * half ** (-alpha) / alpha)


# ---------------------------------------------------------------- callable truncation

@dataclass(frozen=True)
class PointTruncation:
    """Truncated value at a point with the tail treatment that produced it."""

    value: float
    tail: float
    tail_bound: float
    quad_error: float


def _default_rmax(f: CallableField, t: float) -> float:
    if math.isfinite(f.support_radius):
        return (abs(t) + f.support_radius ** 2 / 4) * (1 + 1e-9) + 1e-12
    return 1e3 * (1 + abs(t))


def _tail(f: CallableField, fp: float, alpha: float, t: float, r_max: float):
    """Contribution of ``|r| > r_max`` and an a-priori bound on what is unknown about it."""
    mass = 2 * r_max ** (-alpha) / alpha
    if math.isfinite(f.support_radius) and r_max >= abs(t) + f.support_radius ** 2 / 4:
        return (f.far_value - fp) * mass, 0.0
    if f.bound is None:
        return 0.0, math.inf
    return 0.0, 2 * f.bound * mass


def _breakpoints(f: CallableField, coords: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Panel ends in ``[lo, hi]``: dyadic shells plus the images of vertical kinks."""
    t = coords[-1]
    pts = [lo, hi]
    k = math.ceil(math.log2(lo)) if lo > 0 else 0
    while 2.0 ** k < hi:
        pts.append(2.0 ** k)
        k += 1
    for s in list(f.kinks(coords)) + [-t]:
        for r in (abs(s - t), abs(t - s) * 2):
            pts.append(r)
    pts = np.unique(np.clip(np.asarray(pts, dtype=float), lo, hi))
    # near-coincident ends would leave slivers that quad cannot resolve in floating point
    keep = [pts[0]]
    for x in pts[1:]:
        if x - keep[-1] > 1e-10 * x:
            keep.append(x)
    keep[-1] = hi
    return np.array(keep)


def _annulus(f: CallableField, coords: np.ndarray, fp: float, alpha: float,
             lo: float, hi: float, tol: float):
    """``int_{lo<|r|<hi} (f(t+r) - f(t)) |r|^{-1-a} dr`` folded onto ``r > 0``."""
    if hi <= lo:
        return 0.0, 0.0
    c = coords.copy()
    t = coords[-1]

    def g(r):
        c[-1] = t + r
        a = float(np.real(f.evaluate(c)))
        c[-1] = t - r
        b = float(np.real(f.evaluate(c)))
        return (a + b - 2 * fp) * r ** (-1 - alpha)

    pts = _breakpoints(f, coords, lo, hi)
    total, err = 0.0, 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b <= a:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                v, e = integrate.quad(g, a, b, epsabs=tol, epsrel=1e-10, limit=200)
            except integrate.IntegrationWarning as exc:
                raise RuntimeError(f"quadrature did not converge on [{a:g}, {b:g}]: {exc}") from exc
        total += v
        err += e
    return total, err


def _coords(p) -> np.ndarray:
    if isinstance(p, HeisenbergPoint):
        return p.coords
    return np.asarray(p, dtype=float).copy()


def truncated_tderiv_point(f: CallableField, p, alpha: float, eps: float,
                           r_max: Optional[float] = None, tol: float = 1e-8) -> PointTruncation:
    """Truncation ``T^{a,eps} f(p)`` of a callable by adaptive quadrature.

    The integral over ``eps < |r| < r_max`` is split into panels at dyadic
    shells and at the images of the vertical kinks of ``f``.  For functions
    that are constant outside a Koranyi ball the part ``|r| > r_max`` is added
    exactly (the default ``r_max`` is chosen so this applies); otherwise it is
    left out and bounded by ``tail_bound``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    c = _coords(p)
    t = c[-1]
    r_max = _default_rmax(f, t) if r_max is None else float(r_max)
    if not 0 < eps < r_max:
        raise ValueError("need 0 < eps < r_max")
    fp = float(np.real(f.evaluate(c)))
    body, err = _annulus(f, c, fp, alpha, eps, r_max, tol)
    tail, bound = _tail(f, fp, alpha, t, r_max)
    return PointTruncation(body + tail, tail, bound, err)


# ---------------------------------------------------------------- principal values

@dataclass
class TruncationSchedule:
    """Geometric ``eps`` sequence and stopping rule for principal values.

    ``eps0=None`` picks a start from the data (a quarter of the box height
    rounded to the lattice for grids, ``min(1, r_max / 2)`` for points).
    Iteration stops once successive values differ by at most
    ``atol + rtol * |value|``.
    """

    eps0: Optional[float] = None
    ratio: float = 0.5
    atol: float = 1e-6
    rtol: float = 0.0
    max_refinements: int = 64

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.eps0 is not None and self.eps0 <= 0:
            raise ValueError("eps0 must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")

    def tolerance(self, scale: float) -> float:
        return self.atol + self.rtol * scale


@dataclass
class PVResult:
    """Outcome of a principal-value iteration.

    ``history`` holds one ``(eps, value_or_norm, cauchy_difference)`` triple
    per truncation level; for grids ``value`` is the Richardson-extrapolated
    field and the middle entry is its norm.
    """

    value: Union[float, GridField]
    converged: bool
    history: List[tuple] = field(default_factory=list)
    error_estimate: float = math.nan
    tail_bound: float = 0.0

    @property
    def eps(self) -> np.ndarray:
        return np.array([h[0] for h in self.history])

    @property
    def values(self) -> np.ndarray:
        return np.array([h[1] for h in self.history])

    @property
    def differences(self) -> np.ndarray:
        return np.array([h[2] for h in self.history[1:]])


def _field_norm(v: np.ndarray, p: float, vol: float) -> float:
    a = np.abs(v)
    if math.isinf(p):
        return float(a.max())
    return float((np.sum(a ** p) * vol) ** (1 / p))


def _pv_grid(f: GridField, alpha: float, sched: TruncationSchedule, p: float,
             periodize: bool) -> PVResult:
    spec = f.spec
    h = spec.h_vert
    if sched.eps0 is None:
        eps = h * 2 ** max(0, math.floor(math.log2(spec.n_vert / 8)))
    else:
        eps = max(sched.eps0, h)
    vol = spec.cell_volume
    gain = sched.ratio ** (-(2 - alpha)) - 1
    history, prev_T, prev_R, best = [], None, None, None
    converged, err = False, math.nan
    for _ in range(sched.max_refinements + 1):
        T = truncated_tderiv_grid(f, alpha, eps, periodize).values
        if prev_T is None:
            R = T
            history.append((eps, _field_norm(T, p, vol), math.nan))
        else:
            R = T + (T - prev_T) / gain
            history.append((eps, _field_norm(R, p, vol), _field_norm(T - prev_T, p, vol)))
            if prev_R is not None:
                err = _field_norm(R - prev_R, p, vol)
                if err <= sched.tolerance(_field_norm(R, p, vol)):
                    converged = True
                    best = R
                    break
            prev_R = R
        best = R
        prev_T = T
        nxt = eps * sched.ratio
        if nxt < h * (1 - 1e-12):
            break
        eps = nxt
    tail = 0.0 if periodize else grid_tail_bound(f, alpha)
    return PVResult(f.with_values(best), converged, history, err, tail)


def _pv_point(f: CallableField, p, alpha: float, sched: TruncationSchedule,
              r_max: Optional[float], tol: float) -> PVResult:
    c = _coords(p)
    t = c[-1]
    r_max = _default_rmax(f, t) if r_max is None else float(r_max)
    eps = min(1.0, r_max / 2) if sched.eps0 is None else sched.eps0
    first = truncated_tderiv_point(f, c, alpha, eps, r_max, tol)
    value = first.value
    fp = float(np.real(f.evaluate(c)))
    history = [(eps, value, math.nan)]
    converged, last = False, math.nan
    small = 0
    for _ in range(sched.max_refinements):
        lo = eps * sched.ratio
        inc, _ = _annulus(f, c, fp, alpha, lo, eps, tol)
        value += inc
        eps = lo
        history.append((eps, value, abs(inc)))
        last = abs(inc)
        # two consecutive small, shrinking increments guard against a lucky cancellation
        prev = history[-2][2]
        shrinking = math.isnan(prev) or last <= prev * (1 + 1e-6)
        if last <= sched.tolerance(abs(value)) and shrinking:
            small += 1
        else:
            small = 0
        if small >= 2:
            converged = True
            break
    return PVResult(float(value), converged, history, last, first.tail_bound)


def pv_tderiv(f, alpha: float, schedule: Optional[TruncationSchedule] = None, point=None,
              p: float = 2.0, r_max: Optional[float] = None, tol: float = 1e-8,
              periodize: bool = True) -> PVResult:
    """Principal value ``T^a f`` as the limit of truncations along ``schedule``.

    For a :class:`GridField` all lines are treated at once: ``eps`` is halved
    down to the vertical spacing, each pair of levels is Richardson
    extrapolated with the smooth-data order ``2 - a``, and the Cauchy test
    uses the grid ``L^p`` norm.  For a :class:`CallableField`, ``point`` is
    required and each refinement adds one annulus of adaptive quadrature.
    Non-convergence is reported through ``converged``, never raised.
    """
    sched = TruncationSchedule() if schedule is None else schedule
    if isinstance(f, GridField):
        if not np.any(f.values):
            return PVResult(f.with_values(np.zeros(f.spec.shape)), True, [], 0.0)
        _require_periodic(f)
        return _pv_grid(f, alpha, sched, p, periodize)
    if point is None:
        raise ValueError("a point is required for callable fields")
    return _pv_point(f, point, alpha, sched, r_max, tol)


def duality_pairing(f: GridField, g: GridField):
    """Bilinear pairing ``sum f_j g_j * cell volume`` (no conjugation)."""
    if f.spec != g.spec:
        raise ValueError("fields live on different grids")
    v = complex(np.sum(f.values * g.values) * f.spec.cell_volume)
    return v.real if v.imag == 0 else v
