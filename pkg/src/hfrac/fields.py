"""Sampled and closed-form scalar functions on H^n.

A :class:`GridField` stores complex samples at the cell centres of a box grid
with the vertical (``t``) axis last, so every vertical line ``t -> f(z, t)``
is a contiguous row of the underlying buffer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

__all__ = [
    "GridSpec",
    "GridField",
    "CallableField",
    "VerticalLineView",
    "FieldFormatError",
    "sample",
    "support_check",
    "vertical_shift",
    "vertical_convolve",
    "discrete_delta",
    "lp_norm",
    "save_field",
    "load_field",
]

MODES = ("periodic", "zero")
_MODE_CODE = {"periodic": "P", "zero": "Z"}
_CODE_MODE = {v: k for k, v in _MODE_CODE.items()}
MAGIC = b"HFLD1\n"


class FieldFormatError(ValueError):
    """Raised for malformed HFLD1 files."""


@dataclass(frozen=True)
class GridSpec:
    """Box grid on H^n: ``2n+1`` axes, vertical axis last.

    Samples sit at cell centres ``a_k + (j + 1/2) h_k`` with
    ``h_k = (b_k - a_k) / N_k``.
    """

    n: int
    extents: tuple
    counts: tuple
    mode: str = "periodic"

    def __post_init__(self):
        extents = tuple((float(a), float(b)) for a, b in self.extents)
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "counts", counts)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(extents) != 2 * self.n + 1 or len(counts) != 2 * self.n + 1:
            raise ValueError(f"need {2 * self.n + 1} axes for n={self.n}")
        if any(c < 4 for c in counts):
            raise ValueError("every axis needs at least 4 samples")
        if any(not (b > a) for a, b in extents):
            raise ValueError("extents must satisfy b > a")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @classmethod
    def box(cls, n: int, half_widths: Sequence[float], counts: Sequence[int],
            mode: str = "periodic") -> "GridSpec":
        """Symmetric box ``prod [-w_k, w_k]``; ``half_widths`` may be (horizontal, vertical)."""
        half_widths = _expand(half_widths, n)
        counts = _expand(counts, n)
        return cls(n, tuple((-w, w) for w in half_widths), tuple(counts), mode)

    @property
    def ndim(self) -> int:
        return 2 * self.n + 1

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / c for (a, b), c in zip(self.extents, self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def horizontal_cell_area(self) -> float:
        return float(np.prod(self.spacing[:-1]))

    @property
    def h_vert(self) -> float:
        return self.spacing[-1]

    @property
    def n_vert(self) -> int:
        return self.counts[-1]

    @property
    def height(self) -> float:
        a, b = self.extents[-1]
        return b - a

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.extents]))

    def centers(self, axis: int) -> np.ndarray:
        (a, _), h, c = self.extents[axis], self.spacing[axis], self.counts[axis]
        return a + (np.arange(c) + 0.5) * h

    def mesh(self) -> np.ndarray:
        """Cell-centre coordinates, shape ``counts + (2n+1,)``."""
        axes = [self.centers(k) for k in range(self.ndim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def horizontal_mesh(self) -> np.ndarray:
        """Horizontal cell centres, shape ``counts[:-1] + (2n,)``."""
        axes = [self.centers(k) for k in range(self.ndim - 1)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def kernel_spec(self) -> "GridSpec":
        """Grid with the same counts and spacings whose cell ``N_k // 2`` is centred at 0."""
        ext = tuple((-(c // 2 + 0.5) * h, (c - c // 2 - 0.5) * h)
                    for c, h in zip(self.counts, self.spacing))
        return GridSpec(self.n, ext, self.counts, self.mode)

    def dilated(self, r: float) -> "GridSpec":
        """Image of the grid under the Heisenberg dilation ``delta_r``."""
        scale = [r] * (self.ndim - 1) + [r * r]
        ext = tuple((a * s, b * s) for (a, b), s in zip(self.extents, scale))
        return GridSpec(self.n, ext, self.counts, self.mode)

    def refined(self, factor: int = 2, axes: Optional[Sequence[int]] = None) -> "GridSpec":
        axes = range(self.ndim) if axes is None else axes
        counts = tuple(c * factor if k in axes else c for k, c in enumerate(self.counts))
        return GridSpec(self.n, self.extents, counts, self.mode)

    def describe(self) -> str:
        dims = "x".join(str(c) for c in self.counts)
        return f"n={self.n} {dims} {_MODE_CODE[self.mode]} h={','.join(f'{h:.4g}' for h in self.spacing)}"


def _expand(values, n: int) -> list:
    values = list(np.atleast_1d(values))
    if len(values) == 1:
        return values * (2 * n + 1)
    if len(values) == 2:
        return [values[0]] * (2 * n) + [values[1]]
    if len(values) != 2 * n + 1:
        raise ValueError(f"expected 1, 2 or {2 * n + 1} values")
    return values


@dataclass(frozen=True)
class VerticalLineView:
    """Read-only view of the vertical line through horizontal multi-index ``index``."""

    values: np.ndarray
    spacing: float
    index: tuple

    def __len__(self) -> int:
        return self.values.shape[0]


class GridField:
    """Immutable complex samples of a function on a :class:`GridSpec`."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        arr = np.array(values, dtype=np.complex128, order="C")
        if arr.shape != spec.shape:
            arr = arr.reshape(spec.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GridField is immutable")

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridField":
        return cls(spec, np.zeros(spec.shape))

    @classmethod
    def constant(cls, spec: GridSpec, c) -> "GridField":
        return cls(spec, np.full(spec.shape, c, dtype=np.complex128))

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def lines(self) -> np.ndarray:
        """All vertical lines as a read-only ``(n_lines, N_vert)`` view."""
        return self.values.reshape(-1, self.spec.n_vert)

    def line(self, index) -> VerticalLineView:
        index = tuple(np.atleast_1d(index))
        return VerticalLineView(self.values[index], self.spec.h_vert, index)

    def with_values(self, values) -> "GridField":
        return GridField(self.spec, values)

    def _check(self, other: "GridField") -> None:
        if other.spec != self.spec:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, GridField):
            self._check(other)
            return GridField(self.spec, self.values + other.values)
        return GridField(self.spec, self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridField):
            self._check(other)
            return GridField(self.spec, self.values - other.values)
        return GridField(self.spec, self.values - other)

    def __mul__(self, c):
        if isinstance(c, GridField):
            self._check(c)
            return GridField(self.spec, self.values * c.values)
        return GridField(self.spec, self.values * c)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return GridField(self.spec, -self.values)

    def __repr__(self) -> str:
        return f"GridField({self.spec.describe()})"


@dataclass
class CallableField:
    """Closed-form function on H^n.

    ``func`` maps coordinate arrays of shape ``(..., 2n+1)`` to values of
    shape ``(...)``.  Outside the Koranyi ball of radius ``support_radius``
    the function equals ``far_value``.  ``vertical_kinks(coords)``, if given,
    returns the ``t`` values where ``s -> f(z, s)`` fails to be smooth for the
    ``z`` of ``coords``; quadrature splits panels there.
    """

    func: Callable[[np.ndarray], np.ndarray]
    n: int = 1
    support_radius: float = math.inf
    smoothness: str = "smooth"
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    far_value: float = 0.0
    bound: Optional[float] = None
    lipschitz: Optional[float] = None
    vertical_kinks: Optional[Callable[[np.ndarray], Sequence[float]]] = None
    name: str = "callable"

    def __post_init__(self):
        if self.smoothness not in ("smooth", "lipschitz"):
            raise ValueError("smoothness must be 'smooth' or 'lipschitz'")

    def evaluate(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != 2 * self.n + 1:
            raise ValueError(f"expected coordinates with {2 * self.n + 1} components")
        return np.asarray(self.func(coords))

    __call__ = evaluate

    def kinks(self, coords) -> list:
        if self.vertical_kinks is None:
            return []
        return list(self.vertical_kinks(np.asarray(coords, dtype=float)))


def sample(f: CallableField, spec: GridSpec) -> GridField:
    """Evaluate ``f`` at every cell centre of ``spec``."""
    if f.n != spec.n:
        raise ValueError("field and grid have different Heisenberg index")
    vals = f.evaluate(spec.mesh())
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"non-finite value while sampling {f.name}")
    return GridField(spec, vals)


def support_check(f: GridField, tol: float = 1e-12) -> bool:
    """True if the L^1 mass outside the central half of the box is at most ``tol`` (relative)."""
    mask = np.ones(f.spec.shape, dtype=bool)
    for k in range(f.spec.ndim):
        (a, b), c = f.spec.extents[k], f.spec.centers(k)
        inner = (c >= a + (b - a) / 4) & (c <= b - (b - a) / 4)
        shape = [1] * f.spec.ndim
        shape[k] = -1
        mask &= inner.reshape(shape)
    total = np.abs(f.values).sum()
    if total == 0:
        return True
    return float(np.abs(f.values[~mask]).sum() / total) <= tol


def _vertical_freqs(spec: GridSpec) -> np.ndarray:
    return np.fft.fftfreq(spec.n_vert, d=spec.h_vert)


def vertical_shift(f: GridField, s: float) -> GridField:
    """Return ``(z, t) -> f(z, t + s)``, i.e. ``f(x . (0, 0, s))``.

    Periodic grids use band-limited interpolation (a unitary Fourier phase),
    zero-extended grids use linear interpolation with zeros outside the box.
    """
    spec = f.spec
    if s == 0:
        return f
    if spec.mode == "periodic":
        phase = np.exp(2j * np.pi * _vertical_freqs(spec) * s)
        m = s / spec.h_vert
        if abs(m - round(m)) < 1e-12:
            return GridField(spec, np.roll(f.values, -int(round(m)), axis=-1))
        return GridField(spec, np.fft.ifft(np.fft.fft(f.values, axis=-1) * phase, axis=-1))
    if abs(s) >= spec.height / 2:
        raise ValueError("shift exceeds half the box height in zero-extended mode")
    m = s / spec.h_vert
    j0 = math.floor(m)
    theta = m - j0
    out = (1 - theta) * _zero_roll(f.values, j0) + theta * _zero_roll(f.values, j0 + 1)
    return GridField(spec, out)


def _zero_roll(v: np.ndarray, j: int) -> np.ndarray:
    """``out[..., i] = v[..., i + j]`` with zeros outside."""
    out = np.zeros_like(v)
    N = v.shape[-1]
    if j >= 0:
        if j < N:
            out[..., :N - j] = v[..., j:]
    elif -j < N:
        out[..., -j:] = v[..., :N + j]
    return out


def discrete_delta(spec: GridSpec) -> np.ndarray:
    """Unit-mass vertical kernel concentrated at offset 0."""
    k = np.zeros(spec.n_vert)
    k[spec.n_vert // 2] = 1.0 / spec.h_vert
    return k


def vertical_convolve(f: GridField, kernel) -> GridField:
    """Line-wise convolution ``(f *_v k)(z, t) = int f(z, t - r) k(r) dr``.

    ``kernel`` is either an array of ``N_vert`` samples at offsets
    ``(j - N_vert // 2) h_vert`` or a symbol (callable of frequency, e.g. a
    :class:`~hfrac.vertical.VerticalSymbol`), which is applied as a multiplier.
    """
    spec = f.spec
    if callable(kernel):
        from .vertical import vertical_multiplier
        return vertical_multiplier(f, kernel)
    k = np.asarray(kernel, dtype=np.complex128)
    N = spec.n_vert
    if k.shape != (N,):
        raise ValueError(f"kernel must have {N} samples, got {k.shape}")
    c = N // 2
    h = spec.h_vert
    if spec.mode == "periodic":
        kh = np.fft.fft(np.roll(k, -c))
        out = np.fft.ifft(np.fft.fft(f.values, axis=-1) * kh, axis=-1) * h
    else:
        lines = f.lines()
        full = fftconvolve(lines, k[None, :], mode="full", axes=-1)
        out = (full[:, c:c + N] * h).reshape(spec.shape)
    return GridField(spec, out)


def lp_norm(f: GridField, p: float) -> float:
    """Midpoint-rule ``L^p`` norm; ``p = inf`` gives the largest sample modulus."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    if a.max() == 0:
        return 0.0
    scale = a.max()
    return float(scale * (np.sum((a / scale) ** p) * f.spec.cell_volume) ** (1.0 / p))


def save_field(f: GridField, path) -> None:
    """Write ``f`` in the HFLD1 format."""
    spec = f.spec
    parts = [str(spec.n)] + [str(c) for c in spec.counts]
    for a, b in spec.extents:
        parts += [repr(a), repr(b)]
    parts.append(_MODE_CODE[spec.mode])
    header = (" ".join(parts) + "\n").encode("ascii")
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(payload)


def load_field(path) -> GridField:
    """Read an HFLD1 file written by :func:`save_field`."""
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise FieldFormatError("bad magic: not an HFLD1 file")
    end = data.find(b"\n", len(MAGIC))
    if end < 0:
        raise FieldFormatError("missing header line")
    try:
        tokens = data[len(MAGIC):end].decode("ascii").split()
        n = int(tokens[0])
        d = 2 * n + 1
        if len(tokens) != 1 + d + 2 * d + 1:
            raise ValueError("wrong token count")
        counts = tuple(int(t) for t in tokens[1:1 + d])
        bounds = [float(t) for t in tokens[1 + d:1 + 3 * d]]
        mode = _CODE_MODE[tokens[-1]]
        spec = GridSpec(n, tuple(zip(bounds[0::2], bounds[1::2])), counts, mode)
    except (ValueError, KeyError, IndexError, UnicodeDecodeError) as exc:
        raise FieldFormatError(f"malformed header: {exc}") from exc
    payload = data[end + 1:]
    expected = spec.size * 16
    if len(payload) != expected:
        raise FieldFormatError(f"payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<c16").reshape(spec.shape)
    return GridField(spec, values.astype(np.complex128))
