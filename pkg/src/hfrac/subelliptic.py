"""Discrete sub-Laplacian, its matrix functions, heat and Bessel kernels.

The operator ``A ~ -sum_j X_j^2`` is the symmetrized average of
``D^T D`` forms over the four forward/backward combinations of the
horizontal and vertical differences in ``X_j = d_{x_j} - (y_j/2) d_t`` and
``Y_j = d_{y_j} + (x_j/2) d_t``.  On periodic grids it commutes with the
vertical FFT, so it splits into Hermitian blocks of horizontal size, one per
vertical frequency; these are diagonalized exactly.

Two generators are offered.  ``"left"`` is the discretization above.
``"radial"`` averages it with its mirror image under ``t -> -t`` (the
right-invariant counterpart); the mixed ``d_x d_t`` terms cancel, which makes
it an M-matrix whose heat flow is positive, mass preserving and exactly
symmetric under ``x -> x^{-1}``.  Left- and right-invariant sub-Laplacians
agree on U(n)-radial functions, so kernels started from a centred impulse are
generated with ``"radial"`` by default.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import gamma, roots_jacobi, roots_legendre

from .fields import GridField, GridSpec, lp_norm
from .vertical import VerticalSymbol, vertical_multiplier

__all__ = [
    "SpectralFunction",
    "SubLaplacianOperator",
    "KernelField",
    "assemble_sublaplacian",
    "operator_function",
    "lanczos_function",
    "heat_kernel",
    "bessel_kernel_H",
    "bessel_s_quadrature",
    "kernel_asymmetry",
    "group_convolve",
    "lambda_op",
    "horizontal_gradient_grid",
    "horizontal_sobolev_norm",
]

MAX_UNKNOWNS = 64_000
EIG_CAP = 5_000
CONV_BUDGET = 1e9


@dataclass(frozen=True)
class SpectralFunction:
    """A scalar function ``g(lambda)`` on the spectrum, with a label for reports."""

    func: Callable[[np.ndarray], np.ndarray]
    label: str

    def __call__(self, lam):
        return self.func(np.asarray(lam))

    @classmethod
    def identity(cls) -> "SpectralFunction":
        return cls(lambda l: l, "lambda")

    @classmethod
    def power(cls, a: float) -> "SpectralFunction":
        """``lambda^a`` with round-off negatives clipped to 0 (``0^0 = 1``)."""
        return cls(lambda l: np.maximum(l, 0.0) ** a, f"lambda^{a:g}")

    @classmethod
    def shifted_power(cls, a: float) -> "SpectralFunction":
        """``(1 + lambda)^a``."""
        return cls(lambda l: (1.0 + np.maximum(l, 0.0)) ** a, f"(1+lambda)^{a:g}")

    @classmethod
    def heat(cls, s: float) -> "SpectralFunction":
        return cls(lambda l: np.exp(-s * np.maximum(l, 0.0)), f"exp(-{s:g} lambda)")


# ---------------------------------------------------------------- assembly

def _diff_plus(N: int, h: float, periodic: bool) -> sp.csr_matrix:
    D = sp.diags([-np.ones(N), np.ones(N - 1)], [0, 1], shape=(N, N), format="lil")
    if periodic:
        D[N - 1, 0] = 1.0
    return (D / h).tocsr()


def _kron_axis(mats, axis: int, op) -> sp.csr_matrix:
    """Kronecker product with ``op`` at position ``axis`` and identities elsewhere."""
    out = None
    for k, m in enumerate(mats):
        factor = op if k == axis else sp.identity(m, format="csr")
        out = factor if out is None else sp.kron(out, factor, format="csr")
    return out


def _eigh(M: np.ndarray):
    """``eigh`` with eigenvalues below its backward error set to exactly 0."""
    w, V = np.linalg.eigh(M)
    tol = 64 * np.finfo(float).eps * max(float(np.abs(w).max()), 1.0) if w.size else 0.0
    w[np.abs(w) <= tol] = 0.0
    return w, V


class SubLaplacianOperator:
    """Symmetric positive semidefinite discretization ``A ~ -Delta`` on a grid.

    Parameters
    ----------
    spec : GridSpec
    generator : {"left", "radial"}
    eig_cap : int
        Largest matrix (block) that is diagonalized densely; larger problems
        fall back to Lanczos.
    max_unknowns : int
        Refuse grids with more unknowns than this.
    """

    def __init__(self, spec: GridSpec, generator: str = "left", eig_cap: int = EIG_CAP,
                 max_unknowns: int = MAX_UNKNOWNS):
        if generator not in ("left", "radial"):
            raise ValueError("generator must be 'left' or 'radial'")
        if spec.size > max_unknowns:
            raise ValueError(f"grid has {spec.size} unknowns, cap is {max_unknowns}")
        self.spec = spec
        self.generator = generator
        self.eig_cap = eig_cap
        self.periodic = spec.mode == "periodic"
        n = spec.n
        hz = spec.horizontal_mesh().reshape(-1, 2 * n)
        self._hcounts = spec.counts[:-1]
        self._hsize = int(np.prod(self._hcounts))
        periodic = self.periodic
        self._Dp = [_kron_axis(self._hcounts, k,
                               _diff_plus(spec.counts[k], spec.spacing[k], periodic))
                    for k in range(2 * n)]
        self._Dm = [-D.T.tocsr() for D in self._Dp]
        # multiplication by the coefficient of d_t in X_j (first n) and Y_j (last n)
        self._coef = [sp.diags(-hz[:, n + j] / 2) for j in range(n)]
        self._coef += [sp.diags(hz[:, j] / 2) for j in range(n)]
        self._eig = {}
        self._parts = None
        self._matrix = None
        self._dense_eig = None

    # -- structure
    @property
    def size(self) -> int:
        return self.spec.size

    @property
    def uses_blocks(self) -> bool:
        return self.periodic and self._hsize <= self.eig_cap

    def _vertical_symbols(self, k: int):
        th = 2 * np.pi * k / self.spec.n_vert
        h = self.spec.h_vert
        return (np.exp(1j * th) - 1) / h, (1 - np.exp(-1j * th)) / h

    def _block_parts(self):
        # sum over both horizontal and both vertical stencils of (D + c d)^H (D + c d), split by powers of d
        if self._parts is None:
            S = sum(D.T @ D for Dset in (self._Dp, self._Dm) for D in Dset)
            C2 = sum(c @ c for c in self._coef)
            P = sum(c @ D for Dset in (self._Dp, self._Dm) for D, c in zip(Dset, self._coef))
            self._parts = (S.toarray(), C2.diagonal().copy(), P.toarray())
        return self._parts

    def _left_block(self, k: int) -> np.ndarray:
        dp, dm = self._vertical_symbols(k)
        S, c2, P = self._block_parts()
        sig = dp + dm
        A = 2 * S + np.conj(sig) * P + sig * P.T
        A[np.diag_indices_from(A)] += 2 * (abs(dp) ** 2 + abs(dm) ** 2) * c2
        return A / 4

    def block(self, k: int) -> np.ndarray:
        """Dense block of ``A`` acting on vertical frequency index ``k``."""
        A = self._left_block(k)
        if self.generator == "radial":
            return A.real.copy()
        return (A + A.conj().T) / 2

    def block_eig(self, k: int):
        """Cached ``(eigenvalues, eigenvectors)`` of block ``k``."""
        Nt = self.spec.n_vert
        k = k % Nt
        kk = min(k, Nt - k)
        if kk not in self._eig:
            self._eig[kk] = _eigh(self.block(kk))
        w, V = self._eig[kk]
        return (w, V.conj()) if k != kk and np.iscomplexobj(V) else (w, V)

    def factorize(self) -> None:
        if self.uses_blocks:
            for k in range(self.spec.n_vert // 2 + 1):
                self.block_eig(k)
        elif self.size <= self.eig_cap:
            self._dense()

    def _dense(self):
        if self._dense_eig is None:
            self._dense_eig = _eigh(self.matrix.toarray())
        return self._dense_eig

    @property
    def matrix(self) -> sp.csr_matrix:
        """Sparse ``A`` on the full grid (unknowns in C order, vertical fastest)."""
        if self._matrix is None:
            self._matrix = self._assemble_sparse()
        return self._matrix

    def _assemble_sparse(self) -> sp.csr_matrix:
        spec = self.spec
        Nt, ht = spec.n_vert, spec.h_vert
        It = sp.identity(Nt, format="csr")
        Dtp = _diff_plus(Nt, ht, self.periodic)
        Dts = (Dtp, -Dtp.T.tocsr())
        A = None
        for Dset in (self._Dp, self._Dm):
            for Dt in Dts:
                for D, c in zip(Dset, self._coef):
                    M = sp.kron(D, It) + sp.kron(c, Dt)
                    term = (M.T @ M)
                    A = term if A is None else A + term
        A = (A / 4).tocsr()
        if self.generator == "radial":
            R = sp.kron(sp.identity(self._hsize), sp.identity(Nt, format="csr")[::-1])
            A = ((A + R @ A @ R) / 2).tocsr()
        return ((A + A.T) / 2).tocsr()

    # -- application
    def apply(self, f: GridField) -> GridField:
        self._check(f)
        return f.with_values((self.matrix @ f.values.reshape(-1)).reshape(self.spec.shape))

    def _check(self, f: GridField) -> None:
        if f.spec != self.spec:
            raise ValueError("field grid does not match the operator grid")

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues (block or dense route); sorted."""
        if self.uses_blocks:
            return np.sort(np.concatenate([self.block_eig(k)[0] for k in range(self.spec.n_vert)]))
        if self.size <= self.eig_cap:
            return self._dense()[0]
        raise ValueError("grid too large for a full spectrum; use lanczos_function")

    def symmetry_defect(self) -> float:
        A = self.matrix
        return float(abs(A - A.T).max()) if A.nnz else 0.0

    def function(self, g, f: GridField, tol: float = 1e-8) -> GridField:
        return operator_function(self, g, f, tol)


def assemble_sublaplacian(spec: GridSpec, generator: str = "left",
                          max_unknowns: int = MAX_UNKNOWNS) -> SubLaplacianOperator:
    """Build the discrete sub-Laplacian ``A ~ -Delta`` on ``spec``."""
    return SubLaplacianOperator(spec, generator, max_unknowns=max_unknowns)


# ---------------------------------------------------------------- matrix functions

def lanczos_function(matvec, g, v: np.ndarray, tol: float = 1e-8, maxiter: int = 400,
                     check_every: int = 5):
    """Approximate ``g(A) v`` for symmetric ``A`` by Lanczos with full reorthogonalization.

    Returns ``(y, ritz_min)``.  Convergence is declared when two Krylov
    approximations ``check_every`` steps apart differ by at most
    ``tol * |y|``.
    """
    v = np.asarray(v, dtype=float)
    beta0 = np.linalg.norm(v)
    if beta0 == 0:
        return np.zeros_like(v), 0.0
    Q = np.zeros((maxiter + 1, v.size))
    Q[0] = v / beta0
    alphas, betas = [], []
    y_prev = None
    for j in range(maxiter):
        w = matvec(Q[j])
        a = Q[j] @ w
        w = w - a * Q[j] - (betas[-1] * Q[j - 1] if j else 0)
        for _ in range(2):
            w -= Q[:j + 1].T @ (Q[:j + 1] @ w)
        b = np.linalg.norm(w)
        alphas.append(a)
        breakdown = b < 1e-12 * max(1.0, abs(a))
        if breakdown or (j + 1) % check_every == 0 or j == maxiter - 1:
            T = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            theta, S = np.linalg.eigh(T)
            y = beta0 * (Q[:j + 1].T @ (S @ (g(theta) * S[0])))
            if breakdown:
                return y, float(theta.min())
            if y_prev is not None and np.linalg.norm(y - y_prev) <= tol * np.linalg.norm(y):
                return y, float(theta.min())
            y_prev = y
        betas.append(b)
        Q[j + 1] = w / b
    raise RuntimeError("Lanczos matrix function did not converge")


def operator_function(L: SubLaplacianOperator, g, f: GridField, tol: float = 1e-8) -> GridField:
    """``g(A) f`` by exact block eigen-expansion, dense eigh, or Lanczos.

    ``g`` is a :class:`SpectralFunction` or any vectorized callable that is
    finite on ``[0, lambda_max]``.
    """
    L._check(f)
    spec = f.spec
    if L.uses_blocks:
        Nt = spec.n_vert
        F = np.fft.fft(f.values.reshape(L._hsize, Nt), axis=1)
        G = np.empty_like(F)
        for k in range(Nt):
            w, V = L.block_eig(k)
            gw = np.asarray(g(w))
            if not np.all(np.isfinite(gw)):
                raise ValueError("spectral function is not finite on the spectrum")
            G[:, k] = V @ (gw * (V.conj().T @ F[:, k]))
        return f.with_values(np.fft.ifft(G, axis=1).reshape(spec.shape))
    if L.size <= L.eig_cap:
        w, V = L._dense()
        x = f.values.reshape(-1)
        return f.with_values((V @ (np.asarray(g(w)) * (V.T @ x))).reshape(spec.shape))
    return f.with_values(_lanczos_field(L, g, f, tol))


def _lanczos_field(L: SubLaplacianOperator, g, f: GridField, tol: float) -> np.ndarray:
    A = L.matrix
    out = np.zeros(L.size, dtype=complex)
    for part, unit in ((f.values.real, 1.0), (f.values.imag, 1j)):
        if np.any(part):
            y, _ = lanczos_function(A.dot, g, part.reshape(-1), tol)
            out += unit * y
    return out.reshape(L.spec.shape)


# ---------------------------------------------------------------- kernels

@dataclass
class KernelField:
    """Convolution kernel sampled on a grid centred at the group identity."""

    field: GridField
    mass: float
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def spec(self) -> GridSpec:
        return self.field.spec

    @property
    def values(self) -> np.ndarray:
        return self.field.values


def _kernel_operator(spec: GridSpec, generator: str) -> SubLaplacianOperator:
    if any(c % 2 == 0 for c in spec.counts):
        raise ValueError("kernel grids need an odd sample count on every axis")
    kspec = spec.kernel_spec()
    return SubLaplacianOperator(kspec, generator)


def _impulse(spec: GridSpec) -> GridField:
    v = np.zeros(spec.shape)
    v[tuple(c // 2 for c in spec.counts)] = 1.0 / spec.cell_volume
    return GridField(spec, v)


def _check_resolution(spec: GridSpec, s: float) -> None:
    hmax = max(spec.spacing[:-1])
    if math.sqrt(s) < hmax:
        raise ValueError(f"sqrt(s)={math.sqrt(s):.3g} is below the horizontal spacing {hmax:.3g}")
    if math.sqrt(s) < 2 * hmax:
        warnings.warn("heat kernel diffusion width is under two grid cells", RuntimeWarning)


def _as_kernel(L: SubLaplacianOperator, g, kind: str, params: dict) -> KernelField:
    k = operator_function(L, g, _impulse(L.spec))
    k = k.with_values(k.values.real)
    mass = float(k.values.real.sum() * L.spec.cell_volume)
    return KernelField(k, mass, kind, params)


def heat_kernel(spec: GridSpec, s: float, generator: str = "radial",
                operator: Optional[SubLaplacianOperator] = None) -> KernelField:
    """Heat kernel ``h_s = exp(-s A) delta`` for a unit-mass impulse at the identity.

    ``spec`` needs odd counts; the kernel lives on ``spec.kernel_spec()``.
    Pass ``operator`` to reuse a factorization.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    L = operator if operator is not None else _kernel_operator(spec, generator)
    _check_resolution(L.spec, s)
    return _as_kernel(L, SpectralFunction.heat(s), "heat", {"s": s, "generator": L.generator})


def bessel_s_quadrature(alpha: float, s0: float = 1e-4, s_max: float = 40.0,
                        n_jacobi: int = 24, n_panel: int = 16):
    """Nodes and weights for ``int_0^{s_max} s^{a-1} e^{-s} phi(s) ds``.

    A Gauss-Jacobi rule carries the ``s^{a-1}`` endpoint singularity on
    ``[0, s0]``; geometric Gauss-Legendre panels (ratio 2) cover ``[s0, s_max]``.
    Returns ``(nodes, weights, tail)`` where the weights already include
    ``s^{a-1} e^{-s} / Gamma(a)`` and ``tail`` bounds the neglected mass.
    """
    x, w = roots_jacobi(n_jacobi, 0.0, alpha - 1.0)
    nodes = [s0 * (1 + x) / 2]
    weights = [w * (s0 / 2) ** alpha * np.exp(-nodes[0])]
    gx, gw = roots_legendre(n_panel)
    edges = [s0]
    while edges[-1] < s_max:
        edges.append(min(2 * edges[-1], s_max))
    for a, b in zip(edges[:-1], edges[1:]):
        s = a + (b - a) * (gx + 1) / 2
        nodes.append(s)
        weights.append(gw * (b - a) / 2 * s ** (alpha - 1) * np.exp(-s))
    nodes, weights = np.concatenate(nodes), np.concatenate(weights) / gamma(alpha)
    tail = math.exp(-s_max) * s_max ** max(alpha - 1, 0) * (1 + abs(alpha - 1)) / gamma(alpha)
    return nodes, weights, tail


def bessel_kernel_H(spec: GridSpec, alpha: float, generator: str = "radial",
                    operator: Optional[SubLaplacianOperator] = None) -> KernelField:
    """Group Bessel kernel ``B_a = Gamma(a)^{-1} int s^{a-1} e^{-s} h_s ds`` by s-quadrature."""
    if not 0 < alpha <= 4:
        raise ValueError("alpha must lie in (0, 4]")
    nodes, weights, tail = bessel_s_quadrature(alpha)

    def g(lam):
        lam = np.maximum(np.asarray(lam, dtype=float), 0.0)
        return np.exp(-np.multiply.outer(lam, nodes)) @ weights

    L = operator if operator is not None else _kernel_operator(spec, generator)
    lam = L.eigenvalues() if L.uses_blocks else np.linspace(0, 1, 3)
    quad_err = float(np.max(np.abs(g(lam) - (1 + np.maximum(lam, 0)) ** (-alpha))))
    return _as_kernel(L, g, "bessel", {"alpha": alpha, "generator": L.generator,
                                       "s_tail_bound": tail, "s_quadrature_error": quad_err})


def kernel_asymmetry(k: KernelField) -> float:
    """``max |k(x) - k(x^{-1})| / max |k|``; inversion is negation of coordinates."""
    v = k.values
    scale = np.abs(v).max()
    return 0.0 if scale == 0 else float(np.abs(v - v[(slice(None, None, -1),) * v.ndim]).max() / scale)


# ---------------------------------------------------------------- group convolution

def group_convolve(f: GridField, k: KernelField, budget: float = CONV_BUDGET) -> GridField:
    """``(f * k)(x) = sum_y f(y) k(y^{-1} x) * cell volume`` on the grid of ``f``.

    Kernel and field grids must share their spacings, so horizontal offsets
    ``x_z - y_z`` are exact lattice offsets of the kernel grid.  The vertical
    coordinate ``x_t - y_t + (1/2) sum(y_{n+i} x_i - y_i x_{n+i})`` is off the
    lattice and the kernel is interpolated linearly in ``t``, which preserves
    mass and positivity.  The kernel vanishes outside its box and ``f`` is
    zero-extended.
    """
    fs, ks = f.spec, k.spec
    if fs.n != ks.n or not np.allclose(fs.spacing, ks.spacing, rtol=1e-12, atol=0):
        raise ValueError("field and kernel grids must have the same spacings")
    Hf = int(np.prod(fs.counts[:-1]))
    cost = float(Hf) ** 2 * fs.n_vert
    if cost > budget:
        raise ValueError(f"convolution cost {cost:.3g} exceeds budget {budget:.3g}")
    n = fs.n
    Nt, Ntk = fs.n_vert, ks.n_vert
    h = fs.h_vert
    ct = Ntk // 2
    # horizontal lattice indices of field cells relative to the kernel origin
    hz = fs.horizontal_mesh().reshape(-1, 2 * n)
    origin = np.array([fs.extents[a][0] + fs.spacing[a] / 2 for a in range(2 * n)])
    idx = np.rint((hz - origin) / np.array(fs.spacing[:-1])).astype(int)
    kc = np.array([c // 2 for c in ks.counts[:-1]])
    sig_max = 0.5 * np.sum(np.abs(hz[:, :n]).max(0) * np.abs(hz[:, n:]).max(0)) * 2
    m_max = int(math.ceil(sig_max / h)) + 2
    P = _fast_len(Nt + Ntk + 2 * m_max + 2)
    nu = np.arange(P)
    F = np.fft.fft(f.values.reshape(Hf, Nt), n=P, axis=1)
    K = np.fft.fft(k.values.reshape(-1, Ntk), n=P, axis=1)
    kshape = ks.counts[:-1]
    out = np.empty((Hf, Nt), dtype=complex)
    lin = np.exp(2j * np.pi * nu / P)
    for i in range(Hf):
        off = idx[i] - idx + kc
        ok = np.all((off >= 0) & (off < np.array(kshape)), axis=1)
        if not np.any(ok):
            out[i] = 0
            continue
        kidx = np.ravel_multi_index(off[ok].T, kshape)
        x, y = hz[i], hz[ok]
        sigma = 0.5 * (y[:, n:] @ x[:n] - y[:, :n] @ x[n:])
        m = sigma / h
        m0 = np.floor(m)
        th = (m - m0)[:, None]
        phase = np.exp(2j * np.pi * np.outer(m0, nu) / P) * ((1 - th) + th * lin)
        S = np.einsum("jp,jp->p", F[ok] * K[kidx], phase)
        out[i] = np.fft.ifft(S)[ct:ct + Nt]
    res = out * fs.cell_volume
    if not np.any(f.values.imag) and not np.any(k.values.imag):
        res = res.real
    return f.with_values(res.reshape(fs.shape))


def _fast_len(n: int) -> int:
    from scipy.fft import next_fast_len
    return next_fast_len(n)


# ---------------------------------------------------------------- composite operators

def lambda_op(f: GridField, alpha: float, variant: str = "Lambda",
              operator: Optional[SubLaplacianOperator] = None) -> GridField:
    """``Lambda_a = (1-Delta)^{-a} |T|^a`` or its formal adjoint ``|T|^a (1-Delta)^{-a}``."""
    if not 0 <= alpha <= 2:
        raise ValueError("alpha must lie in [0, 2]")
    if variant not in ("Lambda", "Lambda*"):
        raise ValueError("variant must be 'Lambda' or 'Lambda*'")
    if alpha == 0:
        return f
    L = operator if operator is not None else SubLaplacianOperator(f.spec)
    T = VerticalSymbol.abs_power(alpha)
    R = SpectralFunction.shifted_power(-alpha)
    if variant == "Lambda":
        return operator_function(L, R, vertical_multiplier(f, T))
    return vertical_multiplier(operator_function(L, R, f), T)


def horizontal_gradient_grid(f: GridField) -> np.ndarray:
    """Centred-difference ``(X_1 f, .., Y_n f)``, shape ``(2n,) + grid shape``."""
    spec = f.spec
    n = spec.n
    v = f.values
    periodic = spec.mode == "periodic"

    def d(axis):
        h = spec.spacing[axis]
        if periodic:
            return (np.roll(v, -1, axis) - np.roll(v, 1, axis)) / (2 * h)
        return np.gradient(v, h, axis=axis, edge_order=2)

    mesh = [spec.centers(a) for a in range(2 * n)]
    dt = d(2 * n)
    out = []
    for j in range(n):
        shape = [1] * spec.ndim
        shape[n + j] = -1
        out.append(d(j) - mesh[n + j].reshape(shape) / 2 * dt)
    for j in range(n):
        shape = [1] * spec.ndim
        shape[j] = -1
        out.append(d(n + j) + mesh[j].reshape(shape) / 2 * dt)
    return np.array(out)


def horizontal_sobolev_norm(f: GridField, p: float, alpha: float, flavor: str = "inhomogeneous",
                            operator: Optional[SubLaplacianOperator] = None) -> float:
    """Horizontal Sobolev gauge of order ``alpha``.

    ``inhomogeneous``: ``|f|_p + |A^{a/2} f|_p``; ``homogeneous``:
    ``|A^{a/2} f|_p``; ``W1p`` (``alpha = 1`` only): ``|f|_p + | |grad_H f| |_p``
    with centred differences.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    if flavor not in ("inhomogeneous", "homogeneous", "W1p"):
        raise ValueError(f"unknown flavor {flavor!r}")
    if flavor == "W1p":
        if alpha != 1:
            raise ValueError("the W1p flavor needs alpha = 1")
        g = np.sqrt(np.sum(np.abs(horizontal_gradient_grid(f)) ** 2, axis=0))
        return lp_norm(f, p) + lp_norm(f.with_values(g), p)
    if alpha == 0:
        part = lp_norm(f, p)
    else:
        L = operator if operator is not None else SubLaplacianOperator(f.spec)
        part = lp_norm(operator_function(L, SpectralFunction.power(alpha / 2), f), p)
    return part if flavor == "homogeneous" else lp_norm(f, p) + part
