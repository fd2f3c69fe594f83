import math
import warnings

import numpy as np
import pytest

from hfrac.fields import CallableField, GridField, GridSpec, lp_norm, sample
from hfrac.subelliptic import (KernelField, SpectralFunction, SubLaplacianOperator,
                               assemble_sublaplacian, bessel_kernel_H, bessel_s_quadrature,
                               group_convolve, heat_kernel, horizontal_gradient_grid,
                               horizontal_sobolev_norm, kernel_asymmetry, lambda_op,
                               lanczos_function, operator_function)
from hfrac.testfunctions import bump, default_family, gaussian
from hfrac.vertical import duality_pairing

SPEC = GridSpec.box(1, (3.0, 4.0), (8, 8, 32))
KSPEC = GridSpec.box(1, (3.0, 6.0), (25, 25, 33))


@pytest.fixture(scope="module")
def L():
    return assemble_sublaplacian(SPEC)


@pytest.fixture(scope="module")
def kop():
    return SubLaplacianOperator(KSPEC.kernel_spec(), "radial")


def rand_field(spec, rng):
    return GridField(spec, rng.normal(size=spec.shape))


# ---------------------------------------------------------------- assembly

def test_constants_in_kernel_and_symmetry(L):
    one = GridField.constant(SPEC, 1.0)
    assert np.abs(L.apply(one).values).max() <= 1e-12
    assert L.symmetry_defect() <= 1e-14
    assert L.eigenvalues().min() >= -1e-10


def test_quadratic_in_x_interior():
    spec = GridSpec.box(1, (2.0, 2.0), (10, 10, 12), mode="zero")
    L = assemble_sublaplacian(spec)
    f = sample(CallableField(lambda c: c[..., 0] ** 2), spec)
    Af = L.apply(f).values
    # A approximates -Delta and X_1^2 x^2 = 2
    assert np.abs(Af[2:-2, 2:-2, 2:-2] + 2).max() <= 1e-10


def test_left_generator_matches_radial_on_radial_data():
    spec = GridSpec.box(1, (3.0, 4.0), (8, 8, 16))
    f = sample(gaussian(1.0, 1.0), spec)
    a = SubLaplacianOperator(spec, "left").apply(f).values
    b = SubLaplacianOperator(spec, "radial").apply(f).values
    assert np.abs(a - b).max() <= 0.1 * np.abs(a).max()


def test_assembly_errors():
    with pytest.raises(ValueError):
        assemble_sublaplacian(SPEC, max_unknowns=100)
    with pytest.raises(ValueError):
        SubLaplacianOperator(SPEC, "right")


def test_block_and_sparse_routes_agree(L, rng):
    f = rand_field(SPEC, rng)
    direct = L.apply(f).values
    via = operator_function(L, SpectralFunction.identity(), f).values
    assert np.abs(direct - via).max() <= 1e-10 * np.abs(direct).max()


# ---------------------------------------------------------------- matrix functions

def test_identity_function_on_eigenvector(L):
    w, V = L.block_eig(0)
    v = np.zeros((64, 32), dtype=complex)
    v[:, :] = V[:, 5][:, None]
    f = GridField(SPEC, v.reshape(SPEC.shape))
    g = operator_function(L, SpectralFunction.identity(), f)
    assert np.abs(g.values - w[5] * f.values).max() <= 1e-10 * max(1, w[5])


def test_inverse_pair_and_semigroup(L, rng):
    f = rand_field(SPEC, rng)
    S = SpectralFunction.shifted_power
    back = operator_function(L, S(0.7), operator_function(L, S(-0.7), f))
    assert np.abs(back.values - f.values).max() <= 1e-8 * np.abs(f.values).max()
    two = operator_function(L, S(-0.3), operator_function(L, S(-0.4), f))
    one = operator_function(L, S(-0.7), f)
    assert np.abs(two.values - one.values).max() <= 1e-10 * np.abs(one.values).max()
    H = SpectralFunction.heat
    h2 = operator_function(L, H(0.2), operator_function(L, H(0.3), f))
    h1 = operator_function(L, H(0.5), f)
    assert np.abs(h2.values - h1.values).max() <= 1e-9 * np.abs(h1.values).max()


def test_lanczos_matches_eigen_route(rng):
    spec = GridSpec.box(1, (2.0, 2.0), (6, 6, 12), mode="zero")
    L = assemble_sublaplacian(spec)
    f = rand_field(spec, rng)
    g = SpectralFunction.shifted_power(-0.5)
    exact = operator_function(L, g, f).values.real.reshape(-1)
    y, ritz = lanczos_function(L.matrix.dot, g, f.values.real.reshape(-1), tol=1e-10)
    assert np.linalg.norm(y - exact) <= 1e-7 * np.linalg.norm(exact)
    assert ritz >= -1e-10


def test_nonfinite_function_rejected(L, rng):
    with pytest.raises(ValueError):
        operator_function(L, lambda lam: np.full(np.shape(lam), np.inf), rand_field(SPEC, rng))


# ---------------------------------------------------------------- kernels

def test_heat_kernel_mass_symmetry_positivity(kop):
    k = heat_kernel(KSPEC, 0.5, operator=kop)
    assert k.mass == pytest.approx(1.0, abs=1e-3)
    assert kernel_asymmetry(k) <= 1e-6
    assert k.values.min() >= -1e-6


def test_heat_resolution_guard():
    with pytest.raises(ValueError):
        heat_kernel(KSPEC, 0.01)
    with pytest.raises(ValueError):
        heat_kernel(GridSpec.box(1, (3.0, 6.0), (24, 25, 33)), 1.0)
    with pytest.raises(ValueError):
        heat_kernel(KSPEC, -1.0)


def test_bessel_quadrature_weights():
    for a in (0.25, 0.5, 1.0, 2.5):
        x, w, tail = bessel_s_quadrature(a)
        assert w.sum() == pytest.approx(1.0, abs=1e-10)
        # Laplace transform oracle: int s^{a-1} e^{-s} e^{-s lam} / Gamma(a) = (1+lam)^{-a}
        for lam in (0.5, 3.0, 20.0):
            assert np.dot(w, np.exp(-lam * x)) == pytest.approx((1 + lam) ** (-a), rel=1e-8)
        assert tail < 1e-13


def test_bessel_kernel_mass_symmetry_positivity(kop):
    k = bessel_kernel_H(KSPEC, 1.0, operator=kop)
    assert k.mass == pytest.approx(1.0, abs=1e-2)
    assert kernel_asymmetry(k) <= 1e-6
    assert k.values.min() >= -1e-6
    with pytest.raises(ValueError):
        bessel_kernel_H(KSPEC, 5.0, operator=kop)


# ---------------------------------------------------------------- convolution

def _impulse_kernel(spec):
    ks = spec.kernel_spec()
    v = np.zeros(ks.shape)
    v[tuple(c // 2 for c in ks.counts)] = 1 / ks.cell_volume
    return KernelField(GridField(ks, v), 1.0, "impulse")


def test_convolution_with_impulse_is_identity(rng):
    spec = GridSpec.box(1, (2.0, 2.0), (9, 9, 17), mode="zero")
    f = rand_field(spec, rng)
    g = group_convolve(f, _impulse_kernel(spec))
    assert np.abs(g.values - f.values).max() <= 1e-6


def test_convolution_of_constant_scales_by_mass(kop):
    k = heat_kernel(KSPEC, 0.5, operator=kop)
    # same spacings as the kernel, so the kernel support around the centre lies inside the box
    big = GridSpec(1, tuple((-(c * h) / 2, (c * h) / 2) for c, h in zip((25, 25, 33), KSPEC.spacing)),
                   (25, 25, 33), mode="zero")
    g = group_convolve(GridField.constant(big, 2.0), k)
    centre = g.values[12, 12, 16]
    assert centre == pytest.approx(2.0 * k.mass, rel=1e-3)


def test_convolution_young_bound(kop, rng):
    k = bessel_kernel_H(KSPEC, 0.5, operator=kop)
    spec = GridSpec(1, tuple((-(c * h) / 2, (c * h) / 2) for c, h in zip((13, 13, 17), KSPEC.spacing)),
                    (13, 13, 17), mode="zero")
    f = rand_field(spec, rng)
    g = group_convolve(f, k)
    k1 = np.abs(k.values).sum() * KSPEC.cell_volume
    for p in (1, 2, math.inf):
        assert lp_norm(g, p) <= k1 * lp_norm(f, p) * 1.01


def test_convolution_errors(kop):
    k = heat_kernel(KSPEC, 0.5, operator=kop)
    with pytest.raises(ValueError):
        group_convolve(GridField.zeros(SPEC), k)
    spec = GridSpec(1, tuple((-(c * h) / 2, (c * h) / 2) for c, h in zip((13, 13, 17), KSPEC.spacing)),
                    (13, 13, 17), mode="zero")
    with pytest.raises(ValueError):
        group_convolve(GridField.zeros(spec), k, budget=10)


# ---------------------------------------------------------------- composites and norms

def test_lambda_identity_at_zero_and_adjointness(L, rng):
    f = sample(gaussian(1.0, 1.0), SPEC)
    assert lambda_op(f, 0.0) is f
    phi = sample(bump(1.2, 1.0), SPEC)
    for a in (0.25, 0.5, 0.75):
        lhs = duality_pairing(lambda_op(phi, a, operator=L), f)
        rhs = duality_pairing(phi, lambda_op(f, a, "Lambda*", operator=L))
        assert abs(lhs - rhs) <= 1e-6 * abs(lhs)
    with pytest.raises(ValueError):
        lambda_op(f, 2.5)
    with pytest.raises(ValueError):
        lambda_op(f, 0.5, "Gamma")


def test_lambda_norm_stable_under_refinement():
    f = gaussian(1.0, 1.0)
    r = []
    for counts in ((8, 8, 32), (12, 12, 48)):
        spec = GridSpec.box(1, (3.0, 4.0), counts)
        g = sample(f, spec)
        r.append(lp_norm(lambda_op(g, 0.5), 2) / lp_norm(g, 2))
    assert abs(r[1] / r[0] - 1) <= 0.2


def test_gradient_of_coordinate_fields():
    spec = GridSpec.box(1, (2.0, 2.0), (8, 8, 16), mode="zero")
    # X t = -y/2 and Y t = x/2
    g = horizontal_gradient_grid(sample(CallableField(lambda c: c[..., 2]), spec))
    x, y, _ = np.moveaxis(spec.mesh(), -1, 0)
    assert np.allclose(g[0], -y / 2) and np.allclose(g[1], x / 2)


def test_horizontal_sobolev_examples(L):
    z = GridField.zeros(SPEC)
    assert horizontal_sobolev_norm(z, 2, 1.0, operator=L) == 0
    c = GridField.constant(SPEC, 3.0)
    assert horizontal_sobolev_norm(c, 2, 1.0, "homogeneous", operator=L) <= 1e-10
    with pytest.raises(ValueError):
        horizontal_sobolev_norm(z, 2, 0.5, "W1p")
    with pytest.raises(ValueError):
        horizontal_sobolev_norm(z, 1.0, 0.5)


def test_spectral_and_gradient_norms_equivalent(L):
    ratios = []
    for f in default_family():
        g = sample(f, SPEC)
        ratios.append(horizontal_sobolev_norm(g, 2, 1.0, operator=L)
                      / horizontal_sobolev_norm(g, 2, 1.0, "W1p"))
    assert 1 / 3 <= min(ratios) and max(ratios) <= 3
