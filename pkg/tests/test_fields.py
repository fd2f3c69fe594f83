import math
from pathlib import Path

import numpy as np
import pytest

from hfrac.fields import (CallableField, FieldFormatError, GridField, GridSpec, discrete_delta,
                          load_field, lp_norm, sample, save_field, support_check,
                          vertical_convolve, vertical_shift)

FIXTURES = Path(__file__).parent / "fixtures"


def tline(spec, func):
    return sample(CallableField(lambda c: func(c[..., -1]), n=spec.n), spec)


# ---------------------------------------------------------------- grids

def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec.box(1, (1.0, 1.0), (3, 8, 8))
    with pytest.raises(ValueError):
        GridSpec(1, ((0, 1), (0, 1), (1, 0)), (4, 4, 4))
    with pytest.raises(ValueError):
        GridSpec(1, ((0, 1), (0, 1)), (4, 4))
    with pytest.raises(ValueError):
        GridSpec.box(1, 1.0, 8, mode="reflect")


def test_gridspec_geometry():
    s = GridSpec.box(1, (3.0, 4.0), (6, 6, 16))
    assert s.spacing == (1.0, 1.0, 0.5)
    assert s.cell_volume == 0.5
    assert s.height == 8.0
    assert s.volume == pytest.approx(36 * 8)
    assert np.allclose(s.centers(2)[:3], [-3.75, -3.25, -2.75])
    assert s.mesh().shape == (6, 6, 16, 3)
    k = GridSpec.box(1, 1.0, (5, 5, 9)).kernel_spec()
    assert np.allclose([k.centers(a)[c // 2] for a, c in enumerate(k.counts)], 0)
    d = s.dilated(2.0)
    assert d.extents[0] == (-6.0, 6.0) and d.extents[2] == (-16.0, 16.0)
    assert s.refined().counts == (12, 12, 32)


def test_gridfield_is_immutable(small_spec):
    f = GridField.zeros(small_spec)
    with pytest.raises(AttributeError):
        f.values = None
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1
    with pytest.raises(ValueError):
        GridField(small_spec, np.full(small_spec.shape, np.nan))


def test_lines_are_vertical_and_contiguous(small_spec):
    f = sample(CallableField(lambda c: c[..., 0] + 10 * c[..., 2]), small_spec)
    ln = f.line((2, 3))
    assert ln.spacing == small_spec.h_vert
    assert len(ln) == small_spec.n_vert
    assert np.allclose(np.diff(ln.values.real), 10 * small_spec.h_vert)
    assert f.values.flags["C_CONTIGUOUS"]
    assert f.lines().shape == (64, 32)


def test_arithmetic_checks_grids(small_spec):
    f = GridField.constant(small_spec, 2.0)
    g = GridField.constant(small_spec.refined(), 1.0)
    assert np.all((f + 1).values == 3) and np.all((2 * f - f).values == 2)
    with pytest.raises(ValueError):
        f + g


# ---------------------------------------------------------------- sampling

def test_sample_constant_and_cell_centres():
    spec = GridSpec(1, ((-1, 1), (-1, 1), (-1, 1)), (4, 4, 4))
    assert np.all(sample(CallableField(lambda c: np.ones(c.shape[:-1])), spec).values == 1)
    f = tline(spec, lambda t: t)
    assert np.allclose(f.values[1, 2].real, [-0.75, -0.25, 0.25, 0.75])


def test_sample_refinement_second_order():
    # linear interpolation of the coarse samples onto fine centres: O(h^2)
    g = lambda t: np.exp(-t ** 2)
    errs = []
    for N in (32, 64, 128):
        c = GridSpec.box(1, (1.0, 4.0), (4, 4, N))
        fine = c.refined(2, axes=[2])
        coarse_vals = tline(c, g).values[0, 0].real
        fine_vals = tline(fine, g).values[0, 0].real
        interp = np.interp(fine.centers(2), c.centers(2), coarse_vals)
        inner = slice(2, -2)
        errs.append(np.abs(interp - fine_vals)[inner].max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert rates.min() > 1.8


def test_sample_rejects_nonfinite_and_index(small_spec):
    with pytest.raises(ValueError):
        sample(CallableField(lambda c: np.full(c.shape[:-1], np.inf)), small_spec)
    with pytest.raises(ValueError):
        sample(CallableField(lambda c: c[..., 0], n=2), small_spec)


def test_support_check():
    spec = GridSpec.box(1, (4.0, 4.0), (16, 16, 32))
    assert support_check(sample(CallableField(lambda c: np.exp(-16 * np.sum(c ** 2, -1))), spec))
    assert not support_check(sample(CallableField(lambda c: np.exp(-0.1 * np.sum(c ** 2, -1))), spec))
    assert support_check(GridField.zeros(spec))


# ---------------------------------------------------------------- shifts

def test_shift_identity_and_lattice(small_spec, rng):
    f = GridField(small_spec, rng.normal(size=small_spec.shape))
    assert vertical_shift(f, 0.0) is f
    g = vertical_shift(f, 3 * small_spec.h_vert)
    assert np.array_equal(g.values, np.roll(f.values, -3, axis=-1))


def test_spectral_shift_of_cosine():
    spec = GridSpec(1, ((-1, 1), (-1, 1), (0, 1)), (4, 4, 64))
    f = tline(spec, lambda t: np.cos(2 * np.pi * t))
    g = vertical_shift(f, 0.25)
    expect = np.cos(2 * np.pi * (spec.centers(2) + 0.25))
    assert np.abs(g.values[0, 0] - expect).max() <= 1e-10


def test_shift_round_trip(small_spec, rng):
    f = GridField(small_spec, rng.normal(size=small_spec.shape))
    back = vertical_shift(vertical_shift(f, 0.337), -0.337)
    assert np.abs(back.values - f.values).max() <= 1e-10


def test_zero_mode_shift():
    spec = GridSpec.box(1, (1.0, 4.0), (4, 4, 64), mode="zero")
    f = tline(spec, lambda t: np.exp(-t ** 2))
    g = vertical_shift(f, 0.3)
    expect = np.exp(-(spec.centers(2) + 0.3) ** 2)
    assert np.abs(g.values[0, 0] - expect).max() < 5e-3
    with pytest.raises(ValueError):
        vertical_shift(f, 4.0)


# ---------------------------------------------------------------- convolution

def test_convolve_with_delta_is_identity(small_spec, rng):
    f = GridField(small_spec, rng.normal(size=small_spec.shape))
    g = vertical_convolve(f, discrete_delta(small_spec))
    assert np.abs(g.values - f.values).max() <= 1e-12
    z = GridField(GridSpec.box(1, (1.0, 4.0), (4, 4, 32), mode="zero"), rng.normal(size=(4, 4, 32)))
    assert np.abs(vertical_convolve(z, discrete_delta(z.spec)).values - z.values).max() <= 1e-12


def test_box_kernel_on_constant(small_spec):
    k = np.zeros(small_spec.n_vert)
    c = small_spec.n_vert // 2
    k[c - 2:c + 3] = 1 / (5 * small_spec.h_vert)
    g = vertical_convolve(GridField.constant(small_spec, 3.0), k)
    assert np.allclose(g.values, 3.0, atol=1e-12)


def test_gaussian_convolution_closed_form():
    spec = GridSpec.box(1, (1.0, 10.0), (4, 4, 512))
    s1, s2 = 0.6, 0.8
    gauss = lambda t, s: np.exp(-t ** 2 / (2 * s * s)) / (s * math.sqrt(2 * math.pi))
    f = tline(spec, lambda t: gauss(t, s1))
    k = gauss(spec.centers(2) - spec.centers(2)[spec.n_vert // 2], s2)
    g = vertical_convolve(f, k)
    expect = gauss(spec.centers(2), math.hypot(s1, s2))
    assert np.linalg.norm(g.values[0, 0] - expect) * math.sqrt(spec.h_vert) <= 1e-6


def test_convolution_young_bound(small_spec, rng):
    f = GridField(small_spec, rng.normal(size=small_spec.shape))
    k = rng.normal(size=small_spec.n_vert)
    k1 = np.abs(k).sum() * small_spec.h_vert
    g = vertical_convolve(f, k)
    for p in (1, 2, math.inf):
        assert lp_norm(g, p) <= lp_norm(f, p) * k1 * (1 + 1e-12)


def test_convolution_rejects_wrong_length(small_spec):
    with pytest.raises(ValueError):
        vertical_convolve(GridField.zeros(small_spec), np.ones(3))


# ---------------------------------------------------------------- norms

def test_lp_norm_examples(small_spec):
    c = GridField.constant(small_spec, -2.0)
    assert lp_norm(c, 2) == pytest.approx(2 * math.sqrt(small_spec.volume), rel=1e-14)
    assert lp_norm(GridField.zeros(small_spec), 3) == 0
    assert lp_norm(c, math.inf) == 2.0
    with pytest.raises(ValueError):
        lp_norm(c, 0.5)


def test_lp_norm_gaussian_quadrature_oracle():
    spec = GridSpec.box(1, (1.0, 8.0), (4, 4, 256))
    f = tline(spec, lambda t: np.exp(-t ** 2))
    area = 4.0
    assert lp_norm(f, 2) ** 2 / area == pytest.approx(math.sqrt(math.pi / 2), abs=1e-8)


def test_lp_norm_homogeneity_and_triangle(small_spec, rng):
    for _ in range(20):
        f = GridField(small_spec, rng.normal(size=small_spec.shape) + 1j * rng.normal(size=small_spec.shape))
        g = GridField(small_spec, rng.normal(size=small_spec.shape))
        c = complex(rng.normal(), rng.normal())
        for p in (1, 1.5, 2, 4, math.inf):
            assert lp_norm(c * f, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)
            assert lp_norm(f + g, p) <= (lp_norm(f, p) + lp_norm(g, p)) * (1 + 1e-12)


# ---------------------------------------------------------------- file format

def test_round_trip_bitwise(tmp_path, small_spec, rng):
    f = GridField(small_spec, rng.normal(size=small_spec.shape) + 1j * rng.normal(size=small_spec.shape))
    path = tmp_path / "f.hfld"
    save_field(f, path)
    g = load_field(path)
    assert g.spec == f.spec
    assert g.values.tobytes() == f.values.tobytes()
    z = GridField(GridSpec.box(1, (1.0, 2.0), (4, 4, 8), mode="zero"), np.ones((4, 4, 8)))
    save_field(z, path)
    assert load_field(path).spec.mode == "zero"


def test_committed_little_endian_fixture():
    f = load_field(FIXTURES / "small_field.hfld")
    assert f.spec.counts == (4, 5, 6)
    assert f.spec.extents == ((-1.0, 1.0), (-1.25, 1.25), (-2.0, 1.0))
    i, j, k = np.meshgrid(*(np.arange(c) for c in (4, 5, 6)), indexing="ij")
    assert np.array_equal(f.values, (i + 10 * j + 100 * k) + 1j * (k - i / 2))


def test_format_errors(tmp_path, small_spec):
    good = tmp_path / "g.hfld"
    save_field(GridField.zeros(small_spec), good)
    data = good.read_bytes()
    cases = {
        "magic": b"HFLD2\n" + data[6:],
        "truncated": data[:-8],
        "header": b"HFLD1\n1 8 8\n" + data[data.index(b"\n", 6) + 1:],
        "noline": b"HFLD1\n1 8 8 32",
        "mode": data.replace(b" P\n", b" Q\n", 1),
    }
    for name, blob in cases.items():
        p = tmp_path / f"{name}.hfld"
        p.write_bytes(blob)
        with pytest.raises(FieldFormatError):
            load_field(p)


def test_callable_field_validation():
    with pytest.raises(ValueError):
        CallableField(lambda c: c[..., 0], smoothness="rough")
    f = CallableField(lambda c: c[..., 0], n=1)
    with pytest.raises(ValueError):
        f.evaluate(np.zeros(5))
    assert f.kinks(np.zeros(3)) == []
