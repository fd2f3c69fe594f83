"""Acceptance criteria 1 to 8, one pass/fail line each.

Every test prints its line even when pytest captures output, so
``pytest tests/test_acceptance.py`` shows the verdicts directly.
"""

import math
import time

import numpy as np
import pytest

from hfrac.config import Config
from hfrac.experiments import run_experiment
from hfrac.fields import GridField, GridSpec, sample
from hfrac.geometry import dilate, group_inv, group_mul, koranyi_dist, koranyi_norm
from hfrac.subelliptic import SpectralFunction, SubLaplacianOperator, operator_function
from hfrac.testfunctions import gaussian, vertical_wave
from hfrac.vertical import VerticalSymbol, hilbert_involution_check, vertical_multiplier

CFG = Config()


def report(capsys, number, title, ok, seconds, limit, detail):
    verdict = "PASS" if ok and seconds < limit else "FAIL"
    with capsys.disabled():
        print(f"\n[criterion {number}] {verdict}  {title}: {detail}; {seconds:.1f}s (limit {limit:g}s)")
    return verdict == "PASS"


def run_experiments(keys):
    t0 = time.perf_counter()
    reports = [run_experiment(k, CFG) for k in keys]
    seconds = time.perf_counter() - t0
    failures = [(r.experiment, c.case, c.metric, c.value, c.threshold) for r in reports for c in r.failures]
    worst = {f"{r.experiment}:{m}": v for r in reports for m, v in r.worst().items()}
    return reports, seconds, failures, worst


def _short(worst):
    return ", ".join(f"{k} {v:.3g}" for k, v in worst.items())


def test_criterion_1_group_and_gauge(capsys):
    rng = np.random.default_rng(CFG.seed)
    t0 = time.perf_counter()
    x, y, z = (rng.normal(size=(1000, 3)) for _ in range(3))
    lam, mu = rng.uniform(0.2, 5.0, (2, 1000))
    assoc = np.abs(group_mul(group_mul(x, y), z) - group_mul(x, group_mul(y, z))).max()
    hom = np.abs(dilate(lam, group_mul(x, y)) - group_mul(dilate(lam, x), dilate(lam, y))).max()
    comp = np.abs(dilate(lam * mu, x) - dilate(lam, dilate(mu, x))).max()
    gauge = np.abs(koranyi_norm(dilate(lam, x)) - lam * koranyi_norm(x)).max()
    left = np.abs(koranyi_dist(group_mul(z, x), group_mul(z, y)) - koranyi_dist(x, y)).max()
    inv = np.abs(group_mul(x, group_inv(x))).max()
    seconds = time.perf_counter() - t0
    worst = max(assoc, hom, comp, gauge, left, inv)
    detail = (f"assoc {assoc:.1e}, dilation {max(hom, comp):.1e}, gauge {gauge:.1e}, "
              f"left invariance {left:.1e} on 1000 cases")
    assert report(capsys, 1, "group and gauge suite", worst <= 1e-12, seconds, 1.0, detail)


def test_criterion_2_spectral_identities(capsys):
    rng = np.random.default_rng(CFG.seed)
    t0 = time.perf_counter()
    spec = GridSpec.box(CFG.n, CFG.grid_half_widths, CFG.grid_counts)
    tau0 = 3 / spec.height
    wave = sample(vertical_wave(1.0, tau0), spec)
    eig = max(np.abs(vertical_multiplier(wave, VerticalSymbol.abs_power(a)).values
                     - (2 * math.pi * tau0) ** a * wave.values).max() for a in (0.25, 0.5, 1.5))
    # mean-zero band-limited data
    t = spec.centers(2)
    coeff = rng.normal(size=spec.shape[:-1] + (8,))
    modes = np.arange(1, 9)
    vals = np.einsum("...k,kt->...t", coeff, np.cos(2 * math.pi * np.outer(modes, t) / spec.height + 0.3))
    f = GridField(spec, vals)
    scale = np.abs(vals).max()
    hilbert = hilbert_involution_check(f)
    P = VerticalSymbol.abs_power
    semi_v = np.abs(vertical_multiplier(vertical_multiplier(f, P(0.3)), P(0.45)).values
                    - vertical_multiplier(f, P(0.75)).values).max() / scale
    inv_v = np.abs(vertical_multiplier(vertical_multiplier(f, VerticalSymbol.bessel(0.8)),
                                       VerticalSymbol.one_plus_absT(0.8)).values - vals).max() / scale
    # (1 + A)^{+-a} on the full grid; the unknown cap is raised explicitly for this check
    L = SubLaplacianOperator(spec, max_unknowns=spec.size)
    g = sample(gaussian(1.0, 1.0), spec)
    S = SpectralFunction.shifted_power
    inv_h = np.abs(operator_function(L, S(0.6), operator_function(L, S(-0.6), g)).values - g.values).max()
    one = operator_function(L, S(-0.7), g).values
    semi_h = np.abs(operator_function(L, S(-0.3), operator_function(L, S(-0.4), g)).values - one).max()
    seconds = time.perf_counter() - t0
    worst = max(eig / (2 * math.pi * tau0) ** 1.5, hilbert, semi_v, inv_v, inv_h, semi_h)
    detail = (f"eigenfunction {eig:.1e}, H^2 {hilbert:.1e}, vertical semigroup {semi_v:.1e}, "
              f"Bessel inverse {inv_v:.1e}, (1+A) inverse {inv_h:.1e}, (1+A) semigroup {semi_h:.1e} "
              f"at {'x'.join(map(str, spec.counts))}")
    assert report(capsys, 2, "spectral identities", worst <= 1e-10, seconds, 30.0, detail)


def _experiment_criterion(capsys, number, title, keys, limit):
    reports, seconds, failures, worst = run_experiments(keys)
    detail = "worst checked values: " + _short(worst)
    if failures:
        detail += f"; failures {failures[:3]}"
    assert report(capsys, number, title, not failures, seconds, limit, detail)


def test_criterion_3_truncation(capsys):
    _experiment_criterion(capsys, 3, "truncation convergence (E7)", ["E7"], 120)


def test_criterion_4_kernels(capsys):
    _experiment_criterion(capsys, 4, "kernel suite (E9)", ["E9"], 300)


def test_criterion_5_embedding(capsys):
    _experiment_criterion(capsys, 5, "embedding (E1)", ["E1"], 600)


def test_criterion_6_poincare(capsys):
    _experiment_criterion(capsys, 6, "Minkowski and homogeneity (E3, E4)", ["E3", "E4"], 300)


def test_criterion_7_example(capsys):
    _experiment_criterion(capsys, 7, "logarithmic counterexample (E5)", ["E5"], 120)


def test_criterion_8_bmo_and_adjoint(capsys):
    _experiment_criterion(capsys, 8, "BMO bound and adjointness (E6, E8)", ["E6", "E8"], 300)
