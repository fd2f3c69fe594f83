"""Flat ``key = value`` configuration for the experiment driver.

Lines starting with ``#`` or ``;`` are comments.  Tuples are comma
separated; ``vhp_cases`` is a comma-separated list of ``p:q:alpha``
triples.  Unknown keys are rejected so typos cannot silently fall back to
defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Tuple

__all__ = ["Config", "load_config", "parse_config"]

_SECTION = "hfrac"


@dataclass
class Config:
    seed: int = 0
    n: int = 1
    # line-wise experiments
    grid_counts: Tuple[int, ...] = (24, 24, 128)
    grid_half_widths: Tuple[float, ...] = (3.0, 4.0)
    # experiments that need the sub-Laplacian (cap 64 000 unknowns)
    sobolev_counts: Tuple[int, ...] = (16, 16, 64)
    sobolev_fine_counts: Tuple[int, ...] = (24, 24, 96)
    # E1
    embed_counts: Tuple[int, ...] = (12, 12, 48)
    embed_fine_counts: Tuple[int, ...] = (24, 24, 96)
    embed_p: Tuple[float, ...] = (1.5, 2.0, 3.0)
    embed_alpha: Tuple[float, ...] = (0.25, 0.5, 0.75)
    embed_dilations: Tuple[float, ...] = (0.5, 1.0, 2.0)
    embed_baseline: str = ""
    # E2
    vhp_cases: str = "2:2:0.5, 2:4:0.5, 1.5:2:0.25, 3:4:0.75"
    vhp_dilations: Tuple[float, ...] = (0.8, 1.25)
    # E3
    mink_p: Tuple[float, ...] = (1.0, 1.5, 2.0, 3.0, 4.0)
    mink_alpha: Tuple[float, ...] = (0.25, 0.5, 0.75)
    mink_random: int = 20
    # E4
    homog_r: Tuple[float, ...] = (0.5, 2.0, 4.0)
    homog_n2_counts: Tuple[int, ...] = (8, 8, 8, 8, 32)
    # E5
    ex61_R: float = 3.0
    ex61_t: Tuple[float, ...] = (1e-12, 1e-13, 1e-14)
    ex61_points_per_t: int = 8
    ex61_slope_t: Tuple[float, ...] = (1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
    ex61_origin_halvings: int = 24
    # E6
    bmo_counts: Tuple[int, ...] = (48, 48, 192)
    bmo_half_widths: Tuple[float, ...] = (2.5, 2.5)
    bmo_R: Tuple[float, ...] = (1.0, 3.0)
    bmo_dilations: Tuple[float, ...] = (0.8, 1.5, 2.0)
    bmo_lattice: int = 13
    bmo_levels: int = 3
    # E7
    trunc_alpha: Tuple[float, ...] = (0.25, 0.5, 0.75)
    trunc_counts: Tuple[int, ...] = (8, 8, 128)
    # E8
    adjoint_counts: Tuple[int, ...] = (16, 16, 64)
    adjoint_alpha: Tuple[float, ...] = (0.25, 0.5, 0.75)
    # E9
    kernel_counts: Tuple[int, ...] = (17, 17, 33)
    kernel_fine_counts: Tuple[int, ...] = (25, 25, 49)
    kernel_half_widths: Tuple[float, ...] = (6.0, 6.0)
    kernel_s: Tuple[float, ...] = (1.0, 2.0)
    kernel_alpha: Tuple[float, ...] = (0.5, 1.0)
    # thresholds
    thr_identity: float = 1e-10
    thr_drift: float = 0.2
    thr_baseline_factor: float = 1.5
    thr_minkowski: float = 1e-3
    thr_homogeneity: float = 1e-6
    thr_dilation_vhp: float = 0.05
    thr_trunc: float = 0.02
    thr_trunc_fine: float = 0.01
    thr_rate_factor: float = 0.9
    thr_ex61_slope: float = 0.45
    thr_omega_sup: float = 12.0
    thr_bmo_refine: float = 2.0
    thr_bmo_dilation: float = 0.1
    thr_adjoint: float = 1e-6
    thr_kernel_mass: float = 1e-3
    thr_bessel_mass: float = 1e-2
    thr_symmetry: float = 1e-6
    thr_scaling: float = 0.05
    thr_consistency: float = 0.05
    thr_assoc: float = 0.02

    def vhp_triples(self):
        out = []
        for item in self.vhp_cases.split(","):
            p, q, a = (float(x) for x in item.strip().split(":"))
            out.append((p, q, a))
        return out

    def as_dict(self) -> dict:
        return asdict(self)


def _convert(raw: str, default):
    raw = raw.strip()
    if isinstance(default, tuple):
        kind = type(default[0]) if default else float
        items = [x.strip() for x in raw.split(",") if x.strip()]
        return tuple(kind(float(x)) if kind is int else kind(x) for x in items)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(float(raw))
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config(text: str, base: Optional[Config] = None) -> Config:
    """Parse flat ``key = value`` text on top of ``base`` (defaults if omitted)."""
    parser = configparser.ConfigParser(comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    parser.optionxform = str
    parser.read_string(f"[{_SECTION}]\n" + text)
    cfg = base if base is not None else Config()
    known = {f.name: f for f in fields(Config)}
    values = asdict(cfg)
    for key, raw in parser[_SECTION].items():
        if key not in known:
            raise ValueError(f"unknown configuration key {key!r}")
        values[key] = _convert(raw, values[key])
    return Config(**values)


def load_config(path) -> Config:
    return parse_config(Path(path).read_text())
