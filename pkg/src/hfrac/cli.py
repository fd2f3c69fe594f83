"""Command-line entry point ``hfrac``.

``hfrac run --config FILE [--experiment E1 ...] [--out DIR]``
    run experiments, write ``summary.json`` and ``E<k>_cases.csv``; exit 1 on
    any threshold failure.
``hfrac field sample FUNCTION [key=value ...] --out FILE``
    sample a library test function on a box grid (HFLD1 or ``.npz``).
``hfrac field convert SRC DST``
    convert between HFLD1 and ``.npz`` (chosen by the file extension).
``hfrac kernels build {heat,bessel} --param X --out FILE``
    build a heat or Bessel kernel on an odd-count grid.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import testfunctions
from .config import Config, load_config
from .fields import GridField, GridSpec, load_field, sample, save_field

__all__ = ["main", "build_parser", "read_any", "write_any"]

_FUNCTIONS = {
    "gaussian": testfunctions.gaussian,
    "sheared_gaussian": testfunctions.sheared_gaussian,
    "breathing_gaussian": testfunctions.breathing_gaussian,
    "bump": testfunctions.bump,
    "bump_wave": testfunctions.bump_wave,
    "vertical_wave": testfunctions.vertical_wave,
    "lipschitz_cap": testfunctions.lipschitz_cap,
}


def _ints(text: str):
    return tuple(int(x) for x in text.split(","))


def _floats(text: str):
    return tuple(float(x) for x in text.split(","))


def write_any(f: GridField, path) -> None:
    path = Path(path)
    if path.suffix == ".npz":
        s = f.spec
        np.savez(path, values=f.values, n=s.n, counts=np.array(s.counts),
                 extents=np.array(s.extents, dtype=float), mode=s.mode)
    else:
        save_field(f, path)


def read_any(path) -> GridField:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as z:
            spec = GridSpec(int(z["n"]), tuple(map(tuple, z["extents"].tolist())),
                            tuple(int(c) for c in z["counts"]), str(z["mode"]))
            return GridField(spec, z["values"])
    return load_field(path)


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    from .experiments import run_all
    exps = None
    if args.experiment:
        exps = [e for item in args.experiment for e in item.split(",") if e]
    out = Path(args.out)
    _, code = run_all(cfg, exps, out, log=print)
    print(f"summary written to {out / 'summary.json'}")
    return code


def _cmd_sample(args) -> int:
    kwargs = {}
    for item in args.params:
        k, _, v = item.partition("=")
        if not _:
            raise SystemExit(f"parameter {item!r} must look like key=value")
        kwargs[k] = float(v)
    func = _FUNCTIONS[args.function](n=args.n, **kwargs)
    spec = GridSpec.box(args.n, _floats(args.half_widths), _ints(args.counts), args.mode)
    write_any(sample(func, spec), args.out)
    print(f"{func.name} on {spec.describe()} -> {args.out}")
    return 0


def _cmd_convert(args) -> int:
    write_any(read_any(args.src), args.dst)
    print(f"{args.src} -> {args.dst}")
    return 0


def _cmd_kernels(args) -> int:
    from .subelliptic import bessel_kernel_H, heat_kernel, kernel_asymmetry
    spec = GridSpec.box(args.n, _floats(args.half_widths), _ints(args.counts))
    if args.kind == "heat":
        k = heat_kernel(spec, args.param, generator=args.generator)
    else:
        k = bessel_kernel_H(spec, args.param, generator=args.generator)
    write_any(k.field, args.out)
    print(f"{args.kind} kernel ({args.param:g}) on {k.spec.describe()}: mass {k.mass:.12g}, "
          f"asymmetry {kernel_asymmetry(k):.3g} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hfrac", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run experiments E1..E9")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument("--experiment", action="append",
                     help="experiment id (repeatable or comma separated); default: all")
    run.add_argument("--out", default="hfrac_out", help="output directory")
    run.set_defaults(func=_cmd_run)

    field = sub.add_parser("field", help="sample or convert fields")
    fsub = field.add_subparsers(dest="field_command", required=True)
    smp = fsub.add_parser("sample", help="sample a test function on a grid")
    smp.add_argument("function", choices=sorted(_FUNCTIONS))
    smp.add_argument("params", nargs="*", help="function parameters as key=value")
    smp.add_argument("--n", type=int, default=1)
    smp.add_argument("--counts", default="24,24,128")
    smp.add_argument("--half-widths", default="3,4")
    smp.add_argument("--mode", choices=("periodic", "zero"), default="periodic")
    smp.add_argument("--out", required=True)
    smp.set_defaults(func=_cmd_sample)
    cnv = fsub.add_parser("convert", help="convert between HFLD1 and .npz")
    cnv.add_argument("src")
    cnv.add_argument("dst")
    cnv.set_defaults(func=_cmd_convert)

    ker = sub.add_parser("kernels", help="heat and Bessel kernels")
    ksub = ker.add_subparsers(dest="kernels_command", required=True)
    bld = ksub.add_parser("build", help="build a kernel on an odd-count grid")
    bld.add_argument("kind", choices=("heat", "bessel"))
    bld.add_argument("--param", type=float, required=True, help="s for heat, alpha for bessel")
    bld.add_argument("--n", type=int, default=1)
    bld.add_argument("--counts", default="17,17,33")
    bld.add_argument("--half-widths", default="6,6")
    bld.add_argument("--generator", choices=("radial", "left"), default="radial")
    bld.add_argument("--out", required=True)
    bld.set_defaults(func=_cmd_kernels)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"hfrac: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
