"""Command line front end.

Subcommands ``spheres``, ``growth``, ``estimate``, ``diagnose`` and ``cache``.
Settings come from flags, optionally on top of a TOML config file given
with ``--config``; flags win. The config accepts the same keys as the long
flags (``group``, ``radii``, ``rho``, ``bigR``, ``t``, ``pairs``, ``samples``,
``seed``, ``threads``, ``cache_dir``, ``out``, ``policy``). ``group`` is either
a grammar string or a nested table::

    group = { family = "direct", left = "free(2)", right = { family = "cyclic", order = 3 } }

CSV schemas (column order is fixed):

* spheres:  ``spec,n,count``
* growth:   ``spec,n,count,nu_log,nu_ratio,sandwich``
* estimate: ``spec,n,method,E_n,pairs,stderr,ci95,seed``
* diagnose profile: ``spec,n,rho,R,i,count,ratio,theta,F_proxy,D_proxy,partition_ok``
  (one row per ``i`` then a ``sum`` row)
* diagnose poincare: ``spec,factor,s,N,count,A_N`` (one row per ``N`` then a ``tail`` row)

Exit status is 0 when every requested output was written, 2 for usage and
parse errors, 1 for runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Any, Sequence

from . import cache as cachemod
from .estat import (
    DEFAULT_PAIR_BUDGET,
    DEFAULT_SAMPLES,
    MissingSeed,
    choose_method,
    convergence_series,
    records_to_csv,
    series_to_dat,
)
from .groups import FreeProduct, GroupError, GroupSpec, ParseError, SplitDirectProduct, parse_group
from .relhyp import (
    DEFAULT_T,
    POINCARE_COLUMNS,
    PROFILE_COLUMNS,
    UnsupportedGroup,
    decompose_counts,
    decompose_sphere,
    poincare_partial,
    poincare_rows,
    profile_rows,
    tree_like,
)
from .spheres import (
    BudgetExceeded,
    NoSampler,
    SphereDataset,
    enumerate_sphere,
    growth_report,
    sphere_counts,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CLI_ELEMENT_CAP = 2_000_000
DEFAULTS: dict[str, Any] = {
    "rho": 0.4,
    "bigR": "2",
    "t": DEFAULT_T,
    "pairs": DEFAULT_PAIR_BUDGET,
    "samples": DEFAULT_SAMPLES,
    "seed": None,
    "threads": 1,
    "cache_dir": None,
    "out": None,
    "policy": "auto",
    "element_cap": CLI_ELEMENT_CAP,
    "poincare_n": 200,
    "s": None,
    "method": "auto",
}


class UsageError(Exception):
    pass


# -- parsing helpers --------------------------------------------------------

def parse_radii(text: str | int | Sequence[int]) -> list[int]:
    """``"1..6"``, ``"5,10,20"`` or mixtures like ``"1..3,8"``."""
    if isinstance(text, int):
        return [text]
    if not isinstance(text, str):
        return [int(v) for v in text]
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        try:
            if ".." in part:
                a, b = part.split("..", 1)
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise UsageError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise UsageError(f"bad radius list {text!r}") from exc
    if not out or any(v < 0 for v in out):
        raise UsageError(f"bad radius list {text!r}")
    return out


def group_from_config(value: Any) -> GroupSpec:
    if isinstance(value, str):
        return parse_group(value)
    if isinstance(value, dict):
        family = value.get("family")
        if family in ("free_product", "direct"):
            left, right = group_from_config(value["left"]), group_from_config(value["right"])
            return parse_group(f"{family}({left},{right})")
        if family == "dihedral_inf":
            return parse_group(family)
        arg = next((value[k] for k in ("rank", "dim", "order", "modulus", "arg") if k in value), None)
        if family is None or arg is None:
            raise ParseError(f"incomplete group table {value!r}")
        return parse_group(f"{family}({arg})")
    raise ParseError(f"cannot read a group from {value!r}")


def load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, config file and flags (flags win)."""
    conf = dict(DEFAULTS)
    file_conf = load_config(getattr(args, "config", None))
    conf.update({k.replace("-", "_"): v for k, v in file_conf.items()})
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "func", "command"):
            conf[key] = value
    if conf.get("group") is None and args.command not in ("cache",):
        raise UsageError("--group is required")
    if args.command != "cache":
        conf["group"] = group_from_config(conf["group"])
    conf["cache_dir"] = cachemod.cache_dir(conf.get("cache_dir"))
    if int(conf["threads"]) < 1:
        raise UsageError("--threads must be >= 1")
    return conf


# -- datasets through the cache ---------------------------------------------

def load_or_enumerate(spec: GroupSpec, n: int, conf: dict, mode: str = "full") -> SphereDataset:
    directory = conf.get("cache_dir")
    counts_only = mode == "counts_only"
    if directory is not None:
        path = cachemod.cache_path(directory, spec, n, counts_only)
        if path.exists():
            return cachemod.cache_load(path, spec)
    ds = enumerate_sphere(spec, n, mode, threads=int(conf["threads"]))
    if directory is not None:
        cachemod.cache_store(ds, cachemod.cache_path(directory, spec, n, counts_only))
    return ds


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------

def cmd_spheres(conf: dict) -> int:
    spec = conf["group"]
    radii = parse_radii(conf.get("n") or conf.get("radii") or "0")
    rows = []
    for n in radii:
        mode = "full" if sphere_counts(spec, n)[n] <= int(conf["element_cap"]) else "counts_only"
        ds = load_or_enumerate(spec, n, conf, mode)
        rows.append([str(spec), n, ds.count])
    emit(_csv(("spec", "n", "count"), rows), conf.get("out"))
    return 0


def cmd_growth(conf: dict) -> int:
    spec = conf["group"]
    n_max = max(parse_radii(conf.get("n") or conf.get("radii") or "10"))
    if n_max < 2:
        raise UsageError("growth needs n_max >= 2")
    rep = growth_report(spec, n_max)
    rows = [[str(spec), n, c, repr(a), repr(b), repr(r)] for n, c, a, b, r in rep.rows()]
    text = _csv(("spec", "n", "count", "nu_log", "nu_ratio", "sandwich"), rows)
    emit(text + f"# nu_hat={rep.nu_hat!r}\n", conf.get("out"))
    return 0


def cmd_estimate(conf: dict) -> int:
    spec = conf["group"]
    radii = parse_radii(conf.get("radii") or conf.get("n") or "")
    if any(n < 1 for n in radii):
        raise UsageError("E_n needs radii >= 1")
    policy = conf["policy"]
    pairs = int(conf["pairs"])
    seed = None if conf.get("seed") is None else int(conf["seed"])
    if seed is None and any(choose_method(spec, n, policy, pairs) == "sampled" for n in radii):
        raise UsageError("--seed is required for sampled estimates")
    series = convergence_series(
        spec, radii, policy=policy, pair_budget=pairs, samples=int(conf["samples"]),
        seed=seed, threads=int(conf["threads"]),
        load_dataset=lambda s, n: load_or_enumerate(s, n, conf))
    out = conf.get("out")
    emit(records_to_csv(series.records), out)
    dat = conf.get("dat") or (str(Path(out).with_suffix(".dat")) if out else None)
    if dat:
        emit(series_to_dat(series), dat)
    print(f"verdict: {series.verdict}" + (" (mixed methods)" if series.mixed else ""),
          file=sys.stderr)
    return 0


def _diagnostic_target(spec: GroupSpec) -> GroupSpec:
    if tree_like(spec):
        return spec
    if isinstance(spec, SplitDirectProduct) and tree_like(spec.left):
        return spec.left
    raise UnsupportedGroup(f"diagnostics need a free product (or a split product with one on the left), got {spec}")


def cmd_diagnose(conf: dict) -> int:
    spec = conf["group"]
    base = _diagnostic_target(spec)
    radii = parse_radii(conf.get("n") or conf.get("radii") or "")
    grid = parse_radii(conf["bigR"])
    rho, t = float(conf["rho"]), float(conf["t"])
    if not 0 < rho < 0.5:
        raise UsageError(f"--rho must lie in (0, 1/2), got {rho}")
    method = conf["method"]
    rows = []
    for n in radii:
        enumerate_it = method == "enumerate" or (
            method == "auto" and _sphere_size(spec, n) <= int(conf["element_cap"]))
        ds = load_or_enumerate(spec, n, conf) if enumerate_it else None
        for R in grid:
            prof = decompose_sphere(spec, ds, rho, R, t) if ds else decompose_counts(spec, n, rho, R, t)
            rows.extend(profile_rows(prof))
    out = conf.get("out")
    emit(_csv(PROFILE_COLUMNS, rows), f"{out}.profile.csv" if out else None)
    if isinstance(base, FreeProduct):
        s = conf.get("s")
        if s is None:
            s = growth_report(base, 20).nu_hat
        prow = []
        for side in ("left", "right"):
            prow.extend(poincare_rows(poincare_partial(base, side, float(s), int(conf["poincare_n"]))))
        emit(_csv(POINCARE_COLUMNS, prow), f"{out}.poincare.csv" if out else None)
    return 0


def _sphere_size(spec, n):
    return sphere_counts(spec, n)[n]


def cmd_cache(conf: dict) -> int:
    paths: list[Path] = []
    for p in conf.get("paths") or []:
        p = Path(p)
        paths.extend(sorted(p.glob("*.sph")) if p.is_dir() else [p])
    if not paths:
        raise UsageError("no cache files given")
    failed = 0
    for p in paths:
        try:
            ds = cachemod.cache_load(p)
        except (cachemod.CacheError, GroupError, OSError) as exc:
            failed += 1
            print(f"{p}: FAILED {type(exc).__name__}: {exc}")
            continue
        if conf["action"] == "verify":
            print(f"{p}: ok")
        else:
            mode = "counts_only" if ds.counts_only else "full"
            print(f"{p}: spec={ds.spec} radius={ds.radius} count={ds.count} "
                  f"mode={mode} checksum={ds.checksum:016x}")
    return 1 if failed else 0


# -- argument parser --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run config; flags override it")
    common.add_argument("--group", help='group string, e.g. "free_product(abelian(2),free(1))"')
    common.add_argument("--threads", type=int)
    common.add_argument("--cache-dir", dest="cache_dir",
                        help=f"sphere cache directory (default ${cachemod.CACHE_ENV})")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--element-cap", dest="element_cap", type=int,
                        help="largest sphere to materialize")

    parser = argparse.ArgumentParser(prog="stathyp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spheres", parents=[common], help="sphere sizes |S_n|")
    p.add_argument("--n", "--radii", dest="n", help='radii, e.g. "1..6" or "0,5,10"')
    p.set_defaults(func=cmd_spheres)

    p = sub.add_parser("growth", parents=[common], help="growth-rate estimates up to n_max")
    p.add_argument("--n", "--radii", dest="n", help="n_max (largest value of a list)")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("estimate", parents=[common], help="E_n over a list of radii")
    p.add_argument("--n", "--radii", dest="radii")
    p.add_argument("--policy", choices=("auto", "exact", "sampled"))
    p.add_argument("--pairs", type=int, help="pair budget for exact evaluation")
    p.add_argument("--samples", type=int, help="pairs per sampled estimate")
    p.add_argument("--seed", type=int)
    p.add_argument("--dat", help="gnuplot data file (default: --out with .dat suffix)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("diagnose", parents=[common], help="C_{R+i} profiles and Poincare sums")
    p.add_argument("--n", "--radii", dest="n")
    p.add_argument("--rho", type=float)
    p.add_argument("--bigR", help='R grid, e.g. "2..4"')
    p.add_argument("--t", type=float, help="annulus parameter for direct products")
    p.add_argument("--s", type=float, help="Poincare exponent (default: growth estimate)")
    p.add_argument("--poincare-n", dest="poincare_n", type=int)
    p.add_argument("--method", choices=("auto", "enumerate", "count"))
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("cache", help="inspect or verify sphere cache files")
    p.add_argument("action", choices=("inspect", "verify"))
    p.add_argument("paths", nargs="+", help="cache files or directories")
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        conf = resolve(args) if args.command != "cache" else dict(vars(args))
        return args.func(conf)
    except (UsageError, ParseError, MissingSeed) as exc:
        print(f"stathyp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (UnsupportedGroup, ValueError, GroupError, BudgetExceeded, NoSampler,
            cachemod.CacheError, OSError) as exc:
        print(f"stathyp {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
