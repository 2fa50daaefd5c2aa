"""Command-line front end: ``cavity-opa <subcommand> ...``.

All rates are in units of kappa_0.  Physical flags default to the base
lambda/2 operating point (Delta = -1.25e5, Omega = 1.25e4, g = 1.25e3,
delta_c = -24, kappa = 1, gamma = 0); ``--config`` loads a JSON scenario
which individual flags then override.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

from .analytics import MotionParams
from .engine import PROVENANCES
from .errors import CavityOPAError
from .scenarios import (
    BASE,
    FIGURES,
    SWEEP_PARAMETERS,
    GridSpec,
    ScenarioConfig,
    parse_range,
    run_figure,
    run_scenario,
    run_sweep,
)
from .model import SystemParams

_PARAM_FLAGS = (
    ("delta", "Delta, laser-atom detuning"),
    ("delta_c", "delta_c, laser-cavity detuning"),
    ("g", "vacuum coupling g"),
    ("omega", "laser Rabi frequency Omega"),
    ("gamma", "spontaneous-emission rate gamma"),
    ("kappa", "cavity decay rate kappa"),
    ("kx1", "k x_1 (rad)"),
    ("kx2", "k x_2 (rad)"),
)


def _add_system(p, motion=False):
    g = p.add_argument_group("system (rates in units of kappa_0)")
    g.add_argument("--config", type=Path, help="JSON scenario file used as the base")
    g.add_argument("--name", help="scenario name used in file names and column headers")
    for key, text in _PARAM_FLAGS:
        g.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float, help=text)
    g.add_argument("--n-max", type=int, help="photon-number cutoff (default 15)")
    g.add_argument("--n-max-cap", type=int, help="largest cutoff tried by the tail check")
    g.add_argument("--gamma-prime", type=float, help="fix gamma' for the analytic model")
    g.add_argument("--prefactor", type=float, help="prefactor of gamma' = c gamma g^2/Delta^2")
    g.add_argument("--phase", type=float, help="quadrature phase in rad (default pi/4)")
    if motion:
        g.add_argument("--nu", type=float, help="trap frequency nu")
        g.add_argument("--k-qbar", type=float, help="k times the oscillation amplitude")


def _add_grid(p):
    p.add_argument("--points", type=int, help="number of omega points (default 201)")
    p.add_argument("--half-width", type=float, help="omega grid spans +/- this (default 5)")


def _config_from(args, default_name, outputs=None, series=None) -> ScenarioConfig:
    if args.config is not None:
        cfg = ScenarioConfig.load(args.config)
    else:
        cfg = ScenarioConfig(default_name, SystemParams(**BASE))
    changes = {k: getattr(args, k) for k, _ in _PARAM_FLAGS if getattr(args, k) is not None}
    if getattr(args, "n_max", None) is not None:
        changes["n_max"] = args.n_max
    kw = {}
    if changes:
        kw["params"] = cfg.params.replace(**changes)
        cap = max(cfg.n_max_cap, kw["params"].n_max)
        kw["n_max_cap"] = cap
    if getattr(args, "n_max_cap", None) is not None:
        kw["n_max_cap"] = args.n_max_cap
    if args.name:
        kw["name"] = args.name
    if args.gamma_prime is not None:
        kw["gamma_prime_override"] = args.gamma_prime
    if args.prefactor is not None:
        kw["gamma_prime_prefactor"] = args.prefactor
    if args.phase is not None:
        kw["phase"] = args.phase
    if getattr(args, "nu", None) is not None or getattr(args, "k_qbar", None) is not None:
        base = cfg.motion
        nu = args.nu if args.nu is not None else (base.nu if base else None)
        kq = args.k_qbar if args.k_qbar is not None else (base.k_qbar if base else 0.0)
        if nu is None:
            raise SystemExit("error: --k-qbar needs --nu (trap frequency)")
        kw["motion"] = MotionParams(nu, kq)
    if getattr(args, "points", None) is not None or getattr(args, "half_width", None) is not None:
        kw["grid"] = GridSpec(args.points or cfg.grid.points, args.half_width or cfg.grid.half_width)
    if outputs is not None:
        kw["outputs"] = outputs
    if series is not None:
        kw["series"] = series
    return cfg.replace(**kw)


def _print_rows(rows):
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        if isinstance(v, float):
            v = f"{v:.10g}"
        print(f"{k:<{width}}  {v}")


def cmd_spectrum(args):
    series = tuple(args.series.split(",")) if args.series else None
    cfg = _config_from(args, "spectrum", ("spectrum",), series)
    res = run_scenario(cfg, args.out, workers=args.workers)
    for prov, s in res.spectra.items():
        print(f"{prov:16s} S(0)={s.at(0.0):.6f}  min S={s.s.min():.6f}  points={s.omega.size}")
    if res.n_max_used is not None:
        print(f"n_max used: {res.n_max_used}")
    if args.out:
        print(f"wrote {res.files['spectrum']}")
    return 0


def cmd_steady(args):
    cfg = _config_from(args, "steady", ("steady",), ("numeric_full",))
    res = run_scenario(cfg, args.out)
    st, an = res.stats, res.analytic_stats
    _print_rows([
        ("photon_number", st.photon_number),
        ("photon_number (analytic)", an["photon_number"]),
        ("quadrature_variance", st.quadrature_variance),
        ("quadrature_variance (analytic)", an["quadrature_variance"]),
        ("excited_population", st.excited_population),
        ("top_sector_population", st.top_sector_population),
        ("steady_residual", st.residual),
        ("n_max", st.n_max),
    ])
    return 0


def cmd_coefficients(args):
    cfg = _config_from(args, "coefficients", ("coefficients",), ())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        e = cfg.coefficients()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _print_rows([
        ("theta_bar", e.theta_bar), ("beta_bar", e.beta_bar), ("chi_bar", e.chi_bar),
        ("alpha_bar", e.alpha_bar), ("gamma_prime", e.gamma_prime),
        ("kappa_prime", e.kappa_prime), ("regime", e.regime), ("stable", e.stable),
    ])
    if args.out:
        res = run_scenario(cfg, args.out)
        print(f"wrote {res.files['coefficients']}")
    return 0


def cmd_validity(args):
    cfg = _config_from(args, "validity", ("validity",), ())
    res = run_scenario(cfg, args.out)
    for c in res.report.checks:
        print(f"{c.flag:8s} {c.name:22s} ratio={c.ratio:<12.6g} {c.condition}")
    for n in res.report.notes:
        print(f"note: {n}")
    return 0


def cmd_figure(args):
    grid = None
    if args.points is not None or args.half_width is not None:
        ref = {"fig4": 500.0}.get(args.figure, 5.0)
        grid = GridSpec(args.points or 201, args.half_width or ref)
    results, files = run_figure(args.figure, args.out, n_max=args.n_max, grid=grid,
                                prefactor=args.prefactor, workers=args.workers)
    for f in files.values():
        print(f"wrote {f}")
    return 0


def cmd_sweep(args):
    values = parse_range(args.range)
    series = ("numeric_full", "analytic_opa") if args.numeric else ("analytic_opa",)
    cfg = _config_from(args, f"sweep_{args.parameter}", ("steady",), series)
    if args.fraction is not None:
        cfg = cfg.replace(gamma_prime_fraction=args.fraction)
    results, files = run_sweep(args.parameter, values, [cfg], args.out)
    r = results[0]
    keys = [k for k in r.rows[0] if k != "value"]
    print(",".join([args.parameter] + keys))
    for row in r.rows:
        print(",".join(_short(row[k]) for k in ["value"] + keys))
    for f in files.values():
        print(f"wrote {f}", file=sys.stderr)
    return 0


def _short(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float) or hasattr(x, "dtype"):
        x = float(x)
        return "nan" if math.isnan(x) else f"{x:.8g}"
    return str(x)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavity-opa",
        description="Squeezed light from two driven atoms in a cavity: master-equation "
                    "numerics, effective-model closed forms and figure datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="output squeezing spectrum")
    _add_system(p, motion=True)
    _add_grid(p)
    p.add_argument("--series", help=f"comma-separated subset of {','.join(PROVENANCES)}")
    p.add_argument("--out", type=Path, help="directory for CSV and manifest")
    p.add_argument("--workers", type=int, help="threads across omega points")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("steady", help="steady-state photon number and quadrature variance")
    _add_system(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("coefficients", help="effective-Hamiltonian coefficients and regime")
    _add_system(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_coefficients)

    p = sub.add_parser("validity", help="margins of the effective-model premises")
    _add_system(p, motion=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_validity)

    p = sub.add_parser("figure", help="regenerate a built-in figure dataset")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--n-max", type=int, default=15)
    p.add_argument("--prefactor", type=float, help="prefactor of gamma' for analytic curves")
    _add_grid(p)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sweep", help="S(0), photon number and variance along a parameter")
    p.add_argument("parameter", choices=SWEEP_PARAMETERS)
    p.add_argument("range", help="start:stop:count or comma-separated values")
    _add_system(p, motion=True)
    p.add_argument("--numeric", action="store_true", help="also solve the full master equation")
    p.add_argument("--fraction", type=float, help="share of kappa' assigned to gamma' (kappa_prime sweeps)")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CavityOPAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
