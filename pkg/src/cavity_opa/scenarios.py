"""Scenario configurations, built-in figure datasets, sweeps and file output.

A scenario is one parameter set plus the series and outputs to compute.
Configurations are JSON documents whose physical keys carry an explicit
unit suffix (``_kappa0`` for rates, ``_rad`` for angles); unknown keys are
rejected.  Every run writes CSV data and a plain-text manifest, each file
atomically (temporary file, then rename).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import re
import tempfile
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (
    EffectiveCoefficients,
    MotionParams,
    analytic_spectrum,
    effective_coefficients,
    motion_spectrum,
    opa_photon_number,
    opa_quadrature_variance,
    validity_report,
)
from .engine import (
    DEFAULT_PHASE,
    PROVENANCES,
    RCOND_SINGULAR,
    STEADY_RESIDUAL_TOL,
    TRUNCATION_TOL,
    SpectrumSeries,
    default_omega_grid,
    output_squeezing_spectrum,
    steady_state,
    steady_stats,
    truncation_tail,
)
from .errors import CavityOPAError, ConfigError, ScenarioError, TruncationInsufficient
from .model import SystemParams, build_liouvillian
from .secular import (
    PeriodicCorrection,
    build_drift,
    drive_amplitude,
    langevin_output_spectrum,
    secular_average,
)

OUTPUTS = ("spectrum", "steady", "coefficients", "validity")
SWEEP_PARAMETERS = ("kappa", "gamma", "gamma_prime", "omega", "g", "kx2", "k_qbar", "kappa_prime")
NMAX_STEP = 4
DEFAULT_NMAX_CAP = 23

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

# config key -> SystemParams field
_SYSTEM_KEYS = {
    "delta_kappa0": "delta",
    "delta_c_kappa0": "delta_c",
    "g_kappa0": "g",
    "omega_kappa0": "omega",
    "gamma_kappa0": "gamma",
    "kappa_kappa0": "kappa",
    "kx1_rad": "kx1",
    "kx2_rad": "kx2",
    "n_max": "n_max",
}
_MOTION_KEYS = {"nu_kappa0": "nu", "k_qbar": "k_qbar", "phi1_rad": "phi1", "phi2_rad": "phi2"}
_GRID_KEYS = {"points", "half_width_kappa0"}
_TOP_KEYS = {
    "name", "system", "motion", "gamma_prime_override_kappa0", "gamma_prime_prefactor",
    "gamma_prime_fraction", "omega_grid", "phase_rad", "outputs", "series", "n_max_cap",
}


@dataclass(frozen=True)
class GridSpec:
    points: int = 201
    half_width: float = 5.0

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 1:
            raise ConfigError(f"grid needs a positive integer point count, got {self.points}")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ConfigError(f"grid half width must be > 0, got {self.half_width}")

    def array(self) -> np.ndarray:
        return default_omega_grid(self.points, self.half_width)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one set of curves.

    ``gamma_prime_override`` fixes the spontaneous-emission damping used by
    the analytic series; when absent it follows gamma g^2/Delta^2 times
    ``gamma_prime_prefactor``.  ``gamma_prime_fraction`` only matters for
    sweeps over kappa', where it sets the share of kappa' given to gamma'.
    """

    name: str
    params: SystemParams
    motion: MotionParams | None = None
    gamma_prime_override: float | None = None
    gamma_prime_prefactor: float = 1.0
    gamma_prime_fraction: float = 0.0
    grid: GridSpec = field(default_factory=GridSpec)
    phase: float = DEFAULT_PHASE
    outputs: tuple = ("spectrum", "steady")
    series: tuple = ("numeric_full", "analytic_opa")
    n_max_cap: int = DEFAULT_NMAX_CAP

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME_RE.match(self.name):
            raise ConfigError(f"scenario name must be a simple file-safe word, got {self.name!r}")
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "series", tuple(self.series))
        for o in self.outputs:
            if o not in OUTPUTS:
                raise ConfigError(f"unknown output {o!r}; choose from {OUTPUTS}")
        for s in self.series:
            if s not in PROVENANCES:
                raise ConfigError(f"unknown series {s!r}; choose from {PROVENANCES}")
        if "analytic_motion" in self.series and self.motion is None:
            raise ConfigError("analytic_motion series needs motion parameters")
        if self.gamma_prime_override is not None and not self.gamma_prime_override >= 0:
            raise ConfigError("gamma_prime_override must be >= 0")
        if not 0 <= self.gamma_prime_fraction < 1:
            raise ConfigError("gamma_prime_fraction must lie in [0, 1)")
        if not self.gamma_prime_prefactor > 0:
            raise ConfigError("gamma_prime_prefactor must be > 0")
        if self.n_max_cap < self.params.n_max:
            raise ConfigError(f"n_max_cap {self.n_max_cap} is below n_max {self.params.n_max}")

    def replace(self, **changes) -> ScenarioConfig:
        return replace(self, **changes)

    def coefficients(self) -> EffectiveCoefficients:
        return effective_coefficients(
            self.params,
            gamma_prime_override=self.gamma_prime_override,
            prefactor=self.gamma_prime_prefactor,
        )

    def to_dict(self) -> dict:
        p = self.params
        d = {
            "name": self.name,
            "system": {k: getattr(p, f) for k, f in _SYSTEM_KEYS.items()},
            "motion": None if self.motion is None
            else {k: getattr(self.motion, f) for k, f in _MOTION_KEYS.items()},
            "gamma_prime_override_kappa0": self.gamma_prime_override,
            "gamma_prime_prefactor": self.gamma_prime_prefactor,
            "gamma_prime_fraction": self.gamma_prime_fraction,
            "omega_grid": {"points": self.grid.points, "half_width_kappa0": self.grid.half_width},
            "phase_rad": self.phase,
            "outputs": list(self.outputs),
            "series": list(self.series),
            "n_max_cap": self.n_max_cap,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        if not isinstance(d, dict):
            raise ConfigError("scenario config must be a JSON object")
        _check_keys(d, _TOP_KEYS, "scenario", required={"name", "system"})
        sysd = d["system"]
        _check_keys(sysd, set(_SYSTEM_KEYS), "system",
                    required={"delta_kappa0", "delta_c_kappa0", "g_kappa0", "omega_kappa0",
                              "gamma_kappa0", "kappa_kappa0"})
        try:
            params = SystemParams(**{_SYSTEM_KEYS[k]: v for k, v in sysd.items()})
            motion = None
            if d.get("motion") is not None:
                _check_keys(d["motion"], set(_MOTION_KEYS), "motion", required={"nu_kappa0", "k_qbar"})
                motion = MotionParams(**{_MOTION_KEYS[k]: v for k, v in d["motion"].items()})
            kw = {}
            if "omega_grid" in d:
                _check_keys(d["omega_grid"], _GRID_KEYS, "omega_grid")
                g = d["omega_grid"]
                kw["grid"] = GridSpec(g.get("points", 201), g.get("half_width_kappa0", 5.0))
            for key, name in (("gamma_prime_override_kappa0", "gamma_prime_override"),
                              ("gamma_prime_prefactor", "gamma_prime_prefactor"),
                              ("gamma_prime_fraction", "gamma_prime_fraction"),
                              ("phase_rad", "phase"), ("outputs", "outputs"),
                              ("series", "series"), ("n_max_cap", "n_max_cap")):
                if key in d:
                    kw[name] = d[key]
            return cls(name=d["name"], params=params, motion=motion, **kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario config: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> ScenarioConfig:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    def save(self, path) -> Path:
        return write_atomic(path, self.dumps())

    @classmethod
    def load(cls, path) -> ScenarioConfig:
        return cls.loads(Path(path).read_text())


def _check_keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {sorted(missing)}")


# ---------------------------------------------------------------- file output

def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def spectra_csv(columns) -> str:
    """``columns`` is a list of (header, SpectrumSeries) sharing one omega grid."""
    if not columns:
        raise ValueError("no spectra to write")
    omega = columns[0][1].omega
    for name, s in columns:
        if not np.array_equal(s.omega, omega):
            raise ValueError(f"series {name!r} uses a different omega grid")
    header = ["omega_over_kappa0"] + [name for name, _ in columns]
    rows = zip(omega, *(s.s for _, s in columns))
    return csv_text(header, rows)


# ---------------------------------------------------------------- running

@dataclass
class NumericSolution:
    params: SystemParams
    liouvillian: object
    rho: object
    stats: object


def solve_numeric(params: SystemParams, n_max_cap: int = DEFAULT_NMAX_CAP,
                  phase: float = DEFAULT_PHASE) -> NumericSolution:
    """Steady state, raising the photon cutoff until the top sector is negligible."""
    n = params.n_max
    while True:
        p = params.replace(n_max=n)
        L = build_liouvillian(p)
        rho = steady_state(L)
        tail = truncation_tail(rho)
        if tail <= TRUNCATION_TOL:
            return NumericSolution(p, L, rho, steady_stats(L, rho, phase))
        if n >= n_max_cap:
            raise TruncationInsufficient(
                f"top photon sector holds {tail:.3g} > {TRUNCATION_TOL:g} at n_max={n} "
                f"(cap {n_max_cap})", tail=tail, n_max=n,
            )
        n = min(n + NMAX_STEP, n_max_cap)


@dataclass
class ScenarioResult:
    name: str
    files: dict
    spectra: dict
    coefficients: EffectiveCoefficients | None
    stats: object = None
    analytic_stats: dict | None = None
    report: object = None
    n_max_used: int | None = None
    wall_time: float = 0.0


class _Stage:
    """Context manager that tags library failures with scenario name and stage."""

    def __init__(self, scenario):
        self.scenario = scenario
        self.stage = "setup"

    def __call__(self, stage):
        self.stage = stage
        return self

    def __enter__(self):
        return self

    def __exit__(self, etype, exc, tb):
        if exc is not None and isinstance(exc, (CavityOPAError, ValueError, ArithmeticError,
                                                np.linalg.LinAlgError)):
            if isinstance(exc, ScenarioError):
                return False
            raise ScenarioError(self.scenario, self.stage, exc) from exc
        return False


def _analytic_stats(eff: EffectiveCoefficients) -> dict:
    if not eff.stable:
        return {"photon_number": math.nan, "quadrature_variance": math.nan}
    return {
        "photon_number": opa_photon_number(eff.alpha_bar, eff.kappa_prime),
        "quadrature_variance": opa_quadrature_variance(eff.alpha_bar, eff.kappa_prime),
    }


def _langevin_model(cfg: ScenarioConfig, eff: EffectiveCoefficients):
    # the operating points tune delta_c to cancel the Stark shift
    model = build_drift(cfg.params, eff, compensate=True)
    if cfg.motion is not None:
        corr = PeriodicCorrection.from_model(model, drive_amplitude(cfg.params), cfg.motion)
        model = secular_average(model, corr)
    return model


def compute_series(cfg: ScenarioConfig, provenance: str, eff: EffectiveCoefficients,
                   omega, numeric: NumericSolution | None = None, workers=None) -> SpectrumSeries:
    label = f"{cfg.name}:{provenance}"
    if provenance == "numeric_full":
        return output_squeezing_spectrum(
            numeric.liouvillian, numeric.rho, numeric.params.kappa, cfg.phase, omega,
            workers=workers, label=label,
        )
    if provenance == "analytic_opa":
        return analytic_spectrum(eff.alpha_bar, eff.kappa, eff.kappa_prime, omega, label=label)
    if provenance == "analytic_motion":
        return motion_spectrum(eff.alpha_bar, eff.kappa, eff.kappa_prime, cfg.motion.k_qbar,
                               omega, label=label)
    if provenance == "langevin_oracle":
        return langevin_output_spectrum(_langevin_model(cfg, eff), cfg.phase, omega, label=label)
    raise ConfigError(f"unknown series {provenance!r}")


def _validity_text(cfg, report) -> str:
    lines = [f"validity report for {cfg.name}", ""]
    for c in report.checks:
        lines.append(f"{c.flag:8s} {c.name:22s} ratio={c.ratio:.6g}  ({c.condition}: "
                     f"{c.lhs:.6g} vs {c.rhs:.6g})")
    lines.append("")
    lines += [f"note: {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, cfgs, files, wall_time, extra=None) -> Path:
    lines = [
        "cavity_opa run manifest",
        f"code_version: {__version__}",
        f"wall_time_s: {wall_time:.3f}",
        f"steady_residual_tol_rel: {STEADY_RESIDUAL_TOL:g}",
        f"truncation_tol: {TRUNCATION_TOL:g}",
        f"rcond_singular: {RCOND_SINGULAR:g}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k}: {v}")
    lines.append("files:")
    for f in files:
        lines.append(f"  {Path(f).name} sha256={_sha256(f)}")
    for cfg in cfgs:
        lines.append(f"config {cfg.name}:")
        lines += ["  " + ln for ln in cfg.dumps().splitlines()]
    return write_atomic(path, "\n".join(lines) + "\n")


def run_scenario(cfg: ScenarioConfig, outdir=None, *, workers=None) -> ScenarioResult:
    """Compute every requested series and output; write files when ``outdir`` is given."""
    t0 = time.perf_counter()
    stage = _Stage(cfg.name)
    with stage("coefficients"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            eff = cfg.coefficients()
            report = validity_report(cfg.params, cfg.motion,
                                     gamma_prime_override=cfg.gamma_prime_override,
                                     prefactor=cfg.gamma_prime_prefactor)
    numeric = None
    need_numeric = "numeric_full" in cfg.series and (
        "spectrum" in cfg.outputs or "steady" in cfg.outputs)
    if need_numeric:
        with stage("steady_state"):
            numeric = solve_numeric(cfg.params, cfg.n_max_cap, cfg.phase)
    spectra = {}
    if "spectrum" in cfg.outputs:
        omega = cfg.grid.array()
        for prov in cfg.series:
            with stage(f"spectrum:{prov}"):
                spectra[prov] = compute_series(cfg, prov, eff, omega, numeric, workers)
    result = ScenarioResult(
        name=cfg.name, files={}, spectra=spectra, coefficients=eff,
        stats=numeric.stats if numeric else None,
        analytic_stats=_analytic_stats(eff), report=report,
        n_max_used=numeric.params.n_max if numeric else None,
    )
    if outdir is not None:
        with stage("write"):
            _write_scenario(cfg, result, Path(outdir))
    result.wall_time = time.perf_counter() - t0
    if outdir is not None:
        with stage("write"):
            result.files["manifest"] = write_manifest(
                Path(outdir) / f"{cfg.name}_manifest.txt", [cfg], list(result.files.values()),
                result.wall_time, {"n_max_used": result.n_max_used},
            )
    return result


def _write_scenario(cfg, result, outdir):
    files = result.files
    name = cfg.name
    if result.spectra:
        cols = [(f"{name}:{prov}", s) for prov, s in result.spectra.items()]
        files["spectrum"] = write_atomic(outdir / f"{name}_spectrum.csv", spectra_csv(cols))
    if "steady" in cfg.outputs:
        keys = ("photon_number", "quadrature_variance", "excited_population",
                "top_sector_population", "residual", "n_max")
        rows = []
        for k in keys:
            num = getattr(result.stats, k) if result.stats is not None else math.nan
            rows.append((k, num, result.analytic_stats.get(k, math.nan)))
        files["steady"] = write_atomic(
            outdir / f"{name}_steady.csv",
            csv_text(["quantity", f"{name}:numeric_full", f"{name}:analytic_opa"], rows))
    if "coefficients" in cfg.outputs:
        e = result.coefficients
        rows = [(k, getattr(e, k)) for k in ("theta_bar", "beta_bar", "chi_bar", "alpha_bar",
                                              "gamma_prime", "kappa_prime", "regime")]
        rows.append(("stable", e.stable))
        files["coefficients"] = write_atomic(outdir / f"{name}_coefficients.csv",
                                             csv_text(["coefficient", "value_kappa0"], rows))
    if "validity" in cfg.outputs:
        files["validity"] = write_atomic(outdir / f"{name}_validity.txt",
                                         _validity_text(cfg, result.report))


# ---------------------------------------------------------------- sweeps

def check_range(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ConfigError("sweep range is empty")
    if not np.all(np.isfinite(v)):
        raise ConfigError("sweep range contains non-finite values")
    if v.size > 1:
        d = np.diff(v)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("sweep range must be strictly monotone")
    return v


def parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ConfigError("sweep range is empty")
            return check_range(np.linspace(float(start), float(stop), n))
        return check_range([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse sweep range {text!r}: {exc}") from exc


def _gamma_for(cfg, gprime):
    p = cfg.params
    if gprime == 0:
        return 0.0
    if p.g == 0:
        raise ConfigError("cannot realize gamma' > 0 without atom-cavity coupling")
    return gprime * p.delta**2 / (cfg.gamma_prime_prefactor * p.g**2)


def apply_sweep_value(cfg: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    p = cfg.params
    if parameter in ("kappa", "omega", "g", "kx2"):
        return cfg.replace(params=p.replace(**{parameter: value}))
    if parameter == "gamma":
        return cfg.replace(params=p.replace(gamma=value), gamma_prime_override=None)
    if parameter == "gamma_prime":
        return cfg.replace(params=p.replace(gamma=_gamma_for(cfg, value)),
                           gamma_prime_override=value)
    if parameter == "kappa_prime":
        gprime = value * cfg.gamma_prime_fraction
        return cfg.replace(params=p.replace(kappa=value - gprime, gamma=_gamma_for(cfg, gprime)),
                           gamma_prime_override=gprime)
    if parameter == "k_qbar":
        if cfg.motion is None:
            raise ConfigError("k_qbar sweep needs motion parameters in the config")
        return cfg.replace(motion=replace(cfg.motion, k_qbar=value))
    raise ConfigError(f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")


def sweep_value_header(parameter: str) -> str:
    if parameter in ("kx2",):
        return "kx2_rad"
    if parameter == "k_qbar":
        return "k_qbar"
    return f"{parameter}_over_kappa0"


SWEEP_FIELDS = ("s0", "photon_number", "quadrature_variance")


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    rows: list
    case: str


def sweep(parameter: str, values, cfg: ScenarioConfig) -> SweepResult:
    """S(0), photon number and squeezed variance at each sweep point.

    Analytic columns are NaN where the effective model has no steady state;
    the numeric columns are computed only when ``numeric_full`` is among the
    configured series.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")
    values = check_range(values)
    numeric = "numeric_full" in cfg.series
    if numeric and parameter == "k_qbar":
        raise ConfigError("the full master equation has pinned atoms; k_qbar sweeps are analytic")
    analytic_prov = "analytic_motion" if cfg.motion is not None else "analytic_opa"
    rows = []
    for v in values:
        c = apply_sweep_value(cfg, parameter, float(v))
        stage = _Stage(f"{cfg.name}@{parameter}={v:g}")
        with stage("coefficients"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                eff = c.coefficients()
        row = {"value": float(v), "regime": eff.regime, "stable": eff.stable,
               "alpha_bar": eff.alpha_bar, "kappa_prime": eff.kappa_prime}
        # the closed forms describe the pure parametric amplifier; a linear
        # drive (beta != 0) displaces the field and they no longer apply
        opa_like = eff.stable and eff.beta_bar == 0
        an = _analytic_stats(eff) if opa_like else dict.fromkeys(
            ("photon_number", "quadrature_variance"), math.nan)
        if opa_like:
            with stage("analytic"):
                row["analytic:s0"] = compute_series(c, analytic_prov, eff, [0.0]).s[0]
        else:
            row["analytic:s0"] = math.nan
        row["analytic:photon_number"] = an["photon_number"]
        row["analytic:quadrature_variance"] = an["quadrature_variance"]
        if numeric:
            if opa_like:
                with stage("steady_state"):
                    sol = solve_numeric(c.params, c.n_max_cap, c.phase)
                with stage("spectrum"):
                    s0 = compute_series(c, "numeric_full", eff, [0.0], sol).s[0]
                row.update({"numeric:s0": s0,
                            "numeric:photon_number": sol.stats.photon_number,
                            "numeric:quadrature_variance": sol.stats.quadrature_variance,
                            "n_max": sol.params.n_max})
            else:
                row.update({"numeric:s0": math.nan, "numeric:photon_number": math.nan,
                            "numeric:quadrature_variance": math.nan, "n_max": 0})
        rows.append(row)
    return SweepResult(parameter, values, rows, cfg.name)


def sweep_csv(results) -> str:
    """One row per sweep value; columns ``<case>:<provenance>:<quantity>``."""
    results = list(results)
    if not results:
        raise ValueError("no sweep results")
    ref = results[0]
    for r in results:
        if r.parameter != ref.parameter or not np.array_equal(r.values, ref.values):
            raise ValueError("sweeps in one file must share parameter and values")
    header = [sweep_value_header(ref.parameter)]
    cols = []
    for r in results:
        for k in r.rows[0]:
            if k == "value":
                continue
            if k.startswith("numeric:"):
                tag = f"{r.case}:numeric_full:{k.split(':', 1)[1]}"
            elif k.startswith("analytic:"):
                tag = f"{r.case}:analytic:{k.split(':', 1)[1]}"
            else:
                tag = f"{r.case}:{k}"
            header.append(tag)
            cols.append((r, k))
    rows = []
    for i, v in enumerate(ref.values):
        rows.append([v] + [r.rows[i][k] for r, k in cols])
    return csv_text(header, rows)


def run_sweep(parameter: str, values, cfgs, outdir=None, filename=None):
    """Sweep several cases over the same values and write one CSV plus a manifest."""
    t0 = time.perf_counter()
    cfgs = list(cfgs)
    results = [sweep(parameter, values, c) for c in cfgs]
    files = {}
    if outdir is not None:
        outdir = Path(outdir)
        stem = filename or f"{cfgs[0].name}_sweep_{parameter}"
        files["sweep"] = write_atomic(outdir / f"{stem}.csv", sweep_csv(results))
        files["manifest"] = write_manifest(
            outdir / f"{stem}_manifest.txt", cfgs, [files["sweep"]],
            time.perf_counter() - t0, {"sweep_parameter": parameter},
        )
    return results, files


# ---------------------------------------------------------------- built-in figures

HALF_LAMBDA = dict(kx1=0.0, kx2=math.pi)
BASE = dict(delta=-1.25e5, delta_c=-24.0, g=1.25e3, omega=1.25e4, gamma=0.0, kappa=1.0,
            **HALF_LAMBDA)
# gamma giving gamma' = kappa_0 / 2 through gamma g^2 / Delta^2 at the base couplings
GAMMA_HALF = 5.0e3


@dataclass(frozen=True)
class Figure:
    name: str
    cases: tuple
    sweep_parameter: str | None = None
    sweep_values: tuple = ()

    @property
    def is_sweep(self) -> bool:
        return self.sweep_parameter is not None


def _cfg(name, n_max=15, **kw):
    params = dict(BASE)
    params.update({k: kw.pop(k) for k in list(kw) if k in params})
    return ScenarioConfig(name=name, params=SystemParams(n_max=n_max, **params), **kw)


def builtin_figure(name: str, n_max: int = 15) -> Figure:
    if name == "fig3":
        return Figure(name, (
            _cfg("fig3_gamma0", n_max),
            _cfg("fig3_gamma_prime_half", n_max, gamma=GAMMA_HALF, gamma_prime_override=0.5),
        ))
    if name == "fig4":
        strong = dict(kappa=100.0, g=1.25e4, delta_c=-2400.0, grid=GridSpec(201, 500.0),
                      outputs=("spectrum", "steady", "coefficients"))
        return Figure(name, (
            _cfg("fig4_gamma0", n_max, **strong),
            _cfg("fig4_gamma_prime_half", n_max, gamma=GAMMA_HALF, gamma_prime_override=50.0,
                 **strong),
        ))
    if name == "fig5":
        values = tuple(np.round(np.linspace(0.6, 3.0, 13), 12))
        return Figure(name, (
            _cfg("fig5_gamma0", n_max),
            _cfg("fig5_gamma_prime_half", n_max, gamma=GAMMA_HALF, gamma_prime_override=0.5),
        ), "kappa", values)
    if name == "fig6":
        values = tuple(np.round(np.linspace(2e3, 2e4, 10), 9))
        return Figure(name, (
            _cfg("fig6_kappa1", n_max),
            _cfg("fig6_kappa_half", n_max, kappa=0.5),
        ), "gamma", values)
    if name == "fig7":
        values = tuple(np.round(np.linspace(0.8, 3.0, 12), 12))
        return Figure(name, (
            _cfg("fig7_gamma_prime0", n_max),
            _cfg("fig7_split_half", n_max, gamma_prime_fraction=0.5),
        ), "kappa_prime", values)
    if name == "fig8":
        return Figure(name, (
            _cfg("fig8_motion", n_max, motion=MotionParams(nu=1250.0, k_qbar=0.3),
                 series=("analytic_opa", "analytic_motion", "langevin_oracle"),
                 outputs=("spectrum", "coefficients", "validity")),
        ))
    raise ConfigError(f"unknown figure {name!r}; choose from {FIGURES}")


FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8")


def run_figure(name: str, outdir, *, n_max: int = 15, grid: GridSpec | None = None,
               prefactor: float | None = None, workers=None):
    """Run a built-in figure; returns (results, files)."""
    fig = builtin_figure(name, n_max)
    cases = fig.cases
    if grid is not None:
        cases = tuple(c.replace(grid=grid) for c in cases)
    if prefactor is not None:
        cases = tuple(c.replace(gamma_prime_prefactor=prefactor) for c in cases)
    outdir = Path(outdir)
    if fig.is_sweep:
        return run_sweep(fig.sweep_parameter, fig.sweep_values, cases, outdir, filename=name)
    t0 = time.perf_counter()
    results = [run_scenario(c, outdir, workers=workers) for c in cases]
    cols = [(f"{r.name}:{prov}", s) for r in results for prov, s in r.spectra.items()]
    files = {}
    if cols:
        files["spectrum"] = write_atomic(outdir / f"{name}.csv", spectra_csv(cols))
        files["manifest"] = write_manifest(outdir / f"{name}_manifest.txt", cases,
                                           [files["spectrum"]], time.perf_counter() - t0)
    return results, files
