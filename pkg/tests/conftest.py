import math
import time
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import pytest

from cavity_opa.engine import (
    default_omega_grid,
    output_squeezing_spectrum,
    steady_state,
    steady_stats,
)
from cavity_opa.model import SystemParams, build_liouvillian

# lambda/2 operating point with alpha = kappa_0 / 2
FIG3 = dict(delta=-1.25e5, delta_c=-24.0, g=1.25e3, omega=1.25e4, gamma=0.0, kappa=1.0,
            kx1=0.0, kx2=math.pi)
# gamma' = gamma g^2 / Delta^2 = kappa_0 / 2
GAMMA_HALF = 5.0e3

_ACCEPTANCE = OrderedDict()


class AcceptanceLog:
    def check(self, criterion, part, ok, detail):
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
        assert ok, f"criterion {criterion} ({part}): {detail}"


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for crit, parts in sorted(_ACCEPTANCE.items(), key=lambda kv: kv[0]):
        ok = all(p[1] for p in parts)
        details = "; ".join(f"{name}: {'ok' if good else 'FAILED'} ({d})" for name, good, d in parts)
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {details}")


@dataclass
class FullRun:
    params: SystemParams
    L: object
    rho: object
    stats: object
    spectrum: object
    seconds: float


def full_run(params, points=201, half_width=5.0):
    t0 = time.perf_counter()
    L = build_liouvillian(params)
    rho = steady_state(L)
    spec = output_squeezing_spectrum(L, rho, params.kappa,
                                     omega_grid=default_omega_grid(points, half_width))
    seconds = time.perf_counter() - t0
    return FullRun(params, L, rho, steady_stats(L, rho), spec, seconds)


@pytest.fixture(scope="session")
def fig3_run():
    """Full master equation at n_max=15, 201 frequencies, no spontaneous emission."""
    return full_run(SystemParams(n_max=15, **FIG3))


@pytest.fixture(scope="session")
def fig3_emission_run():
    p = dict(FIG3, gamma=GAMMA_HALF)
    return full_run(SystemParams(n_max=15, **p))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
