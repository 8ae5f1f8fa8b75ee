"""Numerical basins of attraction of the two chiral states (``mu > 1``, ``zeta > 0``)."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _dopri
from .integrate import IntegrationConfig, run_core
from .model import ModelError, ModelParams, asymmetric_fixed_point
from .separatrix import theta_grid

PLUS = 1
MINUS = -1
UNDECIDED = 0

THREADS_ENV = "CHIRALWELL_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class BasinMap:
    """Labels on a ``(z, theta)`` grid: +1 / -1 for the attractor reached, 0 undecided.

    ``labels[i, j]`` belongs to ``z[i]``, ``theta[j]``.
    """

    z: np.ndarray
    theta: np.ndarray
    labels: np.ndarray
    params: ModelParams
    budget: float
    tol: float

    def fraction(self, label: int) -> float:
        return float(np.mean(self.labels == label))


def default_grid(nz: int = 201, ntheta: int = 201):
    return np.linspace(-1.0 + 1e-3, 1.0 - 1e-3, nz), theta_grid(ntheta)


def default_budget(params: ModelParams) -> float:
    """200 beating periods or fifteen relaxation times, whichever is longer."""
    from .stationary import relaxation_time

    return max(200.0 * params.tau, 15.0 * relaxation_time(params))


def attractor_label(z0: float, theta0: float, params: ModelParams, budget: float,
                    tol: float = 1e-4, config: IntegrationConfig | None = None) -> int:
    """Integrate one initial state until it settles near a chiral attractor.

    Returns ``PLUS``/``MINUS`` for the attractor reached within ``budget``
    time units, otherwise ``UNDECIDED``.
    """
    z3, th3 = asymmetric_fixed_point(params.mu, params.zeta)
    targets = np.array([[z3, th3], [-z3, -th3]])
    cfg = config or IntegrationConfig(t_end=budget, rtol=1e-9, atol=1e-9)
    run = run_core(_dopri.PHASE, [z0, theta0], params, cfg, t_end=budget,
                   sample_times=np.zeros(0), stop_points=targets, stop_tol=tol)
    if run.status == _dopri.STOPPED:
        return PLUS if run.stop_index == 0 else MINUS
    return UNDECIDED


def basin_map(params: ModelParams, grid=None, budget: float | None = None, tol: float = 1e-4,
              config: IntegrationConfig | None = None, threads: int | None = None) -> BasinMap:
    """Label every grid point by the chiral attractor it converges to.

    ``grid`` is a pair ``(z_values, theta_values)``; the default is 201 x 201
    over ``[-1 + 1e-3, 1 - 1e-3] x (-pi, pi]``. ``budget`` defaults to
    ``default_budget(params)``. Points that have not settled within ``tol`` by then are
    left undecided rather than guessed.
    """
    if not params.mu > 1.0:
        raise ModelError("basins of the chiral states need mu > 1")
    if not params.zeta > 0.0:
        raise ModelError("basins need zeta > 0; the conservative flow has no attractors")
    zs, ths = default_grid() if grid is None else (np.asarray(grid[0], float), np.asarray(grid[1], float))
    budget = default_budget(params) if budget is None else budget
    labels = np.zeros((len(zs), len(ths)), dtype=np.int8)

    def row(i):
        return [attractor_label(zs[i], th, params, budget, tol, config) for th in ths]

    n = threads or thread_count()
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            rows = list(pool.map(row, range(len(zs))))
    else:
        rows = [row(i) for i in range(len(zs))]
    labels[:] = np.array(rows, dtype=np.int8).reshape(labels.shape)
    return BasinMap(zs, ths, labels, params, budget, tol)


def strip_contained(params: ModelParams, z_min: float, nz: int = 5, ntheta: int = 32,
                    budget: float | None = None) -> bool:
    """True if every sampled state with ``z >= z_min`` flows to the plus attractor.

    The default budget covers fifteen relaxation times, so weak damping is
    not mistaken for escape.
    """
    if budget is None:
        budget = default_budget(params)
    zs = np.linspace(z_min, 1.0 - 1e-3, nz)
    bm = basin_map(params, (zs, theta_grid(ntheta)), budget=budget)
    return bool(np.all(bm.labels == PLUS))


def max_zeta_for_strip(mu: float, z_min: float | None = None, zeta_hi: float = 1.0,
                       digits: int = 2, **kwargs) -> float:
    """Largest dissipation (bisected to ``digits`` decimals) keeping the strip in the basin.

    ``z_min`` defaults to the separatrix extent ``2 sqrt(mu - 1) / mu``. The
    answer is empirical and depends on the sampling in ``kwargs``.
    """
    from .separatrix import separatrix_max_z

    z_min = separatrix_max_z(mu) if z_min is None else z_min
    lo, hi = 0.0, zeta_hi
    step = 10.0 ** -digits
    if strip_contained(ModelParams(mu=mu, zeta=hi), z_min, **kwargs):
        return hi
    while hi - lo > step:
        mid = 0.5 * (lo + hi)
        if mid <= 0.0 or strip_contained(ModelParams(mu=mu, zeta=mid), z_min, **kwargs):
            lo = mid
        else:
            hi = mid
    return round(math.floor(lo / step) * step, digits)
