"""Time integration of the reduced and amplitude equations of motion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _dopri
from .model import (
    AmplitudeState,
    ModelParams,
    PhaseState,
    PoleError,
    energy,
    to_amplitude,
    wrap_angle,
)
from .separatrix import region_labels

_EMPTY = np.zeros(0)
_NO_STOP = np.zeros((0, 2))


class IntegrationError(RuntimeError):
    """The integrator could not reach the requested end time."""


@dataclass(frozen=True)
class IntegrationConfig:
    """Integration settings.

    ``t_end`` and ``sample_interval`` are in raw time units (multiply by
    ``params.tau`` to work in beating periods). ``sample_interval=None``
    samples fifty times per beating period.
    """

    t_end: float
    method: str = "adaptive"
    rtol: float = 1e-10
    atol: float = 1e-10
    step: Optional[float] = None
    sample_interval: Optional[float] = None
    pole_policy: str = "switch"
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end!r}")
        if self.method not in ("adaptive", "fixed"):
            raise ValueError(f"method must be 'adaptive' or 'fixed', got {self.method!r}")
        if self.method == "adaptive" and not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be > 0")
        if self.method == "fixed" and not (self.step is not None and self.step > 0):
            raise ValueError("fixed-step integration needs step > 0")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError("sample_interval must be > 0")
        if self.pole_policy not in ("switch", "error"):
            raise ValueError(f"pole_policy must be 'switch' or 'error', got {self.pole_policy!r}")

    def with_(self, **changes) -> "IntegrationConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostics.

    ``theta`` is wrapped to (-pi, pi]; ``theta_unwrapped`` is continuous
    except across detours through a pole. ``amplitudes`` is only filled by
    amplitude-chart runs. ``crossings`` counts sign changes of ``z`` and
    ``first_crossing`` locates the first one (nan if none).
    """

    t: np.ndarray
    z: np.ndarray
    theta_unwrapped: np.ndarray
    energy: np.ndarray
    charge: np.ndarray
    region: np.ndarray
    params: ModelParams
    events: list = field(default_factory=list)
    amplitudes: Optional[np.ndarray] = None
    crossings: int = 0
    first_crossing: float = math.nan
    final: Optional[PhaseState] = None
    n_steps: int = 0
    n_rejected: int = 0

    @property
    def theta(self) -> np.ndarray:
        return wrap_angle(self.theta_unwrapped)

    @property
    def t_tau(self) -> np.ndarray:
        return self.t / self.params.tau

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> PhaseState:
        return PhaseState(float(np.clip(self.z[i], -1.0, 1.0)), float(self.theta_unwrapped[i]))


def param_vector(params: ModelParams, drive: float = 0.0) -> np.ndarray:
    return np.array([
        params.omega, params.capital_omega, params.nonlinear_coefficient,
        params.dissipative_coefficient, params.mu, params.zeta, float(drive),
    ])


def sample_grid(t0: float, t_end: float, dt: float) -> np.ndarray:
    n = int(math.floor((t_end - t0) / dt + 1e-9))
    times = t0 + dt * np.arange(n + 1)
    times[-1] = min(times[-1], t_end)  # rounding can push the last point past the end
    if times[-1] < t_end - 1e-12 * max(1.0, abs(t_end)):
        times = np.append(times, t_end)
    return times


@dataclass
class RawRun:
    samples: np.ndarray
    times: np.ndarray
    status: int
    crossings: int
    first_crossing: float
    t: float
    y: np.ndarray
    mode: int
    theta: float
    n_steps: int
    n_rejected: int
    stop_index: int

    @property
    def z(self) -> float:
        return float(_dopri._z_of(self.mode, self.y))


def run_core(mode: int, y0, params: ModelParams, config: IntegrationConfig, *,
             t0: float = 0.0, t_end: Optional[float] = None, sample_times=None,
             kick_times=_EMPTY, kick_dtheta=_EMPTY, drive: float = 0.0,
             stop_points=_NO_STOP, stop_tol: float = 0.0,
             crossing_tol: Optional[float] = None) -> RawRun:
    """Thin wrapper around the compiled core; no status checking."""
    if t_end is None:
        t_end = t0 + config.t_end
    if sample_times is None:
        dt = config.sample_interval or params.tau / 50.0
        sample_times = sample_grid(t0, t_end, dt)
    sample_times = np.ascontiguousarray(sample_times, dtype=float)
    y = np.zeros(4)
    y[: len(y0)] = y0
    fixed_h = config.step if config.method == "fixed" else 0.0
    if crossing_tol is None:
        crossing_tol = 1e-12 * params.tau
    out = _dopri.integrate(
        mode, y, float(t0), float(t_end), param_vector(params, drive),
        float(config.rtol), float(config.atol), float(fixed_h), sample_times,
        np.ascontiguousarray(kick_times, dtype=float),
        np.ascontiguousarray(kick_dtheta, dtype=float),
        config.pole_policy == "switch",
        np.ascontiguousarray(stop_points, dtype=float).reshape(-1, 2),
        float(stop_tol), int(config.max_steps), 0.1 * params.tau, float(crossing_tol),
    )
    samples, n_filled, status, n_cross, first, t, yf, mode_f, th, nst, nrej, stop = out
    return RawRun(samples[:n_filled], sample_times[:n_filled], status, n_cross, first,
                  t, yf, mode_f, th, nst, nrej, stop)


def check_status(run: RawRun):
    if run.status == _dopri.POLE:
        raise PoleError(f"integration reached a pole of the reduced chart at t={run.t:.6g}")
    if run.status == _dopri.MAX_STEPS:
        raise IntegrationError(f"step budget exhausted at t={run.t:.6g}")
    if run.status == _dopri.UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={run.t:.6g}")


def final_state(run: RawRun) -> PhaseState:
    z = float(np.clip(run.z, -1.0, 1.0))
    return PhaseState(z, run.theta)


def to_trajectory(run: RawRun, params: ModelParams, amplitude: bool = False,
                  events: Sequence = ()) -> Trajectory:
    s = run.samples
    z = s[:, 0]
    theta = s[:, 1]
    amps = None
    if amplitude:
        amps = np.empty((len(s), 2), dtype=complex)
        amps[:, 0] = s[:, 3] + 1j * s[:, 4]
        amps[:, 1] = s[:, 5] + 1j * s[:, 6]
    return Trajectory(
        t=run.times.copy(),
        z=z.copy(),
        theta_unwrapped=theta.copy(),
        energy=energy(np.clip(z, -1.0, 1.0), theta, params.mu),
        charge=s[:, 2].copy(),
        region=region_labels(np.clip(z, -1.0, 1.0), theta, params.mu),
        params=params,
        events=list(events),
        amplitudes=amps,
        crossings=run.crossings,
        first_crossing=run.first_crossing,
        final=final_state(run),
        n_steps=run.n_steps,
        n_rejected=run.n_rejected,
    )


def integrate_phase(initial: PhaseState, params: ModelParams, config: IntegrationConfig) -> Trajectory:
    """Evolve the reduced ``(z, theta)`` equations.

    With ``pole_policy="switch"`` the run continues through the amplitude
    chart whenever ``|z|`` gets within 1e-6 of a pole.
    """
    if config.pole_policy == "error" and abs(initial.z) >= 1.0 - _dopri.POLE_GUARD:
        raise PoleError("initial state sits on a pole; use pole_policy='switch'")
    run = run_core(_dopri.PHASE, [initial.z, initial.theta], params, config)
    check_status(run)
    return to_trajectory(run, params)


def integrate_amplitude(initial: AmplitudeState, params: ModelParams,
                        config: IntegrationConfig) -> Trajectory:
    """Evolve the amplitude equations; amplitudes are never renormalised."""
    run = run_core(_dopri.AMPLITUDE, initial.as_real(), params, config)
    check_status(run)
    return to_trajectory(run, params, amplitude=True)


@dataclass(frozen=True)
class Crosscheck:
    max_dz: float
    max_dtheta: float
    partial: bool


def crosscheck(initial: PhaseState, params: ModelParams, config: IntegrationConfig) -> Crosscheck:
    """Integrate both charts from matched initial data and compare samples.

    The reduced run follows ``config.pole_policy``: with ``"error"`` it stops
    at a pole and the comparison covers the common prefix (``partial`` is
    set); with ``"switch"`` it detours through the amplitude chart near the
    poles. Close passes (``1 - |z|`` around 1e-7) are ill-conditioned in the
    reduced chart, so ``"switch"`` is the useful setting for those.
    """
    ph = run_core(_dopri.PHASE, [initial.z, initial.theta], params, config)
    amp = run_core(_dopri.AMPLITUDE, to_amplitude(initial).as_real(), params, config)
    m = min(len(ph.times), len(amp.times))
    partial = ph.status != _dopri.OK or amp.status != _dopri.OK
    if m == 0:
        return Crosscheck(math.nan, math.nan, True)
    dz = np.abs(ph.samples[:m, 0] - amp.samples[:m, 0])
    dth = np.abs(wrap_angle(ph.samples[:m, 1] - amp.samples[:m, 1]))
    return Crosscheck(float(dz.max()), float(dth.max()), partial)
