"""Collisions as phase kicks or short pulses, and seeded collision ensembles.

A collision shifts the relative phase but, to first order in its duration,
not the imbalance. Kicks are instantaneous; pulses add a constant rate ``s``
to ``dtheta/dt`` for a duration ``d`` and approach the kick ``s * d`` as
``d -> 0``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _dopri
from .basin import thread_count
from .integrate import (
    IntegrationConfig,
    Trajectory,
    check_status,
    final_state,
    run_core,
    sample_grid,
    to_trajectory,
)
from .model import ModelParams, PhaseState

DISTRIBUTIONS = ("uniform", "fixed", "wrapped_normal")


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    kind: str = "kick"
    delta_theta: Optional[float] = None
    strength: Optional[float] = None
    duration: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("kick", "pulse"):
            raise ValueError(f"kind must be 'kick' or 'pulse', got {self.kind!r}")
        if self.kind == "pulse" and (self.duration is None or self.duration < 0):
            raise ValueError("pulse duration must be >= 0")


@dataclass(frozen=True)
class CollisionProcess:
    """Homogeneous Poisson stream of phase kicks.

    ``distribution`` picks the kick law: ``"uniform"`` on (-pi, pi],
    ``"fixed"`` (always ``delta_theta``) or ``"wrapped_normal"`` with zero
    mean and variance ``1 / concentration``. ``sign=-1`` mirrors every kick,
    which paired with a mirrored initial state mirrors the whole run.
    ``dead_time`` adds a fixed minimum spacing before each exponential gap
    (zero gives a plain Poisson stream).
    """

    rate: float
    distribution: str = "uniform"
    delta_theta: float = math.pi
    concentration: float = 1.0
    seed: int = 0
    sign: int = 1
    dead_time: float = 0.0

    def __post_init__(self):
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be finite and >= 0, got {self.rate!r}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if self.distribution == "wrapped_normal" and not self.concentration > 0:
            raise ValueError("concentration must be > 0")
        if not self.dead_time >= 0:
            raise ValueError("dead_time must be >= 0")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def mirrored(self) -> "CollisionProcess":
        from dataclasses import replace

        return replace(self, sign=-self.sign)

    def draw(self, t_start: float, t_end: float, rng: np.random.Generator):
        """Event times in ``(t_start, t_end]`` and their phase shifts."""
        times = []
        t = t_start
        if self.rate > 0:
            while True:
                t += self.dead_time + rng.exponential(1.0 / self.rate)
                if t > t_end:
                    break
                times.append(t)
        times = np.array(times, dtype=float)
        k = len(times)
        if self.distribution == "uniform":
            dth = math.pi - rng.uniform(0.0, 2.0 * math.pi, k)
        elif self.distribution == "fixed":
            dth = np.full(k, float(self.delta_theta))
        else:
            dth = rng.normal(0.0, 1.0 / math.sqrt(self.concentration), k)
        return times, self.sign * dth


def apply_kick(state: PhaseState, delta_theta: float) -> PhaseState:
    return PhaseState(state.z, state.theta + delta_theta)


@dataclass(frozen=True)
class PulseResult:
    state: PhaseState
    max_dz: float
    final_dz: float


def pulse_collision(state: PhaseState, params: ModelParams, strength: float, duration: float,
                    config: Optional[IntegrationConfig] = None, samples: int = 64) -> PulseResult:
    """Evolve through a rectangular pulse of ``strength`` (rate on theta) lasting ``duration``.

    ``max_dz`` is the largest ``|z(t) - z(t1)|`` seen on ``samples`` points
    of the window, ``final_dz`` the realised ``|z(t2) - z(t1)|``.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if duration == 0:
        return PulseResult(state, 0.0, 0.0)
    if duration > 0.1 * params.tau:
        warnings.warn("pulse longer than 0.1 tau: outside the short-collision regime", stacklevel=2)
    cfg = (config or IntegrationConfig(t_end=duration)).with_(t_end=duration)
    times = np.linspace(0.0, duration, samples + 1)
    run = run_core(_dopri.PHASE, [state.z, state.theta], params, cfg,
                   sample_times=times, drive=strength)
    check_status(run)
    dz = np.abs(run.samples[:, 0] - state.z)
    return PulseResult(final_state(run), float(dz.max()), float(abs(run.z - state.z)))


def _member_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def simulate_with_collisions(initial: PhaseState, params: ModelParams, process: CollisionProcess,
                             t_end: float, config: Optional[IntegrationConfig] = None,
                             member: int = 0) -> Trajectory:
    """Reduced dynamics interrupted by Poisson phase kicks.

    The random stream is fixed by ``(process.seed, member)``.
    """
    cfg = (config or IntegrationConfig(t_end=t_end)).with_(t_end=t_end)
    times, dth = process.draw(0.0, t_end, _member_rng(process.seed, member))
    run = run_core(_dopri.PHASE, [initial.z, initial.theta], params, cfg,
                   kick_times=times, kick_dtheta=dth)
    check_status(run)
    events = [CollisionEvent(float(t), "kick", float(d)) for t, d in zip(times, dth)]
    return to_trajectory(run, params, events=events)


@dataclass
class EnsembleResult:
    """Ensemble statistics on a common time grid.

    ``survival_fraction`` counts members whose imbalance never changed
    sign. Standard errors are the usual ``std / sqrt(n)`` for the mean
    chirality and ``sqrt(p (1 - p) / n)`` for the survival fraction.
    """

    n_molecules: int
    t: np.ndarray
    mean_chirality: np.ndarray
    mean_chirality_se: np.ndarray
    survival_fraction: float
    survival_se: float
    seeds: list
    crossings: np.ndarray
    n_events: np.ndarray
    z: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def total_events(self) -> int:
        return int(self.n_events.sum())


def ensemble_run(n: int, initial: PhaseState, params: ModelParams, process: CollisionProcess,
                 t_end: float, config: Optional[IntegrationConfig] = None,
                 sample_interval: Optional[float] = None, threads: Optional[int] = None,
                 keep_paths: bool = False) -> EnsembleResult:
    """Run ``n`` independently seeded molecules from ``initial``.

    Member ``i`` draws its collisions from ``default_rng([process.seed, i])``,
    so results do not depend on the thread count or execution order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = (config or IntegrationConfig(t_end=t_end, rtol=1e-9, atol=1e-9)).with_(t_end=t_end)
    dt = sample_interval or params.tau
    grid = sample_grid(0.0, t_end, dt)

    def member(i):
        times, dth = process.draw(0.0, t_end, _member_rng(process.seed, i))
        run = run_core(_dopri.PHASE, [initial.z, initial.theta], params, cfg,
                       sample_times=grid, kick_times=times, kick_dtheta=dth)
        check_status(run)
        return run.samples[:, 0].copy(), run.crossings, len(times)

    k = threads or thread_count()
    if k > 1:
        with ThreadPoolExecutor(k) as pool:
            out = list(pool.map(member, range(n)))
    else:
        out = [member(i) for i in range(n)]
    z = np.array([o[0] for o in out])
    crossings = np.array([o[1] for o in out])
    n_events = np.array([o[2] for o in out])
    mean = z.mean(axis=0)
    se = z.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    surv = float(np.mean(crossings == 0))
    return EnsembleResult(
        n_molecules=n,
        t=grid,
        mean_chirality=mean,
        mean_chirality_se=se,
        survival_fraction=surv,
        survival_se=math.sqrt(surv * (1.0 - surv) / n),
        seeds=[(int(process.seed), i) for i in range(n)],
        crossings=crossings,
        n_events=n_events,
        z=z if keep_paths else None,
    )
