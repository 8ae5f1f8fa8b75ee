"""Two-level double-well model: states, parameters and the two equations of motion.

The dynamics are available in two equivalent charts:

* the amplitude form, evolving the complex pair ``(a_R, a_L)`` on the unit
  sphere, which is regular everywhere;
* the reduced form, evolving imbalance ``z`` and relative phase ``theta``,
  which has coordinate poles at ``z = +-1``.

Time is measured with hbar = 1, so the beating period of the bare doublet
is ``tau = pi / omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

#: |z| beyond ``1 - POLE_GUARD`` counts as being on a pole of the reduced chart.
POLE_GUARD = 1e-9


class ModelError(ValueError):
    """Base class for invalid model input."""


class ParameterError(ModelError):
    """Raised for parameters violating the model invariants."""


class PoleError(ModelError):
    """Raised when the reduced chart is evaluated at (or too near) ``z = +-1``."""


def wrap_angle(theta):
    """Map an angle (scalar or array) onto the half-open interval (-pi, pi]."""
    if np.ndim(theta) == 0:
        w = math.remainder(float(theta), 2.0 * math.pi)
        return math.pi if w <= -math.pi else w
    w = np.remainder(np.asarray(theta, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    w[w <= -math.pi] = math.pi
    return w


@dataclass(frozen=True)
class RawParams:
    lambda_plus: float
    lambda_minus: float
    c: float
    epsilon: float
    eta: float


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless model parameters.

    Attributes
    ----------
    omega : float
        Half the doublet splitting, ``(lambda_- - lambda_+) / 2``. Sets the
        time scale.
    mu : float
        Nonlinearity. The symmetric ground state bifurcates at ``mu = 1``.
    zeta : float
        Dissipation strength.
    capital_omega : float
        Mean doublet energy. Only rotates the global phase of the amplitudes;
        the reduced ``(z, theta)`` dynamics never see it.
    raw : RawParams or None
        The microscopic inputs the reduced numbers were derived from, if any.
    """

    omega: float = 1.0
    mu: float = 0.0
    zeta: float = 0.0
    capital_omega: float = 0.0
    raw: Optional[RawParams] = None

    def __post_init__(self):
        for name in ("omega", "mu", "zeta", "capital_omega"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.omega <= 0:
            raise ParameterError(f"omega must be > 0, got {self.omega!r}")
        if self.mu < 0:
            raise ParameterError(f"mu must be >= 0, got {self.mu!r}")
        if self.zeta < 0:
            raise ParameterError(f"zeta must be >= 0, got {self.zeta!r}")
        if self.raw is not None:
            c2 = self.raw.c ** 2
            mu = -c2 * self.raw.epsilon / self.omega
            zeta = -c2 * self.raw.eta / self.omega
            if not (math.isclose(mu, self.mu, rel_tol=1e-12, abs_tol=1e-14)
                    and math.isclose(zeta, self.zeta, rel_tol=1e-12, abs_tol=1e-14)):
                raise ParameterError("mu/zeta inconsistent with the raw (c, epsilon, eta) block")

    @property
    def tau(self) -> float:
        """Beating period ``2 pi / Delta E`` with ``Delta E = 2 omega``."""
        return math.pi / self.omega

    @property
    def nonlinear_coefficient(self) -> float:
        """``epsilon c^2``; the mean-field term is ``epsilon nu c = epsilon c^2 z``."""
        if self.raw is not None:
            return self.raw.epsilon * self.raw.c ** 2
        return -self.omega * self.mu

    @property
    def dissipative_coefficient(self) -> float:
        """``eta c^2``; the damping term is ``eta nu c = eta c^2 z``."""
        if self.raw is not None:
            return self.raw.eta * self.raw.c ** 2
        return -self.omega * self.zeta

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace

        if "raw" not in changes and ({"mu", "zeta", "omega"} & changes.keys()):
            changes["raw"] = None
        return replace(self, **changes)


def derive_params(lambda_plus, lambda_minus, c, epsilon, eta) -> ModelParams:
    """Build :class:`ModelParams` from doublet energies and mean-field couplings.

    >>> p = derive_params(-1.0, 1.0, 1.0, -1.5, -0.2)
    >>> p.omega, p.mu, p.zeta
    (1.0, 1.5, 0.2)
    """
    if lambda_minus == lambda_plus:
        raise ParameterError("degenerate doublet: lambda_minus == lambda_plus gives omega = 0")
    if lambda_minus < lambda_plus:
        raise ParameterError("the even state must lie below the odd one (lambda_minus > lambda_plus)")
    if epsilon > 0 or eta > 0:
        raise ParameterError("epsilon and eta must be <= 0")
    if c == 0:
        raise ParameterError("c must be nonzero")
    omega = 0.5 * (lambda_minus - lambda_plus)
    capital_omega = 0.5 * (lambda_minus + lambda_plus)
    c2 = c * c
    return ModelParams(
        omega=omega,
        mu=-c2 * epsilon / omega + 0.0,
        zeta=-c2 * eta / omega + 0.0,
        capital_omega=capital_omega,
        raw=RawParams(float(lambda_plus), float(lambda_minus), float(c), float(epsilon), float(eta)),
    )


@dataclass(frozen=True)
class PhaseState:
    """Point on the cylinder: imbalance ``z`` in [-1, 1], phase ``theta`` in (-pi, pi]."""

    z: float
    theta: float

    def __post_init__(self):
        z = float(self.z)
        if not (-1.0 <= z <= 1.0):
            raise ModelError(f"imbalance must lie in [-1, 1], got {z!r}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def mirrored(self) -> "PhaseState":
        """Image under the parity exchange R <-> L, ``(z, theta) -> (-z, -theta)``."""
        return PhaseState(-self.z, -self.theta)


@dataclass(frozen=True)
class AmplitudeState:
    a_R: complex
    a_L: complex

    def __post_init__(self):
        object.__setattr__(self, "a_R", complex(self.a_R))
        object.__setattr__(self, "a_L", complex(self.a_L))

    def as_real(self) -> np.ndarray:
        return np.array([self.a_R.real, self.a_R.imag, self.a_L.real, self.a_L.imag])

    @classmethod
    def from_real(cls, y) -> "AmplitudeState":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]))


@dataclass(frozen=True)
class Derivatives:
    dz_dt: float
    dtheta_dt: float


def _check_interior(z):
    if np.any(np.abs(z) >= 1.0 - POLE_GUARD):
        raise PoleError(
            "reduced chart is singular at |z| = 1; use the amplitude representation there"
        )


def field(z, theta, params: ModelParams):
    """Vectorised reduced vector field, returns ``(dz/dt, dtheta/dt)`` arrays."""
    z = np.asarray(z, dtype=float)
    theta = np.asarray(theta, dtype=float)
    _check_interior(z)
    s = np.sqrt(1.0 - z * z)
    sin, cos = np.sin(theta), np.cos(theta)
    zeta = params.zeta
    dz = 2.0 * s * (sin - zeta * z * cos)
    dth = -2.0 * z / s * (cos + zeta * z * sin) + 2.0 * params.mu * z
    return params.omega * dz, params.omega * dth


def vector_field(state: PhaseState, params: ModelParams) -> Derivatives:
    dz, dth = field(state.z, state.theta, params)
    return Derivatives(float(dz), float(dth))


def amplitude_rhs(state: AmplitudeState, params: ModelParams, drive: float = 0.0):
    """Time derivatives ``(da_R/dt, da_L/dt)`` of the amplitude equations.

    ``drive`` is an additive rate on the relative phase (a collision pulse of
    strength ``(c_R - c_L) v``); it is split symmetrically between the two
    amplitudes so it leaves the global phase alone.
    """
    a_r, a_l = state.a_R, state.a_L
    z = abs(a_r) ** 2 - abs(a_l) ** 2
    nl = params.nonlinear_coefficient * z
    diss = params.dissipative_coefficient * z
    w, big_w = params.omega, params.capital_omega
    i_dar = big_w * a_r - w * a_l + nl * a_r + 1j * diss * a_l - 0.5 * drive * a_r
    i_dal = big_w * a_l - w * a_r - nl * a_l - 1j * diss * a_r + 0.5 * drive * a_l
    return -1j * i_dar, -1j * i_dal


def to_phase(state: AmplitudeState) -> PhaseState:
    a_r, a_l = state.a_R, state.a_L
    nr, nl = abs(a_r) ** 2, abs(a_l) ** 2
    z = nr - nl
    if abs(z) >= 1.0 - POLE_GUARD:
        raise PoleError("relative phase is undefined at a pole (one amplitude vanishes)")
    # arg(a_R) - arg(a_L) computed as one angle avoids branch-cut round-off.
    theta = math.atan2((a_r * a_l.conjugate()).imag, (a_r * a_l.conjugate()).real)
    return PhaseState(z, theta)


def to_amplitude(state: PhaseState, global_phase: float = 0.0) -> AmplitudeState:
    z, th = state.z, state.theta
    a_r = math.sqrt(0.5 * (1.0 + z)) * complex(math.cos(global_phase + 0.5 * th),
                                                 math.sin(global_phase + 0.5 * th))
    a_l = math.sqrt(0.5 * (1.0 - z)) * complex(math.cos(global_phase - 0.5 * th),
                                                 math.sin(global_phase - 0.5 * th))
    return AmplitudeState(a_r, a_l)


def energy(z, theta, mu):
    """Vectorised reduced energy ``sqrt(1 - z^2) cos(theta) + mu z^2 / 2``."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(np.clip(1.0 - z * z, 0.0, None)) * np.cos(theta) + 0.5 * mu * z * z


def reduced_energy(state: PhaseState, params: ModelParams) -> float:
    """Conserved quantity of the ``zeta = 0`` dynamics; its level 1 is the separatrix."""
    return float(energy(state.z, state.theta, params.mu))


def charge(state: AmplitudeState) -> float:
    return abs(state.a_R) ** 2 + abs(state.a_L) ** 2


def asymmetric_fixed_point(mu, zeta):
    """Closed-form ``(z3, theta3)`` of the chiral stationary state (requires mu > 1)."""
    z3 = math.sqrt((mu * mu - 1.0) / (mu * mu + zeta * zeta))
    return z3, math.atan(zeta * z3)
