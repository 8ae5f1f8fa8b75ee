"""Stationary states of the reduced dynamics and their linear stability."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    ModelError,
    ModelParams,
    PhaseState,
    _check_interior,
    asymmetric_fixed_point,
    field,
)

#: |trace| below this (relative to omega) is read as a conservative center.
CENTER_TOL = 1e-12


class Kind(str, Enum):
    SYMMETRIC_EVEN = "symmetric-even"
    SYMMETRIC_ODD = "symmetric-odd"
    ASYMMETRIC_PLUS = "asymmetric-plus"
    ASYMMETRIC_MINUS = "asymmetric-minus"


class Stability(str, Enum):
    STABLE = "stable"
    STABLE_CENTER = "stable-center"
    SADDLE = "saddle"
    UNSTABLE = "unstable"
    UNSTABLE_CENTER = "unstable-center"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class StationaryPoint:
    state: PhaseState
    kind: Kind
    stability: Stability
    eigenvalues: tuple
    residual: float


def jacobian(state: PhaseState, params: ModelParams) -> np.ndarray:
    """Analytic Jacobian of ``(dz/dt, dtheta/dt)`` with respect to ``(z, theta)``."""
    z, th = state.z, state.theta
    _check_interior(z)
    s = math.sqrt(1.0 - z * z)
    sn, cs = math.sin(th), math.cos(th)
    zeta, mu = params.zeta, params.mu
    dZ_dz = -2.0 * z / s * (sn - zeta * z * cs) - 2.0 * zeta * s * cs
    dZ_dth = 2.0 * s * (cs + zeta * z * sn)
    dT_dz = -2.0 / s ** 3 * (cs + zeta * z * sn) - 2.0 * z / s * zeta * sn + 2.0 * mu
    dT_dth = 2.0 * z / s * (sn - zeta * z * cs)
    return params.omega * np.array([[dZ_dz, dZ_dth], [dT_dz, dT_dth]])


def eigenvalues(jac) -> tuple:
    """Closed-form eigenvalues of a real 2x2 matrix, ordered by real part then imag."""
    tr = jac[0, 0] + jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    root = cmath.sqrt(0.25 * tr * tr - det)
    a, b = 0.5 * tr + root, 0.5 * tr - root
    return tuple(sorted((a, b), key=lambda w: (w.real, w.imag)))


def classify(jac, state: PhaseState, omega: float = 1.0) -> Stability:
    """Label from trace and determinant.

    Centers (vanishing trace, positive determinant) are split by the sign
    the trace acquires for infinitesimal damping, ``-2 omega sqrt(1-z^2) cos(theta)``.
    """
    tr = jac[0, 0] + jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    scale = omega * omega
    if abs(det) <= CENTER_TOL * scale:
        return Stability.DEGENERATE
    if det < 0:
        return Stability.SADDLE
    if abs(tr) <= CENTER_TOL * omega:
        drift = -math.sqrt(1.0 - state.z ** 2) * math.cos(state.theta)
        return Stability.STABLE_CENTER if drift < 0 else Stability.UNSTABLE_CENTER
    return Stability.STABLE if tr < 0 else Stability.UNSTABLE


def _residual(z, th, params):
    dz, dth = field(z, th, params)
    return math.hypot(float(dz), float(dth))


def newton_polish(z, theta, params: ModelParams, tol: float = 1e-14, max_iter: int = 50):
    """Damped Newton iteration on the vector field starting from ``(z, theta)``."""
    res = _residual(z, theta, params)
    for _ in range(max_iter):
        if res <= tol * params.omega:
            break
        J = jacobian(PhaseState(z, theta), params)
        dz, dth = field(z, theta, params)
        try:
            step = np.linalg.solve(J, -np.array([float(dz), float(dth)]))
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            zn, thn = z + lam * step[0], theta + lam * step[1]
            if abs(zn) < 1.0:
                rn = _residual(zn, thn, params)
                if rn < res:
                    z, theta, res = zn, thn, rn
                    break
            lam *= 0.5
        else:
            break
    return z, theta, res


def _make_point(z, th, kind, params):
    z, th, res = newton_polish(z, th, params)
    state = PhaseState(z, th)
    J = jacobian(state, params)
    return StationaryPoint(state, kind, classify(J, state, params.omega), eigenvalues(J), res)


def stationary_points(params: ModelParams) -> list:
    """All stationary states: two symmetric ones, plus the chiral pair for ``mu > 1``."""
    pts = [
        _make_point(0.0, 0.0, Kind.SYMMETRIC_EVEN, params),
        _make_point(0.0, math.pi, Kind.SYMMETRIC_ODD, params),
    ]
    if params.mu > 1.0:
        z3, th3 = asymmetric_fixed_point(params.mu, params.zeta)
        pts.append(_make_point(z3, th3, Kind.ASYMMETRIC_PLUS, params))
        pts.append(_make_point(-z3, -th3, Kind.ASYMMETRIC_MINUS, params))
    return pts


@dataclass
class BranchTable:
    """Rows of a bifurcation scan; ``z3``/``theta3`` are nan where the chiral branch is absent."""

    mu: np.ndarray
    zeta: float
    z3: np.ndarray
    theta3: np.ndarray
    even_stability: list
    even_eigenvalues: np.ndarray
    odd_eigenvalues: np.ndarray
    chiral_eigenvalues: np.ndarray

    @property
    def has_branch(self) -> np.ndarray:
        return ~np.isnan(self.z3)


def bifurcation_scan(mu_range, zeta: float = 0.0, resolution: int = 101, omega: float = 1.0) -> BranchTable:
    lo, hi = mu_range
    if lo < 0:
        raise ModelError("mu range must lie in [0, inf)")
    mus = np.linspace(lo, hi, resolution)
    z3 = np.full(resolution, np.nan)
    th3 = np.full(resolution, np.nan)
    even_eig = np.empty((resolution, 2), dtype=complex)
    odd_eig = np.empty((resolution, 2), dtype=complex)
    chiral_eig = np.full((resolution, 2), np.nan, dtype=complex)
    even_stab = []
    for i, mu in enumerate(mus):
        params = ModelParams(omega=omega, mu=float(mu), zeta=zeta)
        origin = PhaseState(0.0, 0.0)
        J0 = jacobian(origin, params)
        even_eig[i] = eigenvalues(J0)
        even_stab.append(classify(J0, origin, omega))
        odd_eig[i] = eigenvalues(jacobian(PhaseState(0.0, math.pi), params))
        if mu > 1.0:
            z, th = asymmetric_fixed_point(mu, zeta)
            z3[i], th3[i] = z, th
            chiral_eig[i] = eigenvalues(jacobian(PhaseState(z, th), params))
    return BranchTable(mus, zeta, z3, th3, even_stab, even_eig, odd_eig, chiral_eig)


def bifurcation_point(zeta: float = 0.0, bracket=(0.0, 10.0), tol: float = 1e-10) -> float:
    """Bisect on ``mu`` for the sign change of the determinant at the origin.

    The determinant is the product of the two eigenvalues, so its sign flip
    marks a real eigenvalue crossing zero (stable/center to saddle).
    """

    def det(mu):
        J = jacobian(PhaseState(0.0, 0.0), ModelParams(mu=mu, zeta=zeta))
        return J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]

    lo, hi = bracket
    if det(lo) * det(hi) > 0:
        raise ModelError("bracket does not straddle the bifurcation")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if det(mid) * det(lo) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def relaxation_time(params: ModelParams, in_tau: bool = False) -> float:
    """E-folding time of the return to the chiral attractor, ``1 / |max Re lambda|``."""
    if not params.mu > 1.0:
        raise ModelError("no chiral attractor for mu <= 1")
    if params.zeta == 0.0:
        return math.inf
    z3, th3 = asymmetric_fixed_point(params.mu, params.zeta)
    ev = eigenvalues(jacobian(PhaseState(z3, th3), params))
    t = 1.0 / abs(max(w.real for w in ev))
    return t / params.tau if in_tau else t
