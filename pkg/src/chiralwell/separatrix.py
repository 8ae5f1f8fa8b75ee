"""Separatrix of the conservative dynamics and the chirality stability margin.

At ``zeta = 0`` the reduced energy ``F = sqrt(1 - z^2) cos(theta) + mu z^2 / 2``
is conserved. For ``mu > 1`` its level set ``F = 1`` passes through the
saddle at the origin and splits the cylinder into vibrational regions
(``F > 1``, trapped in one well) and the beating region (``F < 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ModelError, PhaseState, asymmetric_fixed_point, energy

REGION_BAND = 1e-9


class NoSeparatrixError(ModelError):
    """Raised for ``mu <= 1``, where the origin is not a saddle."""


class RegionLabel(str, Enum):
    VIBRATIONAL = "vibrational"
    BEATING = "beating"
    SEPARATRIX = "separatrix"


def _require_supercritical(mu):
    if not mu > 1.0:
        raise NoSeparatrixError(f"no separatrix for mu <= 1 (got mu={mu!r})")


def classify_region(state: PhaseState, mu: float, band: float = REGION_BAND) -> RegionLabel:
    _require_supercritical(mu)
    f = float(energy(state.z, state.theta, mu)) - 1.0
    if abs(f) <= band:
        return RegionLabel.SEPARATRIX
    return RegionLabel.VIBRATIONAL if f > 0 else RegionLabel.BEATING


def region_labels(z, theta, mu, band: float = REGION_BAND) -> np.ndarray:
    """Vectorised region labels; every entry is ``"none"`` when ``mu <= 1``."""
    z = np.asarray(z, dtype=float)
    if not mu > 1.0:
        return np.full(z.shape, "none", dtype=object)
    f = energy(z, theta, mu) - 1.0
    out = np.where(f > 0, RegionLabel.VIBRATIONAL.value, RegionLabel.BEATING.value).astype(object)
    out[np.abs(f) <= band] = RegionLabel.SEPARATRIX.value
    return out


def separatrix_max_z(mu: float) -> float:
    """Largest ``|z|`` reached on the separatrix, ``2 sqrt(mu - 1) / mu``."""
    _require_supercritical(mu)
    return 2.0 * math.sqrt(mu - 1.0) / mu


def theta_grid(resolution: int) -> np.ndarray:
    """``resolution`` uniformly spaced angles in (-pi, pi], ending at pi."""
    return -math.pi + 2.0 * math.pi * np.arange(1, resolution + 1) / resolution


def _bisect(g, lo, hi, *args):
    """Vectorised bisection of ``g`` on brackets with ``g(lo) < 0 < g(hi)`` or reversed."""
    glo = g(lo, *args)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        done = (mid == lo) | (mid == hi)
        if np.all(done):
            break
        gm = g(mid, *args)
        left = np.sign(gm) == np.sign(glo)
        lo = np.where(left & ~done, mid, lo)
        glo = np.where(left & ~done, gm, glo)
        hi = np.where(~left & ~done, mid, hi)
    g_lo, g_hi = np.abs(g(lo, *args)), np.abs(g(hi, *args))
    return np.where(g_lo <= g_hi, lo, hi)


@dataclass
class SeparatrixCurve:
    """Separatrix samples ``(theta, z)`` with ``z >= 0`` plus the mirrored branch.

    ``theta`` and ``z`` hold the upper (z >= 0) points; the lower branch is
    the exact image ``(-theta, -z)``.
    """

    mu: float
    theta: np.ndarray
    z: np.ndarray

    @property
    def mirror(self):
        from .model import wrap_angle

        return wrap_angle(-self.theta), -self.z

    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z))) if len(self.z) else 0.0


def _g(z, cos_t, mu):
    return np.sqrt(np.clip(1.0 - z * z, 0.0, None)) * cos_t + 0.5 * mu * z * z - 1.0


def separatrix_curve(mu: float, resolution: int = 1000, z_grid: int = 4096) -> SeparatrixCurve:
    """Sample the ``F = 1`` level set for each angle of a ``resolution``-point grid.

    Roots in ``z`` are bracketed by sign changes of ``F - 1`` on a
    ``z_grid``-point mesh over [0, 1] and refined by bisection.
    """
    _require_supercritical(mu)
    thetas = theta_grid(resolution)
    zs = np.linspace(0.0, 1.0, z_grid)
    cos_t = np.cos(thetas)
    g = _g(zs[None, :], cos_t[:, None], mu)
    sgn = np.sign(g)
    # brackets: strict sign changes between consecutive mesh points
    i_t, i_z = np.nonzero(sgn[:, :-1] * sgn[:, 1:] < 0)
    lo, hi = zs[i_z], zs[i_z + 1]
    roots = _bisect(_g, lo, hi, cos_t[i_t], mu)
    th_out = [thetas[i_t]]
    z_out = [roots]
    # exact zeros on the mesh (the saddle itself at theta = 0, the pole at mu = 2)
    j_t, j_z = np.nonzero(g == 0.0)
    th_out.append(thetas[j_t])
    z_out.append(zs[j_z])
    th = np.concatenate(th_out)
    z = np.concatenate(z_out)
    order = np.lexsort((z, th))
    return SeparatrixCurve(mu, th[order], z[order])


@dataclass(frozen=True)
class CriterionReport:
    """Stability margin of the chiral state against phase kicks.

    ``margin = z3 - z_star`` compares the dissipative attractor with the
    extent of the conservative separatrix. ``min_energy_on_line`` is the
    minimum over ``theta`` of the reduced energy along ``z = z3``; the whole
    line lies in the vibrational region iff it exceeds 1.
    """

    mu: float
    zeta: float
    z3: float
    z_star: float
    margin: float
    supercritical: bool
    min_energy_on_line: float
    line_vibrational: bool


def chirality_criterion(mu: float, zeta: float = 0.0, resolution: int = 4096) -> CriterionReport:
    _require_supercritical(mu)
    z3, _ = asymmetric_fixed_point(mu, zeta)
    z_star = separatrix_max_z(mu)
    f_line = energy(np.full(resolution, z3), theta_grid(resolution), mu)
    f_min = float(f_line.min())
    return CriterionReport(
        mu=mu, zeta=zeta, z3=z3, z_star=z_star, margin=z3 - z_star,
        supercritical=mu > 3.0, min_energy_on_line=f_min, line_vibrational=f_min > 1.0,
    )
