import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralwell.model import (
    AmplitudeState,
    ModelError,
    ModelParams,
    ParameterError,
    PhaseState,
    PoleError,
    amplitude_rhs,
    asymmetric_fixed_point,
    charge,
    derive_params,
    energy,
    field,
    reduced_energy,
    to_amplitude,
    to_phase,
    vector_field,
    wrap_angle,
)

interior_z = st.floats(-0.99, 0.99)
angles = st.floats(-math.pi, math.pi)
mus = st.floats(0.0, 6.0)
zetas = st.floats(0.0, 0.5)


def random_amplitude(rng):
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return AmplitudeState(complex(v[0], v[1]), complex(v[2], v[3]))


# parameters -----------------------------------------------------------------

def test_derive_params_reference_set():
    p = derive_params(-1.0, 1.0, 1.0, -1.5, -0.2)
    assert (p.omega, p.capital_omega, p.mu, p.zeta) == (1.0, 0.0, 1.5, 0.2)
    assert p.tau == pytest.approx(math.pi, rel=1e-15)


def test_derive_params_linear_limit():
    p = derive_params(0.0, 2.0, 1.0, 0.0, 0.0)
    assert p.mu == 0.0 and p.zeta == 0.0
    assert p.capital_omega == 1.0


def test_derive_params_c_enters_squared():
    assert derive_params(-1.0, 1.0, 2.0, -1.0, 0.0).mu == pytest.approx(4.0)
    assert derive_params(-1.0, 1.0, -2.0, -1.0, 0.0).mu == pytest.approx(4.0)


@pytest.mark.parametrize("args", [
    (1.0, 1.0, 1.0, -1.0, 0.0),   # degenerate doublet
    (1.0, -1.0, 1.0, -1.0, 0.0),  # inverted doublet
    (-1.0, 1.0, 1.0, 0.5, 0.0),
    (-1.0, 1.0, 1.0, -0.5, 0.1),
    (-1.0, 1.0, 0.0, -0.5, 0.0),
])
def test_derive_params_rejects(args):
    with pytest.raises(ParameterError):
        derive_params(*args)


def test_raw_coefficients_match_reduced_substitution():
    p = derive_params(-0.3, 0.9, 1.7, -0.8, -0.05)
    r = p.raw
    assert p.nonlinear_coefficient == pytest.approx(r.epsilon * r.c ** 2, rel=1e-14)
    assert p.dissipative_coefficient == pytest.approx(r.eta * r.c ** 2, rel=1e-14)
    plain = ModelParams(omega=p.omega, mu=p.mu, zeta=p.zeta)
    assert plain.nonlinear_coefficient == pytest.approx(-p.omega * p.mu, rel=1e-14)
    assert plain.dissipative_coefficient == pytest.approx(-p.omega * p.zeta, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(omega=0.0), dict(omega=-1.0), dict(mu=-0.1), dict(zeta=-1e-3),
                                dict(mu=math.nan)])
def test_model_params_invariants(kw):
    with pytest.raises(ParameterError):
        ModelParams(**kw)


# states ----------------------------------------------------------------------

def test_wrap_angle_half_open():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(3.0 + 1.0) == pytest.approx(4.0 - 2 * math.pi)
    arr = wrap_angle(np.array([-math.pi, 0.0, 7.0, -7.0]))
    assert arr[0] == math.pi
    assert np.all((arr > -math.pi) & (arr <= math.pi))


def test_phase_state_invariants():
    assert PhaseState(0.2, -math.pi).theta == math.pi
    with pytest.raises(ModelError):
        PhaseState(1.0000001, 0.0)
    assert PhaseState(0.3, 0.4).mirrored() == PhaseState(-0.3, -0.4)


# vector field ------------------------------------------------------------------

def test_vector_field_origin_is_stationary():
    d = vector_field(PhaseState(0.0, 0.0), ModelParams(mu=2.7, zeta=0.3))
    assert d.dz_dt == 0.0 and d.dtheta_dt == 0.0


@pytest.mark.parametrize("mu", [0.0, 1.5, 4.5])
def test_vector_field_quarter_turn(mu):
    d = vector_field(PhaseState(0.0, math.pi / 2), ModelParams(mu=mu, zeta=0.0))
    assert d.dz_dt == pytest.approx(2.0, abs=1e-15)
    assert d.dtheta_dt == pytest.approx(0.0, abs=1e-15)


def test_vector_field_vanishes_at_chiral_point():
    z3 = math.sqrt(1.25 / 2.29)
    d = vector_field(PhaseState(z3, math.atan(0.2 * z3)), ModelParams(mu=1.5, zeta=0.2))
    assert abs(d.dz_dt) <= 1e-12 and abs(d.dtheta_dt) <= 1e-12


def test_fixed_point_identity_on_grid():
    for mu in np.linspace(1.05, 6.0, 12):
        for zeta in np.linspace(0.0, 0.5, 6):
            p = ModelParams(mu=float(mu), zeta=float(zeta))
            z3, th3 = asymmetric_fixed_point(mu, zeta)
            for z, th in [(0.0, 0.0), (0.0, math.pi), (z3, th3), (-z3, -th3)]:
                dz, dth = field(z, th, p)
                assert abs(dz) <= 1e-12 and abs(dth) <= 1e-12


def test_pole_guard():
    p = ModelParams()
    with pytest.raises(PoleError):
        vector_field(PhaseState(1.0, 0.0), p)
    with pytest.raises(PoleError):
        field(np.array([0.0, -1.0 + 1e-10]), np.zeros(2), p)
    vector_field(PhaseState(1.0 - 1e-8, 0.0), p)


@given(interior_z, angles, mus, zetas, st.floats(-5, 5))
def test_gauge_invariance_of_field(z, th, mu, zeta, big_omega):
    a = vector_field(PhaseState(z, th), ModelParams(mu=mu, zeta=zeta))
    b = vector_field(PhaseState(z, th), ModelParams(mu=mu, zeta=zeta, capital_omega=big_omega))
    assert a == b


@given(interior_z, angles, mus, zetas)
def test_reflection_symmetry(z, th, mu, zeta):
    p = ModelParams(mu=mu, zeta=zeta)
    dz, dth = field(z, th, p)
    mz, mth = field(-z, -th, p)
    assert mz == pytest.approx(-dz, abs=1e-14)
    assert mth == pytest.approx(-dth, abs=1e-14)


@settings(max_examples=50)
@given(st.floats(-0.95, 0.95), angles, mus)
def test_energy_conserved_to_second_order(z, th, mu):
    # F(x + h f(x)) - F(x) = O(h^2): the ratio at h and h/2 is about 4
    p = ModelParams(mu=mu, zeta=0.0)
    dz, dth = field(z, th, p)
    f0 = float(energy(z, th, mu))

    def change(h):
        return abs(float(energy(z + h * dz, th + h * dth, mu)) - f0)

    for h in (1e-3, 1e-4):
        assert change(h) <= 50.0 * h * h


# amplitudes --------------------------------------------------------------------

def test_even_state_stays_even():
    s = AmplitudeState(1 / math.sqrt(2), 1 / math.sqrt(2))
    dr, dl = amplitude_rhs(s, ModelParams(mu=0.0, zeta=0.0))
    assert dr == pytest.approx(1j * s.a_L, abs=1e-15)
    assert dr == pytest.approx(dl, abs=1e-15)


@pytest.mark.parametrize("theta", [0.0, 0.7, math.pi / 2, 2.5])
def test_dissipation_silent_at_balanced_imbalance(theta):
    s = to_amplitude(PhaseState(0.0, theta))
    with_d = amplitude_rhs(s, ModelParams(mu=1.0, zeta=0.4))
    without = amplitude_rhs(s, ModelParams(mu=1.0, zeta=0.0))
    assert with_d[0] == pytest.approx(without[0], abs=1e-15)
    assert with_d[1] == pytest.approx(without[1], abs=1e-15)


def pushforward(s, d):
    (ar, al), (dr, dl) = (s.a_R, s.a_L), d
    dz = 2 * (ar.conjugate() * dr).real - 2 * (al.conjugate() * dl).real
    dth = (dr / ar).imag - (dl / al).imag
    return dz, dth


def test_chain_rule_equivalence_random_states():
    rng = np.random.default_rng(11)
    for _ in range(200):
        s = random_amplitude(rng)
        p = ModelParams(mu=float(rng.uniform(0, 5)), zeta=float(rng.uniform(0, 0.5)),
                        capital_omega=float(rng.normal()))
        if abs(abs(s.a_R) ** 2 - abs(s.a_L) ** 2) > 0.999:
            continue
        dz, dth = pushforward(s, amplitude_rhs(s, p))
        ref = vector_field(to_phase(s), p)
        assert dz == pytest.approx(ref.dz_dt, abs=1e-10)
        assert dth == pytest.approx(ref.dtheta_dt, abs=1e-10)


def test_chain_rule_with_raw_parameters():
    p = derive_params(-0.5, 1.5, 0.8, -3.0, -0.4)
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = random_amplitude(rng)
        dz, dth = pushforward(s, amplitude_rhs(s, p))
        ref = vector_field(to_phase(s), p)
        assert dz == pytest.approx(ref.dz_dt, abs=1e-10)
        assert dth == pytest.approx(ref.dtheta_dt, abs=1e-10)


def test_drive_enters_phase_rate_only():
    s = to_amplitude(PhaseState(0.4, 1.1))
    p = ModelParams(mu=2.0, zeta=0.3)
    dz0, dth0 = pushforward(s, amplitude_rhs(s, p))
    dz1, dth1 = pushforward(s, amplitude_rhs(s, p, drive=7.0))
    assert dz1 == pytest.approx(dz0, abs=1e-13)
    assert dth1 - dth0 == pytest.approx(7.0, abs=1e-12)


def test_charge_derivative_vanishes():
    rng = np.random.default_rng(5)
    for _ in range(200):
        s = random_amplitude(rng)
        dr, dl = amplitude_rhs(s, ModelParams(mu=float(rng.uniform(0, 5)), zeta=float(rng.uniform(0, 1))))
        assert abs((s.a_R.conjugate() * dr).real + (s.a_L.conjugate() * dl).real) <= 1e-14


def test_to_phase_examples():
    r = 1 / math.sqrt(2)
    assert to_phase(AmplitudeState(r, r)) == PhaseState(0.0, 0.0)
    odd = to_phase(AmplitudeState(r, -r))
    assert odd.theta == math.pi and abs(odd.z) < 1e-15
    s = to_phase(AmplitudeState(math.sqrt(0.9) * cmath.exp(0.3j), math.sqrt(0.1) * cmath.exp(0.1j)))
    assert s.z == pytest.approx(0.8, abs=1e-15)
    assert s.theta == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(PoleError):
        to_phase(AmplitudeState(1.0, 0.0))


def test_to_amplitude_examples():
    r = 1 / math.sqrt(2)
    a = to_amplitude(PhaseState(0.0, 0.0))
    assert a.a_R == pytest.approx(r) and a.a_L == pytest.approx(r)
    b = to_amplitude(PhaseState(1.0, 2.0))
    assert abs(b.a_R) == pytest.approx(1.0) and b.a_L == 0


def test_round_trip_thousand_states():
    rng = np.random.default_rng(0)
    z = rng.uniform(-0.999, 0.999, 1000)
    th = rng.uniform(-math.pi, math.pi, 1000)
    g = rng.uniform(-10, 10, 1000)
    for zi, ti, gi in zip(z, th, g):
        back = to_phase(to_amplitude(PhaseState(zi, ti), gi))
        assert abs(back.z - zi) <= 1e-14
        assert abs(wrap_angle(back.theta - ti)) <= 1e-14


@given(interior_z, angles, st.floats(-10, 10), st.floats(-10, 10))
def test_to_phase_ignores_global_phase(z, th, g1, g2):
    a = to_phase(to_amplitude(PhaseState(z, th), g1))
    b = to_phase(to_amplitude(PhaseState(z, th), g2))
    assert a.z == pytest.approx(b.z, abs=1e-14)
    assert abs(wrap_angle(a.theta - b.theta)) <= 1e-12


# energies ----------------------------------------------------------------------

def test_reduced_energy_examples():
    assert reduced_energy(PhaseState(0.0, 0.0), ModelParams(mu=2.0)) == 1.0
    for z in (1.0, -1.0):
        assert reduced_energy(PhaseState(z, 0.7), ModelParams(mu=3.0)) == pytest.approx(1.5)
    z3, _ = asymmetric_fixed_point(2.0, 0.0)
    assert reduced_energy(PhaseState(z3, 0.0), ModelParams(mu=2.0)) == pytest.approx(1.25, abs=1e-15)


def test_charge_examples():
    r = 1 / math.sqrt(2)
    assert charge(AmplitudeState(r, r)) == pytest.approx(1.0, abs=1e-15)
    assert charge(AmplitudeState(1.0, 0.0)) == 1.0
