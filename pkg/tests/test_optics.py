import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upqi.errors import NegativeError, NonFiniteError, OutOfRangeError
from upqi.optics import (
    MeasurementSetting,
    bogoliubov_coeffs,
    make_object,
    make_setup,
    make_squeezer,
    mod_G_sq_closed_form,
    phase_diff,
    phi_G_closed_form,
    wrap_phase,
)
from upqi.oracle import initial_state, apply_two_mode_squeezer, homodyne_moments
from upqi.optics import FieldParams

phases = st.floats(-math.pi, math.pi)
gains = st.floats(0.0, 5.0)
trans = st.floats(0.0, 1.0)


class TestWrap:
    @pytest.mark.parametrize(
        "theta, expected",
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (2 * math.pi + 0.1, 0.1)],
    )
    def test_wrap_phase(self, theta, expected):
        assert wrap_phase(theta) == pytest.approx(expected, abs=1e-15)

    @given(st.floats(-100, 100))
    def test_range(self, theta):
        w = wrap_phase(theta)
        assert -math.pi < w <= math.pi
        assert abs(phase_diff(w, theta)) < 1e-12


class TestSqueezer:
    def test_identity(self):
        sq = make_squeezer(0.0, 0.0)
        assert (sq.G, sq.g) == (1.0, 0.0)

    def test_half(self):
        sq = make_squeezer(0.5, 0.0)
        assert sq.G == pytest.approx(1.127626, abs=1e-6)
        assert sq.g == pytest.approx(0.521095, abs=1e-6)

    def test_half_matches_symplectic_variance(self):
        # single squeezer on vacuum: Var(X_a) = G^2 + g^2 = cosh(2r)
        sq = make_squeezer(0.5, 0.0)
        state = apply_two_mode_squeezer(initial_state(FieldParams(0, 0, 1, 0)), 0, 1, sq)
        _, var = homodyne_moments(state, 0, FieldParams(0, 0, 1, 0))
        assert var == pytest.approx(sq.G**2 + sq.g**2, rel=1e-14)

    def test_negative(self):
        with pytest.raises(NegativeError):
            make_squeezer(-1.0, 0.0)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite(self, bad):
        with pytest.raises(NonFiniteError):
            make_squeezer(bad, 0.0)

    def test_phase_wrapped(self):
        assert make_squeezer(0.1, 4.0).pump_phase == pytest.approx(4.0 - 2 * math.pi)

    @given(gains)
    def test_hyperbolic_identity(self, r):
        sq = make_squeezer(r)
        assert sq.G >= 1.0 and sq.g >= 0.0
        assert abs(sq.G**2 - sq.g**2 - 1.0) <= 1e-12 * sq.G**2


class TestObject:
    @pytest.mark.parametrize("T, R", [(1.0, 0.0), (0.0, 1.0), (0.8, 0.6)])
    def test_reflection(self, T, R):
        assert make_object(T, 0.7 if T == 0.8 else 0.0).R == pytest.approx(R, abs=1e-15)

    @pytest.mark.parametrize("T", [-0.1, 1.0001, math.nan])
    def test_out_of_range(self, T):
        with pytest.raises((OutOfRangeError, NonFiniteError)):
            make_object(T)

    @given(trans, st.floats(-20, 20))
    def test_lossless(self, T, phi):
        px = make_object(T, phi)
        assert abs(px.T**2 + px.R**2 - 1.0) <= 1e-12
        assert -math.pi < px.phi_T <= math.pi


class TestSetting:
    def test_derived_from_phases(self):
        s = make_setup(0.5, 0.5, phi_p1=0.2, phi_p2=1.0, phi_alpha=0.3, phi_beta=1.2707963267948966)
        st_ = s.setting()
        assert st_.delta == pytest.approx(math.pi / 2, abs=1e-12)
        assert st_.Delta == pytest.approx(0.8, abs=1e-12)
        assert st_.k == 1

    def test_k_none_off_grid(self):
        assert MeasurementSetting.from_phases(0.3, 0.0).k is None

    def test_with_setting_retunes_only_lo_and_second_pump(self):
        s = make_setup(0.5, 0.7, phi_p1=0.2, phi_alpha=0.3)
        t = s.with_setting(delta=1.0, Delta=-2.0)
        assert t.field.phi_alpha == s.field.phi_alpha
        assert t.squeezer1 == s.squeezer1
        assert t.setting().delta == pytest.approx(1.0, abs=1e-12)
        assert t.setting().Delta == pytest.approx(-2.0, abs=1e-12)


class TestBogoliubov:
    def test_std_values(self, std_setup, std_pixel):
        # frozen from the symplectic oracle (see test_oracle) and direct complex arithmetic
        c = bogoliubov_coeffs(std_setup, std_pixel)
        assert c.G == pytest.approx(1.4887725713337192, rel=1e-14)
        assert c.g == pytest.approx(1.0576810742794214, rel=1e-14)
        assert c.r == pytest.approx(0.3126571832962484, rel=1e-14)
        assert c.x == pytest.approx(0.17084181362725814, rel=1e-14)
        # values quoted to six decimals
        assert abs(c.G) == pytest.approx(1.488773, abs=1e-6)
        assert abs(c.r) == pytest.approx(0.312657, abs=1e-6)
        assert c.x == pytest.approx(0.170842, abs=1e-6)
        assert abs(c.g) == pytest.approx(1.057680, abs=2e-6)

    def test_no_squeezing(self):
        c = bogoliubov_coeffs(make_setup(0.0, 0.0), make_object(0.37, 1.1, -0.4))
        assert (c.G, c.g, c.r) == (1.0, 0.0, 0.0)

    @pytest.mark.parametrize("r", [0.1, 0.5, 2.0])
    def test_cascaded_identical_squeezers(self, r):
        c = bogoliubov_coeffs(make_setup(r, r), make_object(1.0))
        assert c.G == pytest.approx(math.cosh(2 * r), rel=1e-13)
        assert c.g == pytest.approx(math.sinh(2 * r), rel=1e-13)
        assert c.r == 0

    def test_direct_composition(self):
        # hand substitution of the crystal-by-crystal input-output relations
        s1, s2 = make_squeezer(0.7, 0.4), make_squeezer(1.1, -1.3)
        px = make_object(0.45, 2.2, -0.9)
        setup = make_setup(0.7, 1.1, phi_p1=0.4, phi_p2=-1.3)
        # coefficient vectors over (a_S0, a_I0^dag, a_IL^dag) for a_S1 and a_IT^dag
        a_s1 = np.array([s1.G, s1.g * cmath.exp(1j * s1.pump_phase), 0])
        a_i1_dag = np.array([s1.g * cmath.exp(-1j * s1.pump_phase), s1.G, 0])  # coefficients of a_S0, a_I0^dag
        a_it_dag = px.T * cmath.exp(-1j * px.phi_T) * a_i1_dag + np.array([0, 0, px.R * cmath.exp(-1j * px.phi_R)])
        a_s2 = s2.G * a_s1 + s2.g * cmath.exp(1j * s2.pump_phase) * a_it_dag
        c = bogoliubov_coeffs(setup, px)
        np.testing.assert_allclose([c.G, c.g, c.r], a_s2, rtol=1e-13, atol=1e-13)

    @settings(max_examples=300)
    @given(gains, gains, trans, phases, phases, phases, phases)
    def test_commutation_identity(self, r1, r2, T, p1, p2, pt, pr):
        c = bogoliubov_coeffs(make_setup(r1, r2, phi_p1=p1, phi_p2=p2), make_object(T, pt, pr))
        g2 = abs(c.G) ** 2
        assert abs(g2 - abs(c.g) ** 2 - abs(c.r) ** 2 - 1.0) <= 1e-9 * g2
        assert c.mod_G >= 1.0 - 1e-12
        assert 0.0 <= c.x < 1.0

    def test_commutation_identity_sweep(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            r1, r2 = rng.uniform(0, 5, 2)
            ph = rng.uniform(-math.pi, math.pi, 4)
            c = bogoliubov_coeffs(make_setup(r1, r2, phi_p1=ph[0], phi_p2=ph[1]), make_object(rng.uniform(), ph[2], ph[3]))
            g2 = abs(c.G) ** 2
            assert abs(g2 - abs(c.g) ** 2 - abs(c.r) ** 2 - 1.0) <= 1e-9 * g2

    @settings(max_examples=300)
    @given(gains, gains, trans, phases, phases, phases)
    def test_closed_forms(self, r1, r2, T, p1, p2, pt):
        setup = make_setup(r1, r2, phi_p1=p1, phi_p2=p2)
        c = bogoliubov_coeffs(setup, make_object(T, pt))
        m2 = mod_G_sq_closed_form(setup.squeezer1.G, setup.squeezer2.G, c.x, c.phi1)
        assert abs(c.G) ** 2 == pytest.approx(m2, rel=1e-12)
        assert abs(phase_diff(c.phi_G, math.atan2(c.G.imag, c.G.real))) <= 1e-12
        assert c.phi_G == phi_G_closed_form(c.x, c.phi1)

    def test_phase_definitions(self):
        setup = make_setup(0.3, 0.4, phi_p1=0.5, phi_p2=2.0)
        c = bogoliubov_coeffs(setup, make_object(0.5, -1.0, 0.25))
        assert c.phi1 == pytest.approx(wrap_phase(1.5 + 1.0))
        assert c.phi2 == pytest.approx(wrap_phase(2.0 + 1.0))
        assert c.phi3 == pytest.approx(1.75)

    @given(gains, gains, trans, phases, phases, phases, st.floats(-10, 10))
    def test_common_pump_shift(self, r1, r2, T, p1, p2, pt, theta):
        px = make_object(T, pt)
        a = bogoliubov_coeffs(make_setup(r1, r2, phi_p1=p1, phi_p2=p2), px)
        b = bogoliubov_coeffs(make_setup(r1, r2, phi_p1=p1 + theta, phi_p2=p2 + theta), px)
        assert a.x == b.x
        assert b.mod_G == pytest.approx(a.mod_G, rel=1e-12)

    def test_x_strictly_below_one(self):
        for r in (1.0, 5.0, 10.0):
            assert make_setup(r, r).x(make_object(1.0)) < 1.0
