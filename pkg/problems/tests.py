import math

import numpy as np
from django.test import SimpleTestCase

from exceptions import InvalidParameters, PreconditionViolation
from .models import Family, State
from .utils import (boundary_conditions, closed_form_m1, closed_form_m_third,
                    closed_form_residual, gamma_from_physical, m_from_coefficients,
                    make_params, rhs)


class MakeParamsTests(SimpleTestCase):

    def test_temperature_map(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        self.assertEqual((params.alpha, params.beta), (1.0, 1.0))
        params = make_params(Family.TEMPERATURE, -2.0, 5.0)
        self.assertEqual((params.alpha, params.beta, params.gamma), (-0.5, -2.0, 5.0))

    def test_flux_map(self):
        params = make_params(Family.FLUX, -1.0, -2.0)
        self.assertEqual((params.alpha, params.beta), (1.0, -1.0))
        params = make_params(Family.FLUX, -0.5)
        self.assertEqual((params.alpha, params.beta), (1.5, 0.0))

    def test_generic_takes_coefficients(self):
        params = make_params(Family.GENERIC, alpha=0.7, beta=-0.2)
        self.assertIsNone(params.m)
        self.assertEqual((params.alpha, params.beta), (0.7, -0.2))

    def test_rejects_non_finite(self):
        with self.assertRaises(InvalidParameters):
            make_params(Family.TEMPERATURE, math.nan)
        with self.assertRaises(InvalidParameters):
            make_params(Family.FLUX, 1.0, math.inf)
        with self.assertRaises(InvalidParameters):
            make_params(Family.GENERIC, alpha=1.0)

    def test_unknown_family(self):
        with self.assertRaises(ValueError):
            make_params('plate', 1.0)

    def test_m_round_trip(self):
        for family in (Family.TEMPERATURE, Family.FLUX):
            for m in (-3.0, -0.75, 0.0, 1.1):
                params = make_params(family, m)
                self.assertAlmostEqual(m_from_coefficients(family, params.alpha), m, places=14)
        with self.assertRaises(InvalidParameters):
            m_from_coefficients(Family.GENERIC, 1.0)

    def test_blasius_cases_have_no_slope_term(self):
        self.assertEqual(make_params(Family.TEMPERATURE, 0.0).beta, 0.0)
        self.assertEqual(make_params(Family.FLUX, -0.5).beta, 0.0)


class BoundaryConditionTests(SimpleTestCase):

    def test_temperature_frees_curvature(self):
        state = boundary_conditions(make_params(Family.TEMPERATURE, 1.0, 2.0), -0.3).initial_state()
        self.assertEqual(state.as_tuple(), (-2.0, 1.0, -0.3))

    def test_flux_frees_slope(self):
        state = boundary_conditions(make_params(Family.FLUX, -1.0, -2.0), 0.5).initial_state()
        self.assertEqual(state.as_tuple(), (2.0, 0.5, -1.0))

    def test_generic_has_none(self):
        with self.assertRaises(PreconditionViolation):
            boundary_conditions(make_params(Family.GENERIC, alpha=1.0, beta=1.0), 0.0)

    def test_state_must_be_finite(self):
        with self.assertRaises(InvalidParameters):
            State(0.0, math.nan, 1.0)

    def test_rhs(self):
        params = make_params(Family.GENERIC, alpha=2.0, beta=3.0)
        self.assertEqual(rhs(params, State(1.0, 2.0, 3.0)), -2.0 * 3.0 + 3.0 * 4.0)


class ClosedFormTests(SimpleTestCase):

    def test_m1_gamma0(self):
        solution = closed_form_m1(0.0)
        self.assertAlmostEqual(solution.derived_constants['c'], 1.0, places=15)
        ts = np.linspace(0.0, 20.0, 81)
        np.testing.assert_allclose(solution(ts), 1.0 - np.exp(-ts), atol=1e-15)
        self.assertEqual(solution.state(0.0).as_tuple(), (0.0, 1.0, -1.0))

    def test_m1_boundary_data(self):
        for gamma in (-3.0, 0.0, 5.0, 50.0):
            solution = closed_form_m1(gamma)
            state = solution.state(0.0)
            self.assertAlmostEqual(state.f, -gamma, places=12)
            self.assertAlmostEqual(state.fp, 1.0, places=12)
            self.assertLess(np.max(closed_form_residual(solution, np.linspace(0, 30, 61))), 1e-12)

    def test_m1_gamma5_changes_sign_near_17(self):
        solution = closed_form_m1(5.0)
        c = solution.derived_constants['c']
        t_zero = math.log((c + 5.0) / c) / c
        self.assertAlmostEqual(t_zero, 17.1, delta=0.1)
        self.assertLess(solution(10.0), 0.0)

    def test_m_third(self):
        solution = closed_form_m_third(0.0)
        state = solution.state(0.0)
        self.assertAlmostEqual(state.f, 0.0, places=14)
        self.assertAlmostEqual(state.fp, 1.0, places=12)
        self.assertAlmostEqual(state.fpp, 0.0, places=14)
        self.assertAlmostEqual(solution(200.0), math.sqrt(6.0), places=10)

    def test_m_third_curvature_at_wall(self):
        for gamma in (-2.0, 1.0, 2.0):
            solution = closed_form_m_third(gamma)
            self.assertAlmostEqual(solution.state(0.0).fpp, gamma / 3.0, places=12)
            self.assertLess(np.max(closed_form_residual(solution, np.linspace(0, 30, 61))), 1e-12)


class PhysicalGammaTests(SimpleTestCase):

    def test_scales_with_transpiration(self):
        args = dict(m=0.0, mu=1.0, rho_inf=1.0, beta_thermal=1.0, g=1.0, k=1.0, A=1.0,
                    lambda_diff=1.0)
        self.assertEqual(gamma_from_physical(omega=0.5, **args), 1.0)
        self.assertEqual(gamma_from_physical(omega=-0.5, **args), -1.0)

    def test_rejects_m_minus_one_and_bad_constants(self):
        args = dict(omega=1.0, mu=1.0, rho_inf=1.0, beta_thermal=1.0, g=1.0, k=1.0, A=1.0,
                    lambda_diff=1.0)
        with self.assertRaises(InvalidParameters):
            gamma_from_physical(m=-1.0, **args)
        args['k'] = 0.0
        with self.assertRaises(InvalidParameters):
            gamma_from_physical(m=0.0, **args)
