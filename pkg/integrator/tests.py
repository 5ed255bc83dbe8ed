import math

import numpy as np
from django.test import SimpleTestCase, override_settings

from exceptions import InvalidParameters
from problems.models import Family
from problems.utils import closed_form_m1, make_params
from .models import EventKind, Termination
from .serializers import ProfileSerializer
from .solver import bisect_crossing, dormand_prince, hermite
from .utils import (closed_form_profile, default_horizon, detect_events, first_integral,
                    integrate, make_spec, profile_to_csv, scale_solution)


TIGHT = {'rel_tol': 1e-10, 'abs_tol': 1e-12}


class SolverTests(SimpleTestCase):

    def test_exponential(self):
        raw = dormand_prince(lambda t, y: (y[0],), 0.0, (1.0,), 2.0,
                             rtol=1e-10, atol=1e-12, max_steps=10000)
        self.assertEqual(raw.status, Termination.REACHED_TMAX)
        self.assertEqual(raw.ts[-1], 2.0)
        self.assertAlmostEqual(raw.ys[-1][0], math.exp(2.0), delta=1e-8)

    def test_backward_integration(self):
        raw = dormand_prince(lambda t, y: (y[0],), 1.0, (math.e,), 0.0,
                             rtol=1e-10, atol=1e-12, max_steps=10000)
        self.assertEqual(raw.ts[-1], 0.0)
        self.assertTrue(all(a > b for a, b in zip(raw.ts, raw.ts[1:])))
        self.assertAlmostEqual(raw.ys[-1][0], 1.0, delta=1e-9)

    def test_blow_up_located_on_threshold(self):
        # y' = y^2, y(0) = 1 leaves every bound at t = 1
        raw = dormand_prince(lambda t, y: (y[0] * y[0],), 0.0, (1.0,), 2.0,
                             rtol=1e-8, atol=1e-10, max_steps=10000, threshold=1e3)
        self.assertEqual(raw.status, 'BlowUp')
        self.assertLess(raw.t_stop, 1.0)
        self.assertAlmostEqual(raw.t_stop, 1.0 - 1e-3, delta=1e-5)

    def test_stop_predicate(self):
        raw = dormand_prince(lambda t, y: (1.0,), 0.0, (0.0,), 10.0,
                             rtol=1e-8, atol=1e-10, max_steps=10000, h_max=0.1,
                             stop=lambda t, y: y[0] > 0.5)
        self.assertEqual(raw.status, Termination.RUNAWAY)
        self.assertEqual(raw.t_stop, raw.ts[-1])
        self.assertGreater(raw.t_stop, 0.5)
        self.assertLess(raw.t_stop, 0.6 + 1e-12)

    def test_step_limit(self):
        raw = dormand_prince(lambda t, y: (math.cos(t),), 0.0, (0.0,), 1000.0,
                             rtol=1e-10, atol=1e-12, max_steps=5)
        self.assertEqual(raw.status, 'StepLimitExceeded')

    def test_hermite_is_exact_for_cubics(self):
        def p(t):
            return 2 * t ** 3 - t + 1

        def dp(t):
            return 6 * t ** 2 - 1

        ts = np.linspace(0.5, 1.5, 7)
        values = hermite(0.5, p(0.5), dp(0.5), 1.5, p(1.5), dp(1.5), ts)
        np.testing.assert_allclose(values, p(ts), atol=1e-13)

    def test_bisect_crossing(self):
        t = bisect_crossing(lambda x: x > 0.3, 0.0, 1.0, resolution=1e-10)
        self.assertGreater(t, 0.3)
        self.assertAlmostEqual(t, 0.3, delta=1e-9)


class IvpSpecTests(SimpleTestCase):

    def setUp(self):
        self.params = make_params(Family.TEMPERATURE, 1.0, 0.0)

    def test_rejects_bad_controls(self):
        with self.assertRaises(InvalidParameters):
            make_spec(self.params, (0.0, 1.0, -1.0), t_max=0.0)
        with self.assertRaises(InvalidParameters):
            make_spec(self.params, (0.0, 1.0, -1.0), rel_tol=0.1)
        with self.assertRaises(InvalidParameters):
            make_spec(self.params, (0.0, 1.0, -1.0), max_steps=0)

    @override_settings(HORIZON_FACTOR=50)
    def test_default_horizon(self):
        self.assertEqual(default_horizon(self.params), 50.0)
        self.assertEqual(default_horizon(make_params(Family.GENERIC, alpha=0.5, beta=0.0)), 100.0)
        self.assertAlmostEqual(default_horizon(make_params(Family.GENERIC, alpha=0.01, beta=0.0)),
                               500.0)
        self.assertEqual(default_horizon(self.params, factor=10), 10.0)


class IntegrateTests(SimpleTestCase):

    def test_recovers_m1_closed_form(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        profile = integrate(make_spec(params, (0.0, 1.0, -1.0), t_max=20.0, **TIGHT))
        self.assertTrue(profile.reached_tmax)
        self.assertEqual(profile.t[0], 0.0)
        self.assertEqual(profile.t_final, 20.0)
        np.testing.assert_allclose(profile.f, 1.0 - np.exp(-profile.t), atol=1e-7)
        np.testing.assert_allclose(profile.fp, np.exp(-profile.t), atol=1e-7)
        self.assertEqual(profile.events(), [])

    def test_zero_crossing_event(self):
        solution = closed_form_m1(5.0)
        c = solution.derived_constants['c']
        params = make_params(Family.TEMPERATURE, 1.0, 5.0)
        profile = closed_form_profile(solution, params, 20.0)
        crossings = profile.events(EventKind.F_ZERO_CROSSING)
        self.assertEqual(len(crossings), 1)
        self.assertEqual(crossings[0].direction, 1)
        self.assertAlmostEqual(crossings[0].t, math.log((c + 5.0) / c) / c, delta=1e-6)
        # f'' = -(c + gamma) c^2 exp(-c t) keeps its sign
        self.assertEqual(profile.events(EventKind.FPP_SIGN_CHANGE), [])
        self.assertEqual(profile.events(EventKind.FP_SIGN_CHANGE), [])

    def test_crossing_before_a_dead_band_station(self):
        # f = (t - 1)(t - 2)^2 is sampled exactly zero at t = 2, after its sign change at t = 1
        t = np.array([0.0, 2.0, 3.0])
        f = (t - 1.0) * (t - 2.0) ** 2
        fp = (t - 2.0) ** 2 + 2.0 * (t - 1.0) * (t - 2.0)
        ones, zeros = np.ones_like(t), np.zeros_like(t)
        events = detect_events(t, np.column_stack([f, ones, ones]),
                               np.column_stack([fp, zeros, zeros]))
        self.assertEqual(len(events), 1)
        self.assertEqual(events[0].kind, EventKind.F_ZERO_CROSSING)
        self.assertEqual(events[0].direction, 1)
        self.assertAlmostEqual(events[0].t, 1.0, delta=1e-7)

    def test_stop_ends_integration_with_runaway(self):
        params = make_params(Family.GENERIC, alpha=0.0, beta=1.0)
        profile = integrate(make_spec(params, (0.0, 1.0, 1.0), t_max=50.0),
                            stop=lambda t, y: y[1] > 2.0)
        self.assertEqual(profile.termination, Termination.RUNAWAY)
        self.assertEqual(profile.t_stop, profile.t_final)
        self.assertGreater(profile.fp[-1], 2.0)

    def test_blow_up(self):
        # f''' = f'^2 with f'(0) = f''(0) = 1 blows up in finite time
        params = make_params(Family.GENERIC, alpha=0.0, beta=1.0)
        profile = integrate(make_spec(params, (0.0, 1.0, 1.0), t_max=50.0))
        self.assertEqual(profile.termination, Termination.BLOW_UP)
        self.assertIsNotNone(profile.t_stop)
        self.assertLess(profile.t_stop, 50.0)
        self.assertTrue(np.all(np.isfinite(profile.y)))

    def test_dense_output(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        profile = integrate(make_spec(params, (0.0, 1.0, -1.0), t_max=10.0, **TIGHT))
        np.testing.assert_allclose(profile.at(profile.t), profile.y, atol=1e-14)
        self.assertAlmostEqual(profile.at(2.5)[0], 1.0 - math.exp(-2.5), delta=1e-7)
        with self.assertRaises(ValueError):
            profile.at(11.0)

    def test_first_integral_conserved(self):
        params = make_params(Family.GENERIC, alpha=1.3, beta=-1.3)
        profile = integrate(make_spec(params, (0.2, -0.4, 0.7), t_max=5.0, **TIGHT))
        values = first_integral(profile)
        self.assertLess(np.max(np.abs(values - values[0])), 1e-8)


class ScaleSolutionTests(SimpleTestCase):

    def setUp(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        self.profile = integrate(make_spec(params, (0.0, 1.0, -1.0), t_max=4.0, **TIGHT))

    def test_scaling_maps_stations_and_values(self):
        scaled = scale_solution(self.profile, 2.0)
        np.testing.assert_allclose(scaled.t, self.profile.t / 2.0)
        np.testing.assert_allclose(scaled.f, 2.0 * self.profile.f)
        np.testing.assert_allclose(scaled.fpp, 8.0 * self.profile.fpp)
        self.assertEqual(scaled.t_final, 2.0)

    def test_scaled_profile_solves_the_equation(self):
        scaled = scale_solution(self.profile, 0.5)
        direct = integrate(make_spec(self.profile.params, scaled.initial_state,
                                     t_max=scaled.t_final, **TIGHT))
        np.testing.assert_allclose(direct.at(scaled.t), scaled.y, atol=1e-8)

    def test_rejects_non_positive_kappa(self):
        with self.assertRaises(InvalidParameters):
            scale_solution(self.profile, 0.0)


class OutputTests(SimpleTestCase):

    def setUp(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        self.profile = integrate(make_spec(params, (0.0, 1.0, -1.0), t_max=3.0))

    def test_csv(self):
        lines = profile_to_csv(self.profile).splitlines()
        self.assertEqual(lines[0], 't,f,fp,fpp')
        self.assertEqual(len(lines), len(self.profile) + 1)
        self.assertEqual(lines[1], '0,0,1,-1')

    def test_csv_on_given_stations(self):
        lines = profile_to_csv(self.profile, ts=[0.0, 1.0, 2.0]).splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[2].startswith('1,'))

    def test_serializer(self):
        data = ProfileSerializer(self.profile).data
        self.assertEqual(data['termination'], 'ReachedTmax')
        self.assertIsNone(data['t_stop'])
        self.assertEqual(data['n_samples'], len(self.profile))
        self.assertEqual(data['initial'], [0.0, 1.0, -1.0])
        self.assertEqual(data['event_log'], [])
