import numpy as np
from django.test import SimpleTestCase

from exceptions import FVanishes, InvalidParameters, PreconditionViolation
from integrator.models import Profile, Termination
from integrator.utils import closed_form_profile, integrate, make_spec
from problems.models import Family
from problems.utils import closed_form_m1, make_params
from .models import FixedPointClass, PhaseState
from .serializers import FixedPointSerializer, PhaseTrajectorySerializer
from .utils import (conjugacy_error, fixed_point_residual, fixed_points, integrate_phase,
                    phase_rhs, phase_to_csv, sign_constant_intervals, to_phase, vector_field)


TIGHT = {'rel_tol': 1e-10, 'abs_tol': 1e-12}


def m1_gamma5_profile(t_max):
    # sampled, not integrated: forward integration from f(0) = -5 grows errors like exp(5 t)
    solution = closed_form_m1(5.0)
    params = make_params(Family.TEMPERATURE, 1.0, 5.0)
    return solution, closed_form_profile(solution, params, t_max, n=4001)


class PhaseRhsTests(SimpleTestCase):

    def test_origin(self):
        self.assertEqual(phase_rhs(0.7, -0.3, 0.0, 0.0), (0.0, 0.0))

    def test_values(self):
        self.assertEqual(phase_rhs(0.5, 0.0, 1.0, 2.0), (0.0, -7.0))
        du, dv = phase_rhs(1.0, 1.0, -1.0 / 6.0, 1.0 / 18.0)
        self.assertAlmostEqual(du, 0.0, places=15)
        self.assertAlmostEqual(dv, 0.0, places=15)

    def test_arrays(self):
        du, dv = phase_rhs(1.0, 2.0, np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(du, [0.0, -1.0])
        np.testing.assert_array_equal(dv, [0.0, -2.0])


class FixedPointTests(SimpleTestCase):

    def test_two_points(self):
        origin, other = fixed_points(1.0, 1.0)
        self.assertEqual(origin.location, (0.0, 0.0))
        self.assertAlmostEqual(other.location[0], -1.0 / 6.0, places=15)
        self.assertAlmostEqual(other.location[1], 1.0 / 18.0, places=15)
        self.assertEqual(other.classification, FixedPointClass.UNSTABLE_FOCUS)

    def test_flux_blasius(self):
        _, other = fixed_points(1.5, 0.0)
        self.assertEqual(other.location, (-0.5, 0.5))

    def test_origin_has_a_zero_eigenvalue(self):
        (origin,) = fixed_points(0.0, 0.0)
        self.assertEqual(origin.classification, FixedPointClass.DEGENERATE)
        origin = fixed_points(2.0, 0.5)[0]
        np.testing.assert_allclose(np.sort(origin.eigenvalues.real), [-2.0, 0.0], atol=1e-14)

    def test_only_origin_on_the_double_line(self):
        self.assertEqual(len(fixed_points(1.0, 2.0)), 1)

    def test_residuals_vanish(self):
        rng = np.random.default_rng(3)
        for alpha, beta in rng.uniform(-3.0, 3.0, (50, 2)):
            for point in fixed_points(alpha, beta):
                self.assertLess(fixed_point_residual(alpha, beta, point), 1e-12)

    def test_serializer(self):
        points = fixed_points(1.0, 1.0)
        data = FixedPointSerializer(points, many=True, context={'alpha': 1.0, 'beta': 1.0}).data
        np.testing.assert_allclose(data[0]['eigenvalues'], [[-1.0, 0.0], [0.0, 0.0]], atol=1e-14)
        self.assertEqual(data[0]['residual'], 0.0)
        self.assertEqual(data[1]['classification'], 'UnstableFocus')
        self.assertIsNone(FixedPointSerializer(points[0]).data['residual'])


class ToPhaseTests(SimpleTestCase):

    def test_constant_profile(self):
        params = make_params(Family.GENERIC, alpha=0.4, beta=-0.2)
        profile = integrate(make_spec(params, (1.0, 0.0, 0.0), t_max=5.0))
        image = to_phase(profile, tau=2.0)
        np.testing.assert_allclose(image.s, image.t - 2.0, atol=1e-12)
        np.testing.assert_array_equal(image.y, np.zeros_like(image.y))

    def test_unit_f_sample(self):
        profile = Profile(
            t=np.array([0.0, 0.1]),
            y=np.array([[1.0, 2.0, 3.0], [1.2, 2.3, 3.4]]),
            dydt=np.array([[2.0, 3.0, 4.0], [2.3, 3.4, 4.5]]),
            termination=Termination.REACHED_TMAX,
            params=make_params(Family.GENERIC, alpha=1.0, beta=1.0),
        )
        image = to_phase(profile)
        self.assertEqual(image.s[0], 0.0)
        self.assertEqual(tuple(image.y[0]), (2.0, 3.0))

    def test_negative_f_matches_analytic_transform(self):
        solution, profile = m1_gamma5_profile(10.0)
        image = to_phase(profile)
        self.assertTrue(np.all(np.diff(image.s) > 0))
        self.assertTrue(np.all(np.diff(image.t) < 0))
        f, fp, fpp, _ = solution.derivatives(image.t)
        np.testing.assert_allclose(image.u, fp / f ** 2, atol=1e-8)
        np.testing.assert_allclose(image.v, fpp / f ** 3, atol=1e-8)

    def test_conjugacy(self):
        _, profile = m1_gamma5_profile(10.0)
        self.assertLess(conjugacy_error(profile, **TIGHT), 1e-6)

    def test_conjugacy_on_a_tail_segment(self):
        # f < 0 throughout, so the flow starts from the t = 12 end
        _, profile = m1_gamma5_profile(15.0)
        self.assertLess(conjugacy_error(profile, t_range=(2.0, 12.0), **TIGHT), 1e-6)

    def test_zero_of_f(self):
        _, profile = m1_gamma5_profile(20.0)
        intervals = sign_constant_intervals(profile)
        self.assertEqual(len(intervals), 2)
        self.assertAlmostEqual(intervals[0][1], 17.1, delta=0.1)
        with self.assertRaises(FVanishes):
            to_phase(profile)
        image = to_phase(profile, t_range=(0.0, 15.0))
        self.assertEqual(image.termination, Termination.REACHED_TMAX)

    def test_f_zero_at_the_wall(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        profile = integrate(make_spec(params, (0.0, 1.0, -1.0), t_max=5.0))
        with self.assertRaises(FVanishes) as caught:
            to_phase(profile)
        self.assertEqual(caught.exception.t, 0.0)
        to_phase(profile, t_range=(0.5, 5.0))

    def test_bad_range(self):
        _, profile = m1_gamma5_profile(10.0)
        with self.assertRaises(PreconditionViolation):
            to_phase(profile, t_range=(0.0, 11.0))
        with self.assertRaises(PreconditionViolation):
            to_phase(profile, tau=12.0, t_range=(0.0, 10.0))


class IntegratePhaseTests(SimpleTestCase):

    def test_fixed_point_start_stays_put(self):
        trajectory = integrate_phase(1.0, 1.0, PhaseState(0.0, -1.0 / 6.0, 1.0 / 18.0), (0.0, 5.0))
        self.assertEqual(trajectory.termination, Termination.REACHED_TMAX)
        np.testing.assert_allclose(trajectory.y, np.tile([-1.0 / 6.0, 1.0 / 18.0], (len(trajectory), 1)),
                                   atol=1e-12)

    def test_backward_span_is_stored_increasing(self):
        trajectory = integrate_phase(1.0, 0.5, (0.0, 0.1, 0.1), (0.0, -2.0))
        self.assertEqual(trajectory.s[0], -2.0)
        self.assertEqual(trajectory.s[-1], 0.0)
        np.testing.assert_allclose(trajectory.at(0.0), [0.1, 0.1], atol=1e-14)
        summary = PhaseTrajectorySerializer(trajectory).data
        self.assertEqual(summary['s_range'], [-2.0, 0.0])
        self.assertEqual(summary['end'], [0.1, 0.1])

    def test_rejects_non_finite_start(self):
        with self.assertRaises(InvalidParameters):
            integrate_phase(1.0, 1.0, (0.0, float('nan'), 0.0), (0.0, 1.0))


class VectorFieldTests(SimpleTestCase):

    def test_grid(self):
        rows = vector_field(1.0, 1.0, (-1.0, 1.0), (0.0, 2.0), 3)
        self.assertEqual(rows.shape, (9, 4))
        np.testing.assert_array_equal(rows[:3, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_array_equal(rows[:3, 1], [0.0, 0.0, 0.0])
        du, dv = phase_rhs(1.0, 1.0, rows[:, 0], rows[:, 1])
        np.testing.assert_array_equal(rows[:, 2], du)
        np.testing.assert_array_equal(rows[:, 3], dv)

    def test_needs_two_points(self):
        with self.assertRaises(InvalidParameters):
            vector_field(1.0, 1.0, (-1.0, 1.0), (0.0, 2.0), 1)

    def test_csv(self):
        trajectory = integrate_phase(1.0, 1.0, (0.0, 0.0, 0.0), (0.0, 1.0))
        lines = phase_to_csv(trajectory).splitlines()
        self.assertEqual(lines[0], 's,u,v')
        self.assertEqual(lines[1], '0,0,0')
