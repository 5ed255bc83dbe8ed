import math
from types import SimpleNamespace
from unittest import mock

from django.test import SimpleTestCase, tag

from classify.models import ShapeClass, Shape
from exceptions import NoSignChange, PreconditionViolation, SameStatusAtEndpoints
from problems.models import Family
from problems.utils import make_params
from integrator.models import Termination
from .models import RecordKind, ResidualOutcome, Side, SolutionRecord
from .utils import (INDETERMINATE, _brackets_and_bands, _dedupe, _representatives, _scan_grid,
                    critical_gamma, enumerate_solutions, evaluate_residual,
                    flux_gamma_star_lower_bound, parallel_map, runaway_test, scan_residuals,
                    scan_solutions, solve_bvp, verify_flux_slope_bound)


EVALUATED = ResidualOutcome.EVALUATED


def _record(free_value, kind=RecordKind.ROOT):
    return SolutionRecord(params=make_params(Family.TEMPERATURE, 1.0, 0.0), free_value=free_value,
                          profile=None, bounded=True, shape=ShapeClass(Shape.CONCAVE), kind=kind)


class EvaluateResidualTests(SimpleTestCase):

    def test_closed_form_root(self):
        r = evaluate_residual(make_params(Family.TEMPERATURE, 1.0, 0.0), -1.0)
        self.assertEqual(r.outcome, EVALUATED)
        self.assertLess(abs(r.residual), 1e-6)
        self.assertIsNone(r.profile)

    def test_flux_root(self):
        r = evaluate_residual(make_params(Family.FLUX, -1.0, -2.0), 0.5, keep_profile=True)
        self.assertEqual(r.outcome, EVALUATED)
        self.assertLess(abs(r.residual), 1e-5)
        self.assertEqual(r.profile.initial_state.as_tuple(), (2.0, 0.5, -1.0))

    def test_blow_up_above_the_root(self):
        r = evaluate_residual(make_params(Family.TEMPERATURE, 1.0, 0.0), 1.0)
        self.assertEqual(r.outcome, ResidualOutcome.BLEW_UP_POSITIVE)
        self.assertEqual(r.extended, math.inf)
        self.assertEqual(r.sign, 1)

    def test_runaway_counts_as_positive_blow_up(self):
        # f'' > 0 with f' > 0 and beta >= 0: f' can only grow, the run stops early
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        for free_value in (0.0, 1.0, 5.0):
            with self.subTest(free_value=free_value):
                r = evaluate_residual(params, free_value, keep_profile=True)
                self.assertEqual(r.outcome, ResidualOutcome.BLEW_UP_POSITIVE)
                self.assertEqual(r.profile.termination, Termination.RUNAWAY)
                self.assertLess(r.profile.t_final, 50.0)

    def test_runaway_counts_as_negative_blow_up(self):
        params = make_params(Family.FLUX, -1.0, -2.0)
        r = evaluate_residual(params, -0.5, keep_profile=True)
        self.assertEqual(r.outcome, ResidualOutcome.BLEW_UP_NEGATIVE)
        self.assertEqual(r.profile.termination, Termination.RUNAWAY)
        # below -1/gamma f' turns negative on the way
        self.assertEqual(evaluate_residual(params, 0.3).outcome, ResidualOutcome.BLEW_UP_NEGATIVE)

    def test_runaway_predicate_follows_the_sign_of_beta(self):
        stop = runaway_test(make_params(Family.TEMPERATURE, 1.0, 0.0), 1e-6, 1e-10)
        self.assertTrue(stop(0.0, (3.0, 0.5, 0.1)))
        self.assertFalse(stop(0.0, (3.0, 0.5, -0.1)))
        self.assertFalse(stop(0.0, (3.0, 1e-7, 0.1)))
        # beta > 0 can turn a falling f' around, so no negative runaway
        self.assertFalse(stop(0.0, (3.0, -0.5, -0.1)))
        stop = runaway_test(make_params(Family.FLUX, -1.0, -2.0), 1e-6, 1e-10)
        self.assertTrue(stop(0.0, (3.0, -0.5, -0.1)))
        self.assertFalse(stop(0.0, (3.0, 0.5, 0.1)))
        stop = runaway_test(make_params(Family.FLUX, -0.5, 0.0), 1e-6, 1e-10)
        self.assertTrue(stop(0.0, (3.0, 0.5, 0.1)))
        self.assertTrue(stop(0.0, (3.0, -0.5, -0.1)))

    def test_generic_family_cannot_shoot(self):
        with self.assertRaises(PreconditionViolation):
            evaluate_residual(make_params(Family.GENERIC, alpha=1.0, beta=1.0), 0.0)


class SolveBvpTests(SimpleTestCase):

    def test_m1(self):
        record = solve_bvp(make_params(Family.TEMPERATURE, 1.0, 0.0), (-2.0, 0.0))
        self.assertAlmostEqual(record.free_value, -1.0, delta=1e-8)
        self.assertTrue(record.bounded)
        self.assertAlmostEqual(record.limit_lambda, 1.0, delta=1e-4)
        self.assertEqual(record.shape.value, Shape.CONCAVE)
        self.assertEqual(record.kind, RecordKind.ROOT)

    def test_m_third(self):
        record = solve_bvp(make_params(Family.TEMPERATURE, -1.0 / 3.0, 0.0), (-1.0, 1.0))
        self.assertAlmostEqual(record.free_value, 0.0, delta=1e-8)
        self.assertTrue(record.bounded)
        self.assertAlmostEqual(record.limit_lambda, math.sqrt(6.0), delta=1e-4)

    def test_flux_slope(self):
        params = make_params(Family.FLUX, -1.0, -2.0)
        record = solve_bvp(params, (0.2, 1.0))
        self.assertAlmostEqual(record.free_value, 0.5, delta=1e-7)
        self.assertTrue(record.bounded)
        self.assertTrue(verify_flux_slope_bound(SimpleNamespace(free_value=0.5), params))

    def test_bracket_ending_in_the_runaway_regime(self):
        record = solve_bvp(make_params(Family.TEMPERATURE, 1.0, 0.0), (-2.0, 2.0))
        self.assertAlmostEqual(record.free_value, -1.0, delta=1e-8)

    def test_bracket_without_sign_change(self):
        with self.assertRaises(NoSignChange):
            solve_bvp(make_params(Family.TEMPERATURE, 1.0, 0.0), (0.5, 1.0))


class FluxBoundTests(SimpleTestCase):

    def test_slope_bound(self):
        params = make_params(Family.FLUX, -1.5, -2.0)
        self.assertTrue(verify_flux_slope_bound(SimpleNamespace(free_value=1.2), params))
        self.assertFalse(verify_flux_slope_bound(SimpleNamespace(free_value=1.0 - 1e-6), params))

    def test_slope_bound_preconditions(self):
        for params in (make_params(Family.FLUX, -2.5, -2.0),
                       make_params(Family.FLUX, -1.5, 1.0),
                       make_params(Family.TEMPERATURE, -1.5, -2.0)):
            with self.assertRaises(PreconditionViolation):
                verify_flux_slope_bound(SimpleNamespace(free_value=1.0), params)

    def test_gamma_star_lower_bound(self):
        self.assertAlmostEqual(flux_gamma_star_lower_bound(-3.0), 2.0 ** (1.0 / 3.0), places=14)
        self.assertIsNone(flux_gamma_star_lower_bound(-2.0))


class ScanHelperTests(SimpleTestCase):

    def test_scan_grid_includes_both_ends(self):
        self.assertEqual(_scan_grid(0.0, 1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
        self.assertEqual(len(_scan_grid(-10.0, 10.0, 0.01)), 2001)

    def test_brackets_and_bands(self):
        points = [
            (0.0, ResidualOutcome.BLEW_UP_NEGATIVE, -3.0),
            (1.0, EVALUATED, -0.5),
            (2.0, EVALUATED, 0.2),
            (3.0, EVALUATED, 0.3),
            (4.0, INDETERMINATE, math.nan),
            (5.0, EVALUATED, 0.4),
            (6.0, ResidualOutcome.BLEW_UP_POSITIVE, 7.0),
        ]
        brackets, zeros, bands, signs = _brackets_and_bands(points, bc_tol=1e-6)
        self.assertEqual(brackets, [(1.0, 2.0)])
        self.assertEqual(zeros, [])
        self.assertEqual(bands, [[1.0], [2.0, 3.0, 5.0]])
        self.assertEqual(signs, [-1, 1])

    def test_near_zero_point_is_kept(self):
        points = [(0.0, EVALUATED, 0.1), (1.0, EVALUATED, 1e-8), (2.0, EVALUATED, 0.2)]
        brackets, zeros, bands, _ = _brackets_and_bands(points, bc_tol=1e-6)
        self.assertEqual(brackets, [])
        self.assertEqual(zeros, [1.0])
        self.assertEqual(bands, [[0.0], [2.0]])

    def test_representatives(self):
        values = [float(v) for v in range(10)]
        self.assertEqual(_representatives(values, 4), [0.0, 3.0, 6.0, 9.0])
        self.assertEqual(_representatives(values[:2], 4), [0.0, 1.0])
        self.assertEqual(_representatives(values, 0), [])

    def test_dedupe_prefers_roots(self):
        records = [_record(1.0, RecordKind.BAND_MEMBER), _record(1.0 + 1e-8), _record(2.0)]
        kept = _dedupe(records)
        self.assertEqual([r.free_value for r in kept], [1.0 + 1e-8, 2.0])
        self.assertEqual(kept[0].kind, RecordKind.ROOT)

    def test_parallel_map_in_process(self):
        self.assertEqual(parallel_map(abs, [-1, 2, -3], threads=1), [1, 2, 3])

    def test_scan_step_must_be_positive(self):
        with self.assertRaises(PreconditionViolation):
            scan_residuals(make_params(Family.TEMPERATURE, 1.0, 0.0), (0.0, 1.0), 0.0)


class CriticalGammaTests(SimpleTestCase):
    '''Bisection logic on a stubbed solvability predicate.'''

    def _critical(self, predicate, family=Family.FLUX, m=-3.0, bracket=(0.0, 10.0)):
        with mock.patch('shooting.utils.has_solution', side_effect=predicate):
            return critical_gamma(family, m, bracket, tol=1e-3)

    def test_solutions_above(self):
        result = self._critical(lambda params, **kwargs: params.gamma > 1.5)
        self.assertAlmostEqual(result.gamma_star, 1.5, delta=1e-3)
        self.assertLessEqual(result.bracket_width, 1e-3)
        self.assertEqual(result.side_with_solutions, Side.ABOVE)
        self.assertTrue(result.verified)
        self.assertAlmostEqual(result.lower_bound, 2.0 ** (1.0 / 3.0))

    def test_solutions_below(self):
        result = self._critical(lambda params, **kwargs: params.gamma < -4.0,
                                family=Family.TEMPERATURE, m=-0.75, bracket=(-20.0, 0.0))
        self.assertAlmostEqual(result.gamma_star, -4.0, delta=1e-3)
        self.assertEqual(result.side_with_solutions, Side.BELOW)
        self.assertIsNone(result.lower_bound)

    def test_same_status(self):
        with self.assertRaises(SameStatusAtEndpoints):
            self._critical(lambda params, **kwargs: True)


@tag('slow')
class EnumerateSolutionsTests(SimpleTestCase):

    def test_m1_root(self):
        records = enumerate_solutions(make_params(Family.TEMPERATURE, 1.0, 0.0),
                                      scan_range=(-1.55, -0.45), scan_step=0.1, threads=1)
        roots = [r for r in records if abs(r.free_value + 1.0) < 1e-6]
        self.assertEqual(len(roots), 1)
        self.assertTrue(roots[0].bounded)
        self.assertEqual(roots[0].kind, RecordKind.ROOT)

    def test_m_minus_one_has_no_solution(self):
        records = enumerate_solutions(make_params(Family.TEMPERATURE, -1.0, 0.0),
                                      scan_range=(-2.0, 2.0), scan_step=0.1, threads=1)
        self.assertEqual(records, [])


@tag('slow')
class ClassificationTests(SimpleTestCase):
    '''Existence, uniqueness and critical values over the default scans.'''

    def test_blasius_cases_are_unique(self):
        # beta = 0: temperature m = 0 and flux m = -1/2
        for params in (make_params(Family.TEMPERATURE, 0.0, 0.0), make_params(Family.FLUX, -0.5, 0.0)):
            with self.subTest(params=str(params)):
                records = enumerate_solutions(params, scan_step=0.05)
                self.assertEqual(len(records), 1)
                self.assertTrue(records[0].bounded)
                self.assertEqual(records[0].shape.value, Shape.CONCAVE)
                self.assertGreater(records[0].limit_lambda, 0.0)

    def test_uniqueness_sweep(self):
        points = [(Family.TEMPERATURE, m) for m in (0.0, 0.25, 0.5, 0.75, 1.0)]
        points += [(Family.FLUX, m) for m in (-0.5, 0.0, 0.5, 1.0)]
        for family, m in points:
            for gamma in (-1.0, 0.0, 1.0):
                with self.subTest(family=family, m=m, gamma=gamma):
                    records = enumerate_solutions(make_params(family, m, gamma), scan_step=0.05)
                    self.assertEqual(len(records), 1)
                    self.assertTrue(records[0].bounded)
                    self.assertEqual(records[0].shape.value, Shape.CONCAVE)

    def test_nonexistence(self):
        cases = [(-1.0, gamma) for gamma in (-5.0, 0.0, 5.0)] + [(-0.75, gamma) for gamma in (0.0, 1.0)]
        for m, gamma in cases:
            with self.subTest(m=m, gamma=gamma):
                self.assertEqual(enumerate_solutions(make_params(Family.TEMPERATURE, m, gamma)), [])

    def test_flux_m_minus_one_slope(self):
        for gamma in (-0.5, -1.0, -2.0, -4.0):
            with self.subTest(gamma=gamma):
                slope = -1.0 / gamma
                record = solve_bvp(make_params(Family.FLUX, -1.0, gamma), (0.5 * slope, 1.5 * slope))
                self.assertAlmostEqual(record.free_value, slope, delta=1e-5)
                self.assertTrue(record.bounded)

    def test_scan_reports_bands_of_unbounded_solutions(self):
        # above -1/gamma every flux m = -1 trajectory grows like t^(1/2)
        report = scan_solutions(make_params(Family.FLUX, -1.0, -2.0), scan_range=(0.1, 0.8),
                                scan_step=0.05)
        self.assertTrue(report.bands)
        self.assertTrue(all(band.residual_sign == 1 for band in report.bands))
        self.assertTrue(report.admissible_bands)
        self.assertTrue(any(not r.bounded for r in report.records))

    def test_flux_gamma_star_above_its_lower_bound(self):
        result = critical_gamma(Family.FLUX, -3.0, (0.0, 10.0), tol=1e-3, scan_step=0.05)
        self.assertGreater(result.gamma_star, 2.0 ** (1.0 / 3.0))
        self.assertLessEqual(result.bracket_width, 1e-3)
        self.assertEqual(result.side_with_solutions, Side.ABOVE)
