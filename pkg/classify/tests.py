import math
from types import SimpleNamespace
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, TestCase, tag

from cli.verification import power_law_profile
from exceptions import (NoSignChange, PoorFit, PreconditionViolation, RefusesBlowUpProfile,
                        WindowTooShort)
from integrator.models import Profile, Termination
from integrator.utils import integrate, make_spec
from problems.models import Family
from problems.utils import closed_form_m_third, make_params
from shooting.models import ScanReport, SolutionRecord
from shooting.utils import enumerate_solutions
from .atlas import build_atlas
from .models import AtlasEntry, Boundedness, Outcome, Shape, ShapeClass
from .serializers import ATLAS_CSV_HEADER, AtlasEntrySerializer, atlas_to_csv, atlas_to_jsonl
from .utils import (AtlasEntryFilter, atlas_outcome, check_lambda_limits, classify_asymptotics,
                    classify_shape, expected_exponent, fit_asymptotic_exponent,
                    monotonicity_findings)


TIGHT = {'rel_tol': 1e-10, 'abs_tol': 1e-12}
GENERIC = make_params(Family.GENERIC, alpha=1.0, beta=1.0)


def fpp_profile(fpp, termination=Termination.REACHED_TMAX):
    '''A profile carrying only a prescribed f'' column.'''
    fpp = np.asarray(fpp, dtype=float)
    t = np.arange(len(fpp), dtype=float)
    y = np.column_stack([np.ones_like(t), np.zeros_like(t), fpp])
    return Profile(t=t, y=y, dydt=np.zeros_like(y), termination=termination, params=GENERIC)


def m1_profile(t_max=50.0):
    params = make_params(Family.TEMPERATURE, 1.0, 0.0)
    return integrate(make_spec(params, (0.0, 1.0, -1.0), t_max=t_max, **TIGHT))


def summary(bounded=True, limit_lambda=0.0, shape=Shape.CONCAVE):
    return SimpleNamespace(bounded=bounded, limit_lambda=limit_lambda, shape=ShapeClass(shape))


class ShapeTests(SimpleTestCase):

    def test_closed_forms(self):
        self.assertEqual(classify_shape(m1_profile(), noise_floor=1e-9), ShapeClass(Shape.CONCAVE))
        solution = closed_form_m_third(2.0)
        params = make_params(Family.TEMPERATURE, -1.0 / 3.0, 2.0)
        profile = integrate(make_spec(params, solution.state(0.0), t_max=30.0, **TIGHT))
        shape = classify_shape(profile, noise_floor=1e-9)
        self.assertEqual(shape.value, Shape.CONVEX_CONCAVE)
        self.assertEqual(shape.sign_changes, 1)

    def test_sign_patterns(self):
        self.assertEqual(classify_shape(fpp_profile([1, 2, 1])).value, Shape.CONVEX)
        self.assertEqual(classify_shape(fpp_profile([-1, 0, 1])).value, Shape.CONCAVE_CONVEX)
        mixed = classify_shape(fpp_profile([-1, 1, 2, -1]))
        self.assertEqual(str(mixed), 'Mixed(2)')

    def test_dead_band_and_noise_floor(self):
        self.assertEqual(classify_shape(fpp_profile([-1, 1e-13, -1])).value, Shape.CONCAVE)
        self.assertEqual(classify_shape(fpp_profile([-1, 1e-10, -1]), noise_floor=1e-9).value,
                         Shape.CONCAVE)
        degenerate = classify_shape(fpp_profile([0, 0, 0]))
        self.assertTrue(degenerate.degenerate)
        self.assertEqual(str(degenerate), 'Concave')

    def test_refuses_blow_up(self):
        with self.assertRaises(RefusesBlowUpProfile):
            classify_shape(fpp_profile([1, 2], termination=Termination.BLOW_UP))


class AsymptoticFitTests(SimpleTestCase):

    def test_expected_exponent(self):
        self.assertIsNone(expected_exponent(1.0, 1.0))
        self.assertEqual(expected_exponent(1.0, 0.5), 2.0)
        self.assertEqual(expected_exponent(1.0, -1.0), 0.5)

    def test_recovers_power_law(self):
        fit = fit_asymptotic_exponent(power_law_profile(0.3))
        self.assertAlmostEqual(fit.exponent, 0.3, delta=1e-6)
        self.assertAlmostEqual(fit.c_constant, 1.0, delta=1e-5)
        self.assertGreater(fit.r_squared, 0.999999)
        self.assertEqual(fit.fit_window, (100.0, 1000.0))

    def test_window_too_short(self):
        with self.assertRaises(WindowTooShort):
            fit_asymptotic_exponent(power_law_profile(0.3, n=30))

    def test_poor_fit(self):
        t = np.concatenate([[0.0], np.geomspace(1e-3, 1000.0, 3000)])
        f = t ** 0.3 * (2.0 + np.sin(t))
        y = np.column_stack([f, np.zeros_like(t), np.zeros_like(t)])
        profile = Profile(t=t, y=y, dydt=np.zeros_like(y), termination=Termination.REACHED_TMAX,
                          params=GENERIC)
        with self.assertRaises(PoorFit) as caught:
            fit_asymptotic_exponent(profile)
        self.assertLess(caught.exception.r_squared, 0.999)

    def test_refuses_blow_up(self):
        profile = fpp_profile([1, 2], termination=Termination.BLOW_UP)
        with self.assertRaises(RefusesBlowUpProfile):
            fit_asymptotic_exponent(profile)


class BoundednessLadderTests(SimpleTestCase):

    def test_settled_profile(self):
        verdict = classify_asymptotics(m1_profile())
        self.assertEqual(verdict.status, Boundedness.BOUNDED)
        self.assertAlmostEqual(verdict.limit_lambda, 1.0, delta=1e-6)
        self.assertTrue(verdict.bounded)

    def test_small_limit_reported_as_zero(self):
        profile = integrate(make_spec(GENERIC, (1e-4, 0.0, 0.0), t_max=10.0))
        verdict = classify_asymptotics(profile)
        self.assertEqual(verdict.status, Boundedness.BOUNDED)
        self.assertEqual(verdict.limit_lambda, 0.0)

    def test_decaying(self):
        verdict = classify_asymptotics(power_law_profile(-0.5))
        self.assertEqual(verdict.status, Boundedness.DECAYING)
        self.assertEqual(verdict.limit_lambda, 0.0)
        self.assertAlmostEqual(verdict.decay_exponent, -0.5, delta=1e-6)
        self.assertTrue(verdict.bounded)

    def test_unbounded(self):
        verdict = classify_asymptotics(power_law_profile(0.3))
        self.assertEqual(verdict.status, Boundedness.UNBOUNDED)
        self.assertAlmostEqual(verdict.growth_exponent, 0.3, delta=1e-6)
        self.assertFalse(verdict.bounded)
        self.assertTrue(verdict.admissible)

    def test_fast_growth_is_indeterminate(self):
        verdict = classify_asymptotics(power_law_profile(1.5))
        self.assertEqual(verdict.status, Boundedness.INDETERMINATE)
        self.assertFalse(verdict.admissible)

    def test_blow_up_is_indeterminate(self):
        verdict = classify_asymptotics(fpp_profile([1, 2], termination=Termination.BLOW_UP))
        self.assertEqual(verdict.status, Boundedness.INDETERMINATE)


@tag('slow')
class GrowthLawTests(SimpleTestCase):
    '''Unbounded solutions grow like t^(alpha / (alpha - beta)).'''

    def assert_growth(self, params, scan_range, expected):
        records = enumerate_solutions(params, scan_range=scan_range, scan_step=0.05)
        unbounded = [r for r in records if not r.bounded]
        self.assertTrue(unbounded)
        self.assertAlmostEqual(expected_exponent(params.alpha, params.beta), expected, places=12)
        for record in unbounded:
            with self.subTest(free_value=record.free_value):
                self.assertAlmostEqual(record.growth_exponent, expected, delta=0.05 * expected)

    def test_temperature(self):
        # alpha = 1/8, beta = -3/4
        self.assert_growth(make_params(Family.TEMPERATURE, -0.75, -10.0), (-10.0, 10.0), 1.0 / 7.0)

    def test_flux(self):
        # alpha = 1/2, beta = -2; f'(0) >= 0.2 on every solution
        self.assert_growth(make_params(Family.FLUX, -1.5, -10.0), (0.0, 5.0), 0.2)


class LambdaLimitTests(SimpleTestCase):

    def test_two_negative_limits_above_gamma_star(self):
        records = [summary(limit_lambda=-1.0), summary(limit_lambda=-0.2)] + [summary()] * 3
        report = check_lambda_limits(records, Family.TEMPERATURE, -2.0, gamma=5.0)
        self.assertTrue(report.ok)
        self.assertEqual((report.n_negative, report.n_zero, report.n_positive), (2, 3, 0))

    def test_missing_negative_limit(self):
        records = [summary(limit_lambda=-1.0)] + [summary()] * 3
        report = check_lambda_limits(records, Family.TEMPERATURE, -2.0, gamma=5.0)
        self.assertFalse(report.ok)
        report = check_lambda_limits(records[:1], Family.TEMPERATURE, -2.0, gamma=1.0, gamma_star=2.0)
        self.assertTrue(report.ok)

    def test_concave_convex_positive_limit(self):
        records = [summary(limit_lambda=0.8, shape=Shape.CONCAVE_CONVEX),
                   summary(limit_lambda=0.0, shape=Shape.CONCAVE)]
        self.assertTrue(check_lambda_limits(records, Family.TEMPERATURE, 1.1).ok)
        self.assertFalse(check_lambda_limits(records[1:], Family.TEMPERATURE, 1.1).ok)

    def test_monotonicity(self):
        profile = SimpleNamespace(f=np.array([-1.0, -0.5, 0.2]), fp=np.array([1.0, -0.1, 0.0]))
        record = SimpleNamespace(free_value=0.3, bounded=True, profile=profile)
        self.assertEqual(len(monotonicity_findings([record], Family.TEMPERATURE, 0.5)), 1)
        self.assertEqual(len(monotonicity_findings([record], Family.TEMPERATURE, -2.0)), 1)
        self.assertEqual(monotonicity_findings([record], Family.TEMPERATURE, 2.0), [])


class AtlasOutcomeTests(SimpleTestCase):

    def test_outcomes(self):
        self.assertEqual(atlas_outcome(0, False), Outcome.NO_SOLUTION)
        self.assertEqual(atlas_outcome(1, False), Outcome.UNIQUE)
        self.assertEqual(atlas_outcome(3, False), Outcome.FINITE_MULTIPLE)
        self.assertEqual(atlas_outcome(3, True), Outcome.BAND_OF_SOLUTIONS)


class BuildAtlasTests(SimpleTestCase):

    def test_grid_validation(self):
        for grid in ([], [0.0, math.nan], [1.0, 0.0]):
            with self.assertRaises(PreconditionViolation):
                build_atlas(Family.TEMPERATURE, grid, [0.0], threads=1)

    def test_points_in_m_major_order(self):
        profile = m1_profile()

        def scan(params, **kwargs):
            if params.gamma > 0:
                raise NoSignChange("no root")
            records = []
            if params.m == 1.0:
                records.append(SolutionRecord(params=params, free_value=-1.0, profile=profile,
                                              bounded=True, shape=ShapeClass(Shape.CONCAVE),
                                              limit_lambda=1.0))
            return ScanReport(params, records=records)

        with mock.patch('classify.atlas.scan_solutions', side_effect=scan):
            entries = build_atlas(Family.TEMPERATURE, [0.5, 1.0], [0.0, 1.0], threads=1)

        self.assertEqual([(e.m, e.gamma) for e in entries],
                         [(0.5, 0.0), (0.5, 1.0), (1.0, 0.0), (1.0, 1.0)])
        self.assertEqual(entries[0].outcome, Outcome.NO_SOLUTION)
        self.assertEqual(entries[1].outcome, Outcome.FAILED)
        self.assertIn('no root', entries[1].failure)
        self.assertEqual(entries[2].outcome, Outcome.UNIQUE)
        self.assertEqual(entries[2].n_bounded, 1)
        self.assertEqual(entries[2].records[0]['free_value'], -1.0)
        self.assertIsNone(entries[2].pk)


class AtlasStoreTests(TestCase):

    @classmethod
    def setUpTestData(cls):
        AtlasEntry.objects.create(family='temperature', m=-2.0, gamma=5.0,
                                  outcome=Outcome.FINITE_MULTIPLE, n_solutions=5, n_bounded=5)
        AtlasEntry.objects.create(family='temperature', m=1.0, gamma=0.0,
                                  outcome=Outcome.UNIQUE, n_solutions=1, n_bounded=1)
        AtlasEntry.objects.create(family='flux', m=-1.0, gamma=-2.0,
                                  outcome=Outcome.UNIQUE, n_solutions=1, n_bounded=1)

    def test_filter(self):
        qs = AtlasEntryFilter({'family': 'temperature', 'm_min': 0}, queryset=AtlasEntry.objects.all()).qs
        self.assertEqual([(e.m, e.gamma) for e in qs], [(1.0, 0.0)])
        qs = AtlasEntryFilter({'outcome': 'Unique'}, queryset=AtlasEntry.objects.all()).qs
        self.assertEqual(qs.count(), 2)
        qs = AtlasEntryFilter({'gamma_max': 0}, queryset=AtlasEntry.objects.all()).qs
        self.assertEqual([e.family for e in qs], ['flux', 'temperature'])

    def test_labels_and_exports(self):
        entries = list(AtlasEntry.objects.filter(family='temperature'))
        self.assertEqual(str(entries[0]), 'temperature(m=-2, gamma=5): FiniteMultiple(5)')
        lines = atlas_to_csv(entries).splitlines()
        self.assertEqual(lines[0], ATLAS_CSV_HEADER)
        self.assertEqual(lines[1], 'temperature,-2,5,FiniteMultiple(5),5,0')
        rows = atlas_to_jsonl(entries, '1').splitlines()
        self.assertEqual(len(rows), 2)
        self.assertIn('"spec_version": "1"', rows[0])
        self.assertNotIn('created', rows[0])

    def test_serializer_checks_counts(self):
        data = {'family': 'flux', 'm': 0.0, 'gamma': 0.0, 'outcome': 'Unique',
                'n_solutions': 1, 'n_bounded': 0, 'n_unbounded': 0, 'records': []}
        serializer = AtlasEntrySerializer(data=data)
        self.assertFalse(serializer.is_valid())
        data['n_bounded'] = 1
        serializer = AtlasEntrySerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        entry = serializer.save()
        self.assertEqual(entry.outcome_label, 'Unique')
