import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag
from rest_framework import serializers

from classify.models import AtlasEntry, Outcome
from exceptions import EXIT_NO_SOLUTION, EXIT_USAGE
from problems.models import Family
from problems.utils import closed_form_m1, make_params
from shooting.models import Band, CriticalGamma, ScanReport, Side
from shooting.utils import solve_bvp
from .figures import FIGURES
from .management.commands.solve import Command as SolveCommand
from .serializers import PhaseSerializer, SolveSerializer, SweepSerializer
from .utils import load_config, merge_options, records_to_csv
from .verification import closed_form_suite, exponent_suite, fixed_point_suite


class OutputDirMixin:
    '''A fresh output directory per test.'''

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.output_dir = Path(self._tmp.name)
        self.addCleanup(self._tmp.cleanup)

    def run_command(self, name, *args):
        stdout = StringIO()
        call_command(name, *args, '--output-dir', str(self.output_dir), stdout=stdout)
        return stdout.getvalue()

    def write_config(self, values):
        path = self.output_dir / 'config.json'
        path.write_text(json.dumps(values), encoding='utf-8')
        return str(path)


class ConfigTests(OutputDirMixin, SimpleTestCase):

    def test_flag_beats_file(self):
        merged = merge_options(['m', 'gamma', 'family'], {'m': 2.0, 'gamma': None},
                               {'m': 1.0, 'gamma': 3.0})
        self.assertEqual(merged, {'m': 2.0, 'gamma': 3.0})

    def test_unknown_key(self):
        with self.assertRaises(serializers.ValidationError):
            merge_options(['m'], {}, {'m': 1.0, 'gama': 2.0})

    def test_unreadable_config(self):
        with self.assertRaises(serializers.ValidationError):
            load_config(str(self.output_dir / 'missing.json'))
        path = self.output_dir / 'list.json'
        path.write_text('[1, 2]', encoding='utf-8')
        with self.assertRaises(serializers.ValidationError):
            load_config(str(path))
        self.assertEqual(load_config(None), {})

    def test_resolved_config(self):
        path = self.write_config({'family': 'temperature', 'm': 3.0, 'gamma': 2.0, 'scan_step': 0.5})
        config = SolveCommand().resolve_config({'config': path, 'm': 1.0})
        self.assertEqual((config['params'].m, config['params'].gamma), (1.0, 2.0))
        self.assertEqual(config['scan_step'], 0.5)
        self.assertIsNone(config['bc_tol'])
        self.assertEqual(config['format'], 'json')


class SerializerTests(SimpleTestCase):

    def test_solve(self):
        self.assertFalse(SolveSerializer(data={'m': 1.0}).is_valid())
        serializer = SolveSerializer(data={'family': 'flux', 'm': 1.0, 'scan_range': [1.0, 0.0]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('scan_range', serializer.errors)
        serializer = SolveSerializer(data={'family': 'flux', 'm': 1.0, 'scan_step': 0.0})
        self.assertFalse(serializer.is_valid())
        serializer = SolveSerializer(data={'family': 'flux', 'm': -1.0, 'gamma': -2.0,
                                           'bracket': [0.2, 1.0]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['bracket'], (0.2, 1.0))
        self.assertEqual(serializer.validated_data['params'].alpha, 1.0)

    def test_sweep_grid_must_be_sorted(self):
        serializer = SweepSerializer(data={'family': 'temperature', 'm_grid': [1.0, 0.0],
                                           'gamma_grid': [0.0]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('m_grid', serializer.errors)

    def test_phase(self):
        serializer = PhaseSerializer(data={'family': 'generic', 'alpha': 1.0, 'beta': 1.0})
        self.assertFalse(serializer.is_valid())
        self.assertIn('start', serializer.errors)
        serializer = PhaseSerializer(data={'family': 'generic', 'alpha': 1.0, 'beta': 1.0,
                                           'start': [0.1, 0.1]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('s_span', serializer.errors)
        serializer = PhaseSerializer(data={'family': 'temperature', 'm': 1.0, 'gamma': 5.0})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['params'].family, Family.TEMPERATURE)

    def test_records_to_csv(self):
        row = {'family': 'temperature', 'm': 1.0, 'gamma': 0.0, 'free_value': -1.0,
               'bounded': True, 'lambda': None, 'shape': 'Concave', 'growth_exponent': None,
               'decay_exponent': None, 'termination': 'ReachedTmax', 'kind': 'root',
               'residual': 0.5}
        lines = records_to_csv([row]).splitlines()
        self.assertTrue(lines[0].startswith('family,m,gamma,free_value'))
        self.assertEqual(lines[1], 'temperature,1,0,-1,True,,Concave,,,ReachedTmax,root,0.5')


class SolveCommandTests(OutputDirMixin, SimpleTestCase):

    def test_bracket(self):
        out = self.run_command('solve', '--family', 'temperature', '--m', '1', '--gamma', '0',
                               '--bracket', '-2', '0')
        self.assertIn("root free_value=", out)
        payload = json.loads((self.output_dir / 'solve.json').read_text())
        self.assertEqual(payload['spec_version'], '1')
        self.assertEqual(payload['command'], 'solve')
        self.assertAlmostEqual(payload['records'][0]['free_value'], -1.0, delta=1e-8)
        self.assertTrue(payload['records'][0]['bounded'])
        header = (self.output_dir / 'solve_000.csv').read_text().splitlines()[0]
        self.assertEqual(header, 't,f,fp,fpp')

    def test_output_is_byte_stable(self):
        args = ('--family', 'flux', '--m', '-1', '--gamma', '-2', '--bracket', '0.2', '1')
        self.run_command('solve', *args)
        first = (self.output_dir / 'solve.json').read_bytes()
        self.run_command('solve', *args)
        self.assertEqual((self.output_dir / 'solve.json').read_bytes(), first)

    def test_csv_format(self):
        self.run_command('solve', '--family', 'flux', '--m', '-1', '--gamma', '-2',
                         '--bracket', '0.2', '1', '--format', 'csv')
        lines = (self.output_dir / 'solve.csv').read_text().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertFalse((self.output_dir / 'solve.json').exists())

    def test_no_solution_exits_3(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('solve', '--family', 'temperature', '--m', '1', '--bracket', '0.5', '1')
        self.assertEqual(caught.exception.returncode, EXIT_NO_SOLUTION)
        payload = json.loads(str(caught.exception))
        self.assertEqual(payload['status'], 'error')
        self.assertEqual(payload['message'], 'No solution found in range')

    def test_scan_writes_bands_and_shapes(self):
        params = make_params(Family.TEMPERATURE, 1.0, 0.0)
        report = ScanReport(params, records=[solve_bvp(params, (-2.0, 0.0))],
                            bands=[Band(-1.5, -1.1, -1, 5)], n_points=12)
        with mock.patch('cli.management.commands.solve.scan_solutions', return_value=report):
            self.run_command('solve', '--family', 'temperature', '--m', '1', '--gamma', '0')
        payload = json.loads((self.output_dir / 'solve.json').read_text())
        self.assertEqual(payload['bands'], [{'lo': -1.5, 'hi': -1.1, 'residual_sign': -1,
                                             'n_points': 5}])
        self.assertEqual(payload['shapes']['Concave'], 1)
        self.assertEqual(sum(payload['shapes'].values()), 1)

    def test_bracket_has_no_bands(self):
        self.run_command('solve', '--family', 'flux', '--m', '-1', '--gamma', '-2',
                         '--bracket', '0.2', '1')
        payload = json.loads((self.output_dir / 'solve.json').read_text())
        self.assertNotIn('bands', payload)
        self.assertEqual(sum(payload['shapes'].values()), 1)

    def test_usage_error_exits_1(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('solve', '--family', 'temperature')
        self.assertEqual(caught.exception.returncode, EXIT_USAGE)
        self.assertIn('m', json.loads(str(caught.exception))['errors'])

    def test_unknown_config_key_exits_1(self):
        path = self.write_config({'family': 'temperature', 'm': 1.0, 'gama': 0.0})
        with self.assertRaises(CommandError) as caught:
            self.run_command('solve', '--config', path)
        self.assertEqual(caught.exception.returncode, EXIT_USAGE)


class PhaseCommandTests(OutputDirMixin, SimpleTestCase):

    def test_planar_start(self):
        self.run_command('phase', '--family', 'generic', '--alpha', '1', '--beta', '1',
                         '--start', '0.1', '0.1', '--s-span', '0', '1', '--grid', '3')
        self.assertEqual((self.output_dir / 'phase.csv').read_text().splitlines()[0], 's,u,v')
        payload = json.loads((self.output_dir / 'fixed_points.json').read_text())
        self.assertEqual(len(payload['fixed_points']), 2)
        self.assertEqual(payload['trajectory']['s_range'], [0.0, 1.0])
        self.assertEqual(len((self.output_dir / 'vector_field.csv').read_text().splitlines()), 10)

    def test_closed_form_image(self):
        c = closed_form_m1(5.0).derived_constants['c']
        self.run_command('phase', '--family', 'temperature', '--m', '1', '--gamma', '5',
                         '--free-value', repr(-c), '--t-max', '10')
        payload = json.loads((self.output_dir / 'fixed_points.json').read_text())
        self.assertEqual(payload['alpha'], 1.0)
        self.assertEqual(payload['fixed_points'][0]['classification'], 'Degenerate')


    def test_default_range_stops_before_a_zero_of_f(self):
        # f(0) = -5 and f turns positive before t = 20
        c = closed_form_m1(5.0).derived_constants['c']
        self.run_command('phase', '--family', 'temperature', '--m', '1', '--gamma', '5',
                         '--free-value', repr(-c), '--t-max', '20')
        payload = json.loads((self.output_dir / 'fixed_points.json').read_text())
        s_lo, s_hi = payload['trajectory']['s_range']
        self.assertLess(s_lo, s_hi)
        self.assertGreater(payload['trajectory']['n_samples'], 2)


class GammaStarCommandTests(OutputDirMixin, SimpleTestCase):

    def test_csv_record(self):
        result = CriticalGamma(m=-3.0, family=Family.FLUX, gamma_star=1.5, bracket_width=0.5,
                               side_with_solutions=Side.ABOVE, verified=True,
                               lower_bound=2.0 ** (1.0 / 3.0))
        with mock.patch('cli.management.commands.gamma_star.critical_gamma', return_value=result):
            out = self.run_command('gamma_star', '--family', 'flux', '--m', '-3', '--format', 'csv')
        self.assertIn('solutions above', out)
        header, row = (self.output_dir / 'gamma_star.csv').read_text().splitlines()
        self.assertEqual(header, 'family,m,gamma_star,bracket_width,side_with_solutions,'
                                 'verified,lower_bound')
        self.assertTrue(row.startswith('flux,-3,1.5,0.5,Above,True,1.25992'))


class AtlasCommandTests(OutputDirMixin, TestCase):

    def test_sweep_store_then_query(self):
        entries = [
            AtlasEntry(family='temperature', m=1.0, gamma=0.0, outcome=Outcome.UNIQUE,
                       n_solutions=1, n_bounded=1),
            AtlasEntry(family='temperature', m=-1.0, gamma=0.0, outcome=Outcome.NO_SOLUTION),
        ]
        with mock.patch('cli.management.commands.sweep.build_atlas', return_value=entries):
            self.run_command('sweep', '--family', 'temperature', '--m-grid', '-1', '1',
                             '--gamma-grid', '0', '--store')
        self.assertEqual(AtlasEntry.objects.count(), 2)
        self.assertEqual((self.output_dir / 'atlas.csv').read_text().splitlines()[0],
                         'family,m,gamma,outcome,n_bounded,n_unbounded')
        self.assertTrue((self.output_dir / 'atlas.jsonl').exists())

        out = self.run_command('atlas', '--outcome', 'Unique', '--format', 'csv')
        self.assertIn('Unique', out)
        lines = (self.output_dir / 'atlas_query.csv').read_text().splitlines()
        self.assertEqual(lines[1:], ['temperature,1,0,Unique,1,0'])

    def test_bad_filter_exits_1(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('atlas', '--outcome', 'Plenty')
        self.assertEqual(caught.exception.returncode, EXIT_USAGE)


class VerificationSuiteTests(SimpleTestCase):

    def test_fast_suites(self):
        self.assertTrue(fixed_point_suite(np.random.default_rng(0), instances=20).passed)
        self.assertTrue(exponent_suite().passed)

    def test_closed_form_suite(self):
        result = closed_form_suite()
        self.assertTrue(result.passed, result.details)
        self.assertEqual(set(result.details), {'m1_gamma0', 'm1_gamma5', 'm_third_gamma0',
                                               'm_third_gamma2'})


@tag('slow')
class VerifyCommandTests(OutputDirMixin, SimpleTestCase):

    def test_all_suites_pass(self):
        out = self.run_command('verify', '--instances', '5')
        self.assertNotIn('FAILED', out)
        payload = json.loads((self.output_dir / 'verify.json').read_text())
        self.assertEqual(len(payload['suites']), 6)
        self.assertTrue(all(s['passed'] for s in payload['suites']))


@tag('slow')
class FiguresCommandTests(OutputDirMixin, SimpleTestCase):

    def test_published_solution_sets(self):
        self.run_command('figures', '--fig', *[str(k) for k in sorted(FIGURES)])
        for fig_id in sorted(FIGURES):
            with self.subTest(fig=fig_id):
                payload = json.loads((self.output_dir / f'fig{fig_id}.json').read_text())
                self.assertTrue(payload['gate_passed'], payload['findings'])
                self.assertEqual(len(payload['curves']), payload['counts']['n_curves'])
                self.assertEqual(sum(payload['shapes'].values()), payload['counts']['n_curves'])
                for curve in payload['curves']:
                    self.assertTrue((self.output_dir / curve['file']).exists())

    def test_counts(self):
        self.run_command('figures', '--fig', '1', '3')
        fig1 = json.loads((self.output_dir / 'fig1.json').read_text())['counts']
        self.assertGreaterEqual(fig1['n_curves'], 5)
        self.assertEqual(fig1['n_lambda_negative'], 2)
        fig3 = json.loads((self.output_dir / 'fig3.json').read_text())['counts']
        self.assertEqual((fig3['n_curves'], fig3['n_concave'], fig3['n_bounded']), (1, 1, 1))


@tag('slow')
class NonexistenceCommandTests(OutputDirMixin, SimpleTestCase):

    def test_no_solution_over_the_default_scan_exits_3(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('solve', '--family', 'temperature', '--m', '-0.75', '--gamma', '1')
        self.assertEqual(caught.exception.returncode, EXIT_NO_SOLUTION)
