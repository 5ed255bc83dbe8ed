import logging

from django.conf import settings

from classify.utils import expected_exponent, fit_asymptotic_exponent, is_unbounded_candidate
from exceptions import FitRejected, NoSolutionFound
from shooting.models import ResidualOutcome
from shooting.serializers import AsymptoticFitSerializer
from shooting.utils import enumerate_solutions, evaluate_residual
from cli.base import SimbvpCommand, add_problem_arguments, add_scan_arguments
from cli.serializers import AsymptoteSerializer
from cli.utils import envelope, horizon_from, scan_kwargs, write_json, write_text


logger = logging.getLogger(__name__)


class Command(SimbvpCommand):
    help = ("Fit |f| ~ c t^p to unbounded solutions on the long horizon and compare p "
            "with alpha / (alpha - beta).")
    config_serializer = AsymptoteSerializer

    def add_command_arguments(self, parser):
        add_problem_arguments(parser)
        parser.add_argument('--free-value', type=float,
                            help="Fit this trajectory instead of scanning for unbounded solutions")
        parser.add_argument('--min-r-squared', type=float)
        add_scan_arguments(parser)

    def run(self, config):
        params = config['params']
        horizon = horizon_from(config).resolved(params)
        long_horizon = horizon.with_horizon(horizon.t_max * settings.ASYMPTOTIC_HORIZON_FACTOR)
        expected = expected_exponent(params.alpha, params.beta)

        if config['free_value'] is not None:
            free_values = [config['free_value']]
        else:
            records = enumerate_solutions(params, threads=config['threads'], **scan_kwargs(config))
            free_values = [r.free_value for r in records if not r.bounded]
        if not free_values:
            raise NoSolutionFound(f"{params}: no unbounded solution to fit")

        fits, rejected = [], []
        for free_value in free_values:
            r = evaluate_residual(params, free_value, long_horizon, keep_profile=True,
                                  bc_tol=config['bc_tol'])
            if r.outcome != ResidualOutcome.EVALUATED:
                rejected.append({'free_value': free_value, 'reason': str(r.outcome)})
                continue
            try:
                fit = fit_asymptotic_exponent(r.profile, min_r_squared=config['min_r_squared'])
            except FitRejected as exc:
                logger.warning(f'{params}, free value {free_value:.10g}: {exc}')
                rejected.append({'free_value': free_value, 'reason': f'{exc.message}: {exc}'})
                continue
            fits.append({
                'free_value': free_value,
                'unbounded_candidate': is_unbounded_candidate(r.profile),
                'relative_error': (abs(fit.exponent - expected) / abs(expected)
                                   if expected else None),
                **AsymptoticFitSerializer(fit).data,
            })

        payload = envelope('asymptote', family=str(params.family), m=params.m, gamma=params.gamma,
                           t_max=long_horizon.t_max, expected_exponent=expected,
                           fits=fits, rejected=rejected)
        if config['format'] == 'json':
            write_json(config, 'asymptote.json', payload)
        else:
            lines = ['free_value,exponent,c_constant,r_squared,expected_exponent,relative_error']
            lines += [f"{f['free_value']:.17g},{f['exponent']:.17g},{f['c_constant']:.17g},"
                      f"{f['r_squared']:.17g},{expected!r},{f['relative_error']!r}" for f in fits]
            write_text(config, 'asymptote.csv', '\n'.join(lines) + '\n')

        if not fits:
            raise FitRejected(f"{params}: no trajectory gave an accepted power law ({rejected})")
        return '\n'.join(f"free_value={f['free_value']:.10g} exponent={f['exponent']:.6g} "
                         f"expected={expected!r} r2={f['r_squared']:.6f}" for f in fits)
