from exceptions import NoSolutionFound
from integrator.utils import SIGN_DEAD_BAND, integrate
from phaseplane.models import PhaseState
from phaseplane.serializers import FixedPointSerializer, PhaseTrajectorySerializer
from phaseplane.utils import (default_window, fixed_points, integrate_phase, phase_to_csv,
                              sign_constant_intervals, to_phase, vector_field,
                              vector_field_to_csv)
from problems.utils import boundary_conditions
from shooting.utils import enumerate_solutions
from cli.base import SimbvpCommand, add_scan_arguments
from cli.serializers import PhaseSerializer
from cli.utils import envelope, horizon_from, scan_kwargs, write_json, write_text


def default_t_range(profile):
    '''The first sign-constant interval of f, stepped off the zeros of f at its ends.'''
    lo, hi = sign_constant_intervals(profile)[0]
    if abs(profile.at(lo)[0]) <= SIGN_DEAD_BAND:
        later = profile.t[profile.t > lo]
        lo = float(later[0]) if len(later) else lo
    if hi < profile.t_final:
        earlier = profile.t[(profile.t > lo) & (profile.t < hi)]
        hi = float(earlier[-1]) if len(earlier) else 0.5 * (lo + hi)
    return (lo, hi)


class Command(SimbvpCommand):
    help = ("Map a solution to the blowing-up coordinates (u, v) = (f'/f^2, f''/f^3) and "
            "report the fixed points of the planar system. Writes phase.csv (s,u,v), "
            "fixed_points.json and, with --grid N, vector_field.csv.")
    config_serializer = PhaseSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--family', choices=['temperature', 'flux', 'generic'])
        parser.add_argument('--m', type=float)
        parser.add_argument('--gamma', type=float)
        parser.add_argument('--alpha', type=float, help="generic family only")
        parser.add_argument('--beta', type=float, help="generic family only")
        parser.add_argument('--free-value', type=float,
                            help="f''(0) (temperature) or f'(0) (flux); the first solution found otherwise")
        parser.add_argument('--tau', type=float, help="Base point of s")
        parser.add_argument('--t-range', type=float, nargs=2, metavar=('LO', 'HI'))
        parser.add_argument('--start', type=float, nargs=2, metavar=('U', 'V'),
                            help="Integrate the planar system from this point instead")
        parser.add_argument('--s-span', type=float, nargs=2, metavar=('S0', 'S1'))
        parser.add_argument('--grid', type=int, help="Vector field on an N x N grid")
        add_scan_arguments(parser)

    def trajectory(self, config):
        params = config['params']
        if config['start'] is not None:
            s0, s1 = config['s_span']
            return integrate_phase(params.alpha, params.beta, PhaseState(s0, *config['start']),
                                   (s0, s1), rel_tol=config['rel_tol'], abs_tol=config['abs_tol'])

        horizon = horizon_from(config).resolved(params)
        if config['free_value'] is not None:
            initial = boundary_conditions(params, config['free_value']).initial_state()
            profile = integrate(horizon.spec_for(params, initial))
        else:
            records = enumerate_solutions(params, threads=config['threads'], **scan_kwargs(config))
            if not records:
                raise NoSolutionFound(f"{params}: no solution to map")
            profile = records[0].profile

        t_range = config['t_range'] or default_t_range(profile)
        return to_phase(profile, tau=config['tau'], t_range=t_range)

    def run(self, config):
        params = config['params']
        trajectory = self.trajectory(config)
        points = fixed_points(params.alpha, params.beta)
        context = {'alpha': params.alpha, 'beta': params.beta}

        write_text(config, 'phase.csv', phase_to_csv(trajectory))
        write_json(config, 'fixed_points.json', envelope(
            'phase',
            alpha=params.alpha,
            beta=params.beta,
            trajectory=PhaseTrajectorySerializer(trajectory).data,
            fixed_points=FixedPointSerializer(points, many=True, context=context).data,
        ))
        if config['grid']:
            u_range, v_range = default_window(points)
            write_text(config, 'vector_field.csv', vector_field_to_csv(
                vector_field(params.alpha, params.beta, u_range, v_range, config['grid'])))

        return '\n'.join(f"fixed point {p.location}: {p.classification}" for p in points)
