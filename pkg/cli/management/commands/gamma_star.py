from shooting.serializers import CriticalGammaSerializer
from shooting.utils import critical_gamma
from cli.base import SimbvpCommand, add_scan_arguments
from cli.serializers import GammaStarSerializer
from cli.utils import envelope, scan_kwargs, write_json, write_text


class Command(SimbvpCommand):
    help = ("Bisect on gamma for the critical value separating non-existence from "
            "existence of solutions.")
    config_serializer = GammaStarSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--family', choices=['temperature', 'flux'])
        parser.add_argument('--m', type=float)
        parser.add_argument('--bracket', type=float, nargs=2, metavar=('LO', 'HI'))
        parser.add_argument('--tol', type=float)
        add_scan_arguments(parser)

    def run(self, config):
        result = critical_gamma(config['family'], config['m'], config['bracket'],
                                tol=config['tol'], threads=config['threads'],
                                **scan_kwargs(config))
        data = CriticalGammaSerializer(result).data
        if config['format'] == 'json':
            write_json(config, 'gamma_star.json', envelope('gamma_star', result=data))
        else:
            header = ','.join(data)
            row = ','.join('' if v is None else (f'{v:.17g}' if isinstance(v, float) else str(v))
                           for v in data.values())
            write_text(config, 'gamma_star.csv', f'{header}\n{row}\n')

        summary = (f"gamma* = {result.gamma_star:.6g} (bracket width {result.bracket_width:.2e}), "
                   f"solutions {str(result.side_with_solutions).lower()}, "
                   f"verified={result.verified}")
        if result.lower_bound is not None:
            summary += f", known lower bound {result.lower_bound:.6g}"
        return summary
