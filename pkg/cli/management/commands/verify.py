from exceptions import VerificationFailed
from cli.base import SimbvpCommand
from cli.serializers import VerifySerializer
from cli.utils import envelope, write_json, write_text
from cli.verification import run_all


class Command(SimbvpCommand):
    help = ("Run the property suites: closed forms, first integral, scaling covariance, "
            "phase-plane conjugacy, fixed points and the exponent fit. Exit 0 only if all pass.")
    config_serializer = VerifySerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--seed', type=int, help="Seed of the random instances")
        parser.add_argument('--instances', type=int, help="Random instances of the scaling suite")

    def run(self, config):
        results = run_all(seed=config['seed'], instances=config['instances'])
        if config['format'] == 'json':
            write_json(config, 'verify.json', envelope(
                'verify', seed=config['seed'], suites=[r.as_dict() for r in results]))
        else:
            lines = ['suite,passed,worst,threshold']
            lines += [f'{r.name},{r.passed},{r.worst:.17g},{r.threshold:.17g}' for r in results]
            write_text(config, 'verify.csv', '\n'.join(lines) + '\n')

        lines = [f"{r.name}: {'ok' if r.passed else 'FAILED'} (worst {r.worst:.3e}, "
                 f"threshold {r.threshold:g})" for r in results]
        failed = [r.name for r in results if not r.passed]
        if failed:
            raise VerificationFailed(f"{', '.join(failed)} failed\n" + '\n'.join(lines))
        return '\n'.join(lines)
