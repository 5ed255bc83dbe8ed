import json
import logging

from django.core.management.base import BaseCommand, CommandError

from exceptions import EXIT_OK, custom_exception_handler
from .utils import load_config, merge_options


logger = logging.getLogger(__name__)


class SimbvpCommand(BaseCommand):
    '''
    Base class of the simbvp management commands.

    Handles the shared flags (--config, --output-dir, --format, --threads),
    merges flags with the JSON config file, validates the result with
    `config_serializer` and turns any exception into a CommandError carrying
    the documented exit code:

        0 success, 1 usage error, 2 numerical failure, 3 no solution found.

    Subclasses implement add_command_arguments() and run(config).
    '''

    config_serializer = None
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--config', help="JSON file with option values (keys use underscores)")
        parser.add_argument('--output-dir', help="Directory for data files")
        parser.add_argument('--format', choices=['json', 'csv'], help="Record file format")
        parser.add_argument('--threads', type=int, help="Worker processes for scans and sweeps")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def resolve_config(self, options):
        '''Flag > config file > settings > built-in fallback, validated.'''
        serializer_class = self.config_serializer
        fields = list(serializer_class().fields)
        payload = merge_options(fields, options, load_config(options.get('config')))
        serializer = serializer_class(data=payload)
        serializer.is_valid(raise_exception=True)
        return dict(serializer.validated_data)

    def handle(self, *args, **options):
        try:
            config = self.resolve_config(options)
            summary = self.run(config)
        except Exception as exc:
            payload, code = custom_exception_handler(exc, {'command': self.command_name(),
                                                           'options': options})
            if code == EXIT_OK:
                return None
            raise CommandError(json.dumps(payload, sort_keys=True, default=str), returncode=code)
        if summary:
            self.stdout.write(summary)
        return None

    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def run(self, config):
        raise NotImplementedError


def add_problem_arguments(parser):
    parser.add_argument('--family', choices=['temperature', 'flux'])
    parser.add_argument('--m', type=float)
    parser.add_argument('--gamma', type=float)


def add_scan_arguments(parser):
    parser.add_argument('--scan-range', type=float, nargs=2, metavar=('LO', 'HI'))
    parser.add_argument('--scan-step', type=float)
    parser.add_argument('--bc-tol', type=float)
    parser.add_argument('--t-max', type=float)
    parser.add_argument('--rel-tol', type=float)
    parser.add_argument('--abs-tol', type=float)
    parser.add_argument('--bounded-only', dest='unbounded_ok', action='store_const', const=False,
                        help="Drop unbounded band members")
