from exceptions import NoSignChange, NoSolutionFound
from integrator.utils import profile_to_csv
from shooting.serializers import BandSerializer, SolutionRecordSerializer, shape_counts
from shooting.utils import scan_solutions, solve_bvp
from cli.base import SimbvpCommand, add_problem_arguments, add_scan_arguments
from cli.serializers import SolveSerializer
from cli.utils import (envelope, horizon_from, records_to_csv, scan_kwargs,
                       write_json, write_text)


class Command(SimbvpCommand):
    help = ("Solve one boundary value problem: refine --bracket, or scan the free value "
            "and refine every root found. Exit 3 when there is none.")
    config_serializer = SolveSerializer

    def add_command_arguments(self, parser):
        add_problem_arguments(parser)
        parser.add_argument('--bracket', type=float, nargs=2, metavar=('LO', 'HI'))
        add_scan_arguments(parser)

    def run(self, config):
        params = config['params']
        bands = None
        if config['bracket'] is not None:
            try:
                records = [solve_bvp(params, config['bracket'], bc_tol=config['bc_tol'],
                                     horizon=horizon_from(config))]
            except NoSignChange as exc:
                raise NoSolutionFound(str(exc))
        else:
            report = scan_solutions(params, threads=config['threads'], **scan_kwargs(config))
            records = report.records
            bands = BandSerializer(report.bands, many=True).data
        if not records:
            raise NoSolutionFound(f"{params}: no solution in the scanned range")

        rows = SolutionRecordSerializer(records, many=True).data
        for k, record in enumerate(records):
            write_text(config, f'solve_{k:03d}.csv', profile_to_csv(record.profile))
        if config['format'] == 'json':
            extra = {} if bands is None else {'bands': bands}
            write_json(config, 'solve.json', envelope('solve', records=rows,
                                                     shapes=shape_counts(records), **extra))
        else:
            write_text(config, 'solve.csv', records_to_csv(rows))

        return '\n'.join(f"{r['kind']} free_value={r['free_value']:.12g} bounded={r['bounded']} "
                         f"lambda={r['lambda']} shape={r['shape']}" for r in rows)
