import logging

from exceptions import FigureGateFailed
from integrator.utils import profile_to_csv
from problems.utils import make_params
from shooting.serializers import BandSerializer, SolutionRecordSerializer, shape_counts
from shooting.utils import scan_solutions
from cli.base import SimbvpCommand, add_scan_arguments
from cli.figures import FIGURES, curve_counts, gate_findings
from cli.serializers import FigureSerializer
from cli.utils import envelope, scan_kwargs, write_json, write_text


logger = logging.getLogger(__name__)


class Command(SimbvpCommand):
    help = ("Reproduce the published solution sets: one CSV per curve and a manifest "
            "with the counts by type. Exit 2 when the expected counts are not met.")
    config_serializer = FigureSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--fig', type=int, nargs='+', choices=sorted(FIGURES))
        add_scan_arguments(parser)

    def run(self, config):
        failed = []
        lines = []
        for fig_id in config['fig']:
            case = FIGURES[fig_id]
            params = make_params(case.family, case.m, case.gamma)
            kwargs = scan_kwargs(config)
            if kwargs['scan_range'] is None:
                kwargs['scan_range'] = case.scan_range
            report = scan_solutions(params, threads=config['threads'], **kwargs)
            records = report.records

            for k, record in enumerate(records):
                write_text(config, f'fig{fig_id}_curve_{k:03d}.csv', profile_to_csv(record.profile))
            findings = gate_findings(case, records, config['bc_tol'])
            counts = curve_counts(records)
            write_json(config, f'fig{fig_id}.json', envelope(
                'figures',
                fig=fig_id,
                caption=case.caption,
                family=str(case.family),
                m=case.m,
                gamma=case.gamma,
                counts=counts,
                shapes=shape_counts(records),
                bands=BandSerializer(report.bands, many=True).data,
                curves=[{'file': f'fig{fig_id}_curve_{k:03d}.csv', **row}
                        for k, row in enumerate(SolutionRecordSerializer(records, many=True).data)],
                gate_passed=not findings,
                findings=findings,
            ))

            if findings:
                logger.error(f'Figure {fig_id} gate failed: {"; ".join(findings)}')
                failed.append(fig_id)
            lines.append(f"fig {fig_id}: {counts['n_curves']} curves, "
                         f"{'ok' if not findings else 'FAILED: ' + '; '.join(findings)}")

        if failed:
            raise FigureGateFailed(f"figure(s) {failed}: " + ' | '.join(lines))
        return '\n'.join(lines)
