from django.conf import settings
from django.db import transaction

from classify.atlas import build_atlas
from classify.models import Outcome
from classify.serializers import atlas_to_csv, atlas_to_jsonl
from cli.base import SimbvpCommand, add_scan_arguments
from cli.serializers import SweepSerializer
from cli.utils import scan_kwargs, write_text


class Command(SimbvpCommand):
    help = ("Classify the solution set on an (m, gamma) grid. Writes atlas.csv and, "
            "with --format json, atlas.jsonl; --store saves the entries for `atlas`.")
    config_serializer = SweepSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--family', choices=['temperature', 'flux'])
        parser.add_argument('--m-grid', type=float, nargs='+')
        parser.add_argument('--gamma-grid', type=float, nargs='+')
        parser.add_argument('--store', action='store_const', const=True,
                            help="Save the entries in the database")
        add_scan_arguments(parser)

    def run(self, config):
        entries = build_atlas(config['family'], config['m_grid'], config['gamma_grid'],
                              threads=config['threads'], **scan_kwargs(config))
        write_text(config, 'atlas.csv', atlas_to_csv(entries))
        if config['format'] == 'json':
            write_text(config, 'atlas.jsonl', atlas_to_jsonl(entries, settings.SPEC_VERSION))
        if config['store']:
            with transaction.atomic():
                for entry in entries:
                    entry.save()

        n_failed = sum(1 for e in entries if e.outcome == Outcome.FAILED)
        lines = [str(e) for e in entries]
        if n_failed:
            lines.append(f"{n_failed} grid point(s) failed; see the failure field")
        return '\n'.join(lines)
