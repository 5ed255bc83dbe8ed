from django.conf import settings
from rest_framework import serializers

from classify.models import AtlasEntry
from classify.serializers import atlas_to_csv, atlas_to_jsonl
from classify.utils import AtlasEntryFilter
from cli.base import SimbvpCommand
from cli.serializers import AtlasQuerySerializer
from cli.utils import write_text


class Command(SimbvpCommand):
    help = "List stored atlas entries, filtered by family, outcome and m / gamma range."
    config_serializer = AtlasQuerySerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--family', choices=['temperature', 'flux', 'generic'])
        parser.add_argument('--outcome')
        parser.add_argument('--m-min', type=float)
        parser.add_argument('--m-max', type=float)
        parser.add_argument('--gamma-min', type=float)
        parser.add_argument('--gamma-max', type=float)

    def run(self, config):
        query = {key: config[key] for key in AtlasEntryFilter.Meta.fields
                 if config.get(key) is not None}
        filterset = AtlasEntryFilter(query, queryset=AtlasEntry.objects.all())
        if not filterset.is_valid():
            raise serializers.ValidationError(filterset.errors)
        entries = list(filterset.qs)

        if config['format'] == 'json':
            write_text(config, 'atlas_query.jsonl', atlas_to_jsonl(entries, settings.SPEC_VERSION))
        else:
            write_text(config, 'atlas_query.csv', atlas_to_csv(entries))
        return '\n'.join(str(e) for e in entries) or 'no stored entries match'
