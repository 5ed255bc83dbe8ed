import io
import json

from rest_framework import serializers

from .models import AtlasEntry


class AtlasEntrySerializer(serializers.ModelSerializer):
    '''
    Serializer for stored and freshly built AtlasEntry rows.

    Fields:
    - family, m, gamma: the grid point.
    - outcome: NoSolution, Unique, FiniteMultiple, BandOfSolutions or Failed.
    - outcome_label: outcome with the count, e.g. FiniteMultiple(3).
    - n_solutions, n_bounded, n_unbounded: record counts.
    - band_lo, band_hi: extent of the admissible bands, if any.
    - records: SolutionRecord summaries.
    - failure: why the point could not be classified.

    The creation time is left out so exports stay byte-stable.
    '''

    outcome_label = serializers.CharField(read_only=True)

    class Meta:
        model = AtlasEntry
        fields = [
            'family',
            'm',
            'gamma',
            'outcome',
            'outcome_label',
            'n_solutions',
            'n_bounded',
            'n_unbounded',
            'band_lo',
            'band_hi',
            'records',
            'failure',
        ]

    def validate(self, data):
        if data.get('n_bounded', 0) + data.get('n_unbounded', 0) != data.get('n_solutions', 0):
            raise serializers.ValidationError("n_bounded + n_unbounded must equal n_solutions")
        return data


ATLAS_CSV_HEADER = 'family,m,gamma,outcome,n_bounded,n_unbounded'


def atlas_to_csv(entries):
    '''CSV summary, one line per entry.'''
    buffer = io.StringIO()
    buffer.write(ATLAS_CSV_HEADER + '\n')
    for entry in entries:
        buffer.write(f'{entry.family},{entry.m:.17g},{entry.gamma:.17g},'
                     f'{entry.outcome_label},{entry.n_bounded},{entry.n_unbounded}\n')
    return buffer.getvalue()


def atlas_to_jsonl(entries, spec_version):
    '''JSON-lines export, one AtlasEntry per line with sorted keys.'''
    lines = []
    for data in AtlasEntrySerializer(entries, many=True).data:
        record = dict(data)
        record['spec_version'] = spec_version
        lines.append(json.dumps(record, sort_keys=True))
    return ''.join(line + '\n' for line in lines)
