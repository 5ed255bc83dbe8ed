from rest_framework import serializers

from .models import Termination


class EventSerializer(serializers.Serializer):
    t = serializers.FloatField()
    kind = serializers.CharField()
    direction = serializers.IntegerField()

    def to_representation(self, instance):
        # Events are NamedTuples
        return {'t': float(instance.t), 'kind': str(instance.kind),
                'direction': int(instance.direction)}


class ProfileSerializer(serializers.Serializer):
    '''
    JSON record of a Profile: termination, event log and summary values.

    The samples themselves go to the CSV file; the record keeps what is
    needed to interpret them.

    Fields:
    - termination: ReachedTmax, BlowUp, StepLimitExceeded or StepUnderflow.
    - t_stop: blow-up / underflow station, null otherwise.
    - t_final: last station.
    - n_samples: number of accepted steps (plus the initial station).
    - initial, final: (f, fp, fpp) at both ends.
    - event_log: located sign changes of f'', f' and f.
    '''

    termination = serializers.ChoiceField(choices=Termination.choices)
    t_stop = serializers.FloatField(allow_null=True)
    t_final = serializers.FloatField()
    n_samples = serializers.IntegerField()
    initial = serializers.ListField(child=serializers.FloatField())
    final = serializers.ListField(child=serializers.FloatField())
    event_log = EventSerializer(many=True)

    def to_representation(self, instance):
        return {
            'termination': str(instance.termination),
            't_stop': instance.t_stop,
            't_final': instance.t_final,
            'n_samples': len(instance),
            'initial': list(instance.initial_state.as_tuple()),
            'final': list(instance.final_state.as_tuple()),
            'event_log': EventSerializer(instance.event_log, many=True).data,
        }
