from rest_framework import serializers

from .models import FixedPointClass
from .utils import fixed_point_residual


class FixedPointSerializer(serializers.Serializer):
    '''
    JSON report of one fixed point of the planar system.

    Fields:
    - location: [u, v].
    - jacobian: 2x2 nested list.
    - eigenvalues: [[re, im], [re, im]], sorted by real then imaginary part.
    - classification: Saddle, StableNode, UnstableNode, StableFocus,
      UnstableFocus, Center or Degenerate.
    - residual: |P| + |Q| at the location, when alpha and beta are in the
      serializer context.
    '''

    location = serializers.ListField(child=serializers.FloatField())
    jacobian = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))
    eigenvalues = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))
    classification = serializers.ChoiceField(choices=FixedPointClass.choices)
    residual = serializers.FloatField(allow_null=True)

    def to_representation(self, instance):
        eigenvalues = sorted((float(z.real), float(z.imag)) for z in instance.eigenvalues)
        return {
            'location': [float(x) for x in instance.location],
            'jacobian': [[float(x) for x in row] for row in instance.jacobian],
            'eigenvalues': [list(pair) for pair in eigenvalues],
            'classification': str(instance.classification),
            'residual': (fixed_point_residual(self.context['alpha'], self.context['beta'], instance)
                         if 'alpha' in self.context else None),
        }


class PhaseTrajectorySerializer(serializers.Serializer):
    '''Summary of a phase trajectory; the samples go to the "s,u,v" CSV.'''

    n_samples = serializers.IntegerField()
    s_range = serializers.ListField(child=serializers.FloatField())
    start = serializers.ListField(child=serializers.FloatField())
    end = serializers.ListField(child=serializers.FloatField())
    termination = serializers.CharField()

    def to_representation(self, instance):
        return {
            'n_samples': len(instance),
            's_range': [float(instance.s[0]), float(instance.s[-1])],
            'start': [float(x) for x in instance.y[0]],
            'end': [float(x) for x in instance.y[-1]],
            'termination': str(instance.termination),
        }
