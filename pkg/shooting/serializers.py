from rest_framework import serializers

from classify.models import Shape
from integrator.models import Termination
from problems.models import Family
from .models import RecordKind, Side


class AsymptoticFitSerializer(serializers.Serializer):
    exponent = serializers.FloatField()
    c_constant = serializers.FloatField()
    fit_window = serializers.ListField(child=serializers.FloatField())
    r_squared = serializers.FloatField()
    n_samples = serializers.IntegerField()

    def to_representation(self, instance):
        return {
            'exponent': instance.exponent,
            'c_constant': instance.c_constant,
            'fit_window': list(instance.fit_window),
            'r_squared': instance.r_squared,
            'n_samples': instance.n_samples,
        }


class SolutionRecordSerializer(serializers.Serializer):
    '''
    JSON record of one solution of the boundary value problem.

    Fields:
    - family, m, gamma: the problem.
    - free_value: f''(0) (temperature) or f'(0) (flux).
    - bounded: whether f tends to a finite limit.
    - lambda: that limit, null for unbounded solutions.
    - shape: Concave, ConvexConcave, ConcaveConvex, Convex or Mixed(k).
    - growth_exponent: fitted exponent of |f| for unbounded solutions.
    - decay_exponent: fitted (negative) exponent when f decays to 0.
    - termination: termination of the profile written next to the record.
    - kind: root (refined sign change) or band_member.
    - residual: f'(t_max) of the profile.
    - fit: the accepted asymptotic fit, if any.
    '''

    family = serializers.ChoiceField(choices=Family.choices)
    m = serializers.FloatField(allow_null=True)
    gamma = serializers.FloatField()
    free_value = serializers.FloatField()
    bounded = serializers.BooleanField()
    shape = serializers.CharField()
    growth_exponent = serializers.FloatField(allow_null=True)
    decay_exponent = serializers.FloatField(allow_null=True)
    termination = serializers.ChoiceField(choices=Termination.choices)
    kind = serializers.ChoiceField(choices=RecordKind.choices)
    residual = serializers.FloatField()

    def to_representation(self, instance):
        params = instance.params
        return {
            'family': str(params.family),
            'm': params.m,
            'gamma': params.gamma,
            'free_value': instance.free_value,
            'bounded': instance.bounded,
            # `lambda` is a keyword, so the field is built here rather than declared
            'lambda': instance.limit_lambda,
            'shape': str(instance.shape),
            'growth_exponent': instance.growth_exponent,
            'decay_exponent': instance.decay_exponent,
            'termination': str(instance.termination),
            'kind': str(instance.kind),
            'residual': instance.residual,
            'fit': (AsymptoticFitSerializer(instance.fit).data
                    if instance.fit is not None else None),
        }


def shape_counts(records):
    '''Number of records per shape value, every Shape listed.'''
    counts = {str(value): 0 for value in Shape.values}
    for record in records:
        counts[str(record.shape.value)] += 1
    return counts


class BandSerializer(serializers.Serializer):
    lo = serializers.FloatField()
    hi = serializers.FloatField()
    residual_sign = serializers.IntegerField()
    n_points = serializers.IntegerField()

    def to_representation(self, instance):
        return {'lo': instance.lo, 'hi': instance.hi,
                'residual_sign': instance.residual_sign, 'n_points': instance.n_points}


class CriticalGammaSerializer(serializers.Serializer):
    '''
    JSON record of a critical gamma computation.

    Fields:
    - family, m: the problem family and exponent.
    - gamma_star: midpoint of the final bracket.
    - bracket_width: width of the final bracket.
    - side_with_solutions: Above or Below gamma_star.
    - verified: solvability confirmed at gamma_star +- 2 bracket_width.
    - lower_bound: known lower bound of gamma_star (flux family, m < -2).
    '''

    family = serializers.ChoiceField(choices=Family.choices)
    m = serializers.FloatField()
    gamma_star = serializers.FloatField()
    bracket_width = serializers.FloatField()
    side_with_solutions = serializers.ChoiceField(choices=Side.choices)
    verified = serializers.BooleanField()
    lower_bound = serializers.FloatField(allow_null=True)

    def to_representation(self, instance):
        return {
            'family': str(instance.family),
            'm': instance.m,
            'gamma_star': instance.gamma_star,
            'bracket_width': instance.bracket_width,
            'side_with_solutions': str(instance.side_with_solutions),
            'verified': instance.verified,
            'lower_bound': instance.lower_bound,
        }
