import math

from django.conf import settings
from rest_framework import serializers

from exceptions import InvalidParameters
from problems.models import Family
from problems.utils import make_params


def _output_dir():
    return str(settings.OUTPUT_DIR)


def _threads():
    return settings.SIMBVP_THREADS


class PointField(serializers.ListField):
    '''Two finite floats.'''

    child = serializers.FloatField()

    def __init__(self, **kwargs):
        kwargs.setdefault('min_length', 2)
        kwargs.setdefault('max_length', 2)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        first, second = super().to_internal_value(data)
        if not (math.isfinite(first) and math.isfinite(second)):
            raise serializers.ValidationError("Both values must be finite.")
        return (first, second)


class PairField(PointField):
    '''An interval: two finite floats, lo < hi.'''

    def to_internal_value(self, data):
        lo, hi = super().to_internal_value(data)
        if not lo < hi:
            raise serializers.ValidationError("Expected lo < hi.")
        return (lo, hi)


class RunConfigSerializer(serializers.Serializer):
    '''
    Options shared by every command.

    Fields:
    - output_dir: where data files are written, SIMBVP_OUTPUT_DIR by default.
    - format: json or csv for the record files.
    - threads: worker processes for scans and sweeps, SIMBVP_THREADS by default.
    '''

    output_dir = serializers.CharField(default=_output_dir)
    format = serializers.ChoiceField(choices=['json', 'csv'], default='json')
    threads = serializers.IntegerField(min_value=1, default=_threads)


class ProblemSerializer(RunConfigSerializer):
    '''A temperature or flux problem, validated through make_params.'''

    family = serializers.ChoiceField(choices=[Family.TEMPERATURE, Family.FLUX])
    m = serializers.FloatField()
    gamma = serializers.FloatField(default=0.0)

    def validate(self, data):
        data = super().validate(data)
        try:
            data['params'] = make_params(data['family'], data['m'], data['gamma'])
        except InvalidParameters as exc:
            raise serializers.ValidationError({'m': [str(exc)]})
        return data


class IntegrationMixin(serializers.Serializer):
    '''Integrator and shooting controls; unset values fall back to settings.'''

    t_max = serializers.FloatField(required=False, allow_null=True, default=None, min_value=0.0)
    rel_tol = serializers.FloatField(required=False, allow_null=True, default=None,
                                     min_value=1e-14, max_value=1e-2)
    abs_tol = serializers.FloatField(required=False, allow_null=True, default=None,
                                     min_value=1e-16, max_value=1e-2)
    bc_tol = serializers.FloatField(required=False, allow_null=True, default=None, min_value=0.0)


class ScanMixin(IntegrationMixin):
    scan_range = PairField(required=False, allow_null=True, default=None)
    scan_step = serializers.FloatField(required=False, allow_null=True, default=None)
    unbounded_ok = serializers.BooleanField(default=True)

    def validate_scan_step(self, value):
        if value is not None and not value > 0:
            raise serializers.ValidationError("scan_step must be positive.")
        return value


class SolveSerializer(ScanMixin, ProblemSerializer):
    bracket = PairField(required=False, allow_null=True, default=None)


class FigureSerializer(ScanMixin, RunConfigSerializer):
    fig = serializers.ListField(child=serializers.ChoiceField(choices=[1, 2, 3, 4]),
                                min_length=1, default=lambda: [1, 2, 3, 4])


class GridField(serializers.ListField):
    child = serializers.FloatField()

    def to_internal_value(self, data):
        values = super().to_internal_value(data)
        if not all(math.isfinite(v) for v in values):
            raise serializers.ValidationError("Grid values must be finite.")
        if values != sorted(values):
            raise serializers.ValidationError("Grid must be sorted.")
        return values


class SweepSerializer(ScanMixin, RunConfigSerializer):
    family = serializers.ChoiceField(choices=[Family.TEMPERATURE, Family.FLUX])
    m_grid = GridField(min_length=1)
    gamma_grid = GridField(min_length=1)
    store = serializers.BooleanField(default=False)


class GammaStarSerializer(ScanMixin, RunConfigSerializer):
    family = serializers.ChoiceField(choices=[Family.TEMPERATURE, Family.FLUX])
    m = serializers.FloatField()
    bracket = PairField(default=lambda: (0.0, 10.0))
    tol = serializers.FloatField(default=1e-3, min_value=1e-12)


class PhaseSerializer(ScanMixin, RunConfigSerializer):
    '''
    A physical trajectory pushed to the plane, or a trajectory of the planar
    system itself when `start` is given.
    '''

    family = serializers.ChoiceField(choices=Family.choices, default=Family.TEMPERATURE)
    m = serializers.FloatField(required=False, allow_null=True, default=None)
    gamma = serializers.FloatField(default=0.0)
    alpha = serializers.FloatField(required=False, allow_null=True, default=None)
    beta = serializers.FloatField(required=False, allow_null=True, default=None)
    free_value = serializers.FloatField(required=False, allow_null=True, default=None)
    tau = serializers.FloatField(required=False, allow_null=True, default=None)
    t_range = PairField(required=False, allow_null=True, default=None)
    start = PointField(required=False, allow_null=True, default=None)
    s_span = PairField(required=False, allow_null=True, default=None)
    grid = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=2)

    def validate(self, data):
        try:
            data['params'] = make_params(data['family'], data['m'], data['gamma'],
                                         alpha=data['alpha'], beta=data['beta'])
        except InvalidParameters as exc:
            raise serializers.ValidationError({'family': [str(exc)]})
        if data['params'].family == Family.GENERIC and data['start'] is None:
            raise serializers.ValidationError(
                {'start': ["The generic family has no boundary conditions; give start and s_span."]})
        if data['start'] is not None and data['s_span'] is None:
            raise serializers.ValidationError({'s_span': ["Required with start."]})
        return data


class AsymptoteSerializer(ScanMixin, ProblemSerializer):
    free_value = serializers.FloatField(required=False, allow_null=True, default=None)
    min_r_squared = serializers.FloatField(required=False, allow_null=True, default=None,
                                           min_value=0.0, max_value=1.0)


class VerifySerializer(RunConfigSerializer):
    seed = serializers.IntegerField(default=0)
    instances = serializers.IntegerField(default=50, min_value=1)


class AtlasQuerySerializer(RunConfigSerializer):
    family = serializers.ChoiceField(choices=Family.choices, required=False, allow_null=True,
                                     default=None)
    outcome = serializers.CharField(required=False, allow_null=True, default=None)
    m_min = serializers.FloatField(required=False, allow_null=True, default=None)
    m_max = serializers.FloatField(required=False, allow_null=True, default=None)
    gamma_min = serializers.FloatField(required=False, allow_null=True, default=None)
    gamma_max = serializers.FloatField(required=False, allow_null=True, default=None)
