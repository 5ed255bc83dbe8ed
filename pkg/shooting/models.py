import math
from dataclasses import dataclass, field
from typing import Optional

from django.db import models

from classify.models import AsymptoticFit, ShapeClass
from integrator.models import Profile
from integrator.utils import make_spec
from problems.models import ModelParams


class ResidualOutcome(models.TextChoices):
    EVALUATED = 'Evaluated'
    BLEW_UP_POSITIVE = 'BlewUpPositive'
    BLEW_UP_NEGATIVE = 'BlewUpNegative'


class Side(models.TextChoices):
    ABOVE = 'Above'
    BELOW = 'Below'


class RecordKind(models.TextChoices):
    ROOT = 'root'                  # refined sign change of the residual
    BAND_MEMBER = 'band_member'    # representative of a band of admissible solutions


@dataclass(frozen=True)
class HorizonSettings:
    '''
    Integration controls shared by every shooting evaluation.

    Unset fields fall back to settings; `resolved` pins them so the object
    can be shipped to worker processes without touching settings there.
    '''

    t_max: Optional[float] = None
    rel_tol: Optional[float] = None
    abs_tol: Optional[float] = None
    blowup_threshold: Optional[float] = None
    max_steps: Optional[int] = None

    def spec_for(self, params, initial):
        return make_spec(params, initial, t_max=self.t_max, rel_tol=self.rel_tol,
                         abs_tol=self.abs_tol, blowup_threshold=self.blowup_threshold,
                         max_steps=self.max_steps)

    def resolved(self, params):
        spec = self.spec_for(params, (0.0, 0.0, 0.0))
        return HorizonSettings(spec.t_max, spec.rel_tol, spec.abs_tol,
                               spec.blowup_threshold, spec.max_steps)

    def with_horizon(self, t_max):
        return HorizonSettings(t_max, self.rel_tol, self.abs_tol,
                               self.blowup_threshold, self.max_steps)

    def tightened(self, factor):
        return HorizonSettings(self.t_max, self.rel_tol / factor, self.abs_tol / factor,
                               self.blowup_threshold, self.max_steps)


@dataclass(frozen=True)
class ShootResidual:
    '''
    f'(t_max) for one free value, or the sign of f' where the trajectory blew up.
    '''

    free_value: float
    residual: float
    outcome: str
    profile: Optional[Profile] = field(default=None, repr=False, compare=False)

    @property
    def extended(self):
        '''The residual on the extended real line: blow-ups map to +-inf.'''
        if self.outcome == ResidualOutcome.BLEW_UP_POSITIVE:
            return math.inf
        if self.outcome == ResidualOutcome.BLEW_UP_NEGATIVE:
            return -math.inf
        return self.residual

    @property
    def sign(self):
        value = self.extended
        return (value > 0) - (value < 0)


@dataclass(eq=False)
class SolutionRecord:
    '''
    One solution of the boundary value problem.

    bounded records carry limit_lambda (0 for the decaying family, whose
    decay_exponent is also set); unbounded ones carry growth_exponent.
    '''

    params: ModelParams
    free_value: float
    profile: Profile
    bounded: bool
    shape: ShapeClass
    limit_lambda: Optional[float] = None
    growth_exponent: Optional[float] = None
    decay_exponent: Optional[float] = None
    fit: Optional[AsymptoticFit] = None
    kind: str = RecordKind.ROOT

    @property
    def termination(self):
        return self.profile.termination

    @property
    def residual(self):
        return float(self.profile.fp[-1])


@dataclass(frozen=True)
class Band:
    '''A run of scan points whose trajectories all reach t_max without a sign change.'''

    lo: float
    hi: float
    residual_sign: int
    n_points: int


@dataclass
class ScanReport:
    '''Everything a scan found: records sorted by free value and residual bands.'''

    params: ModelParams
    records: list = field(default_factory=list)
    bands: list = field(default_factory=list)
    n_points: int = 0
    n_indeterminate: int = 0

    @property
    def admissible_bands(self):
        band_values = {r.free_value for r in self.records if r.kind == RecordKind.BAND_MEMBER}
        return [b for b in self.bands if any(b.lo <= v <= b.hi for v in band_values)]


@dataclass(frozen=True)
class CriticalGamma:
    '''
    Threshold of gamma separating non-existence from existence.

    lower_bound is the known bound cbrt(2/(m+2)^2) for the flux family with
    m < -2 and None otherwise; verified tells whether solvability was
    confirmed at gamma_star +- 2 bracket_width.
    '''

    m: float
    family: str
    gamma_star: float
    bracket_width: float
    side_with_solutions: str
    verified: bool
    lower_bound: Optional[float] = None
