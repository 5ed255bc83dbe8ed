from dataclasses import dataclass
from typing import Optional

from django.db import models

from problems.models import Family


class Shape(models.TextChoices):
    CONCAVE = 'Concave'
    CONVEX_CONCAVE = 'ConvexConcave'
    CONCAVE_CONVEX = 'ConcaveConvex'
    CONVEX = 'Convex'
    MIXED = 'Mixed'


class Boundedness(models.TextChoices):
    BOUNDED = 'bounded'
    DECAYING = 'decaying'          # bounded, f -> 0 like a negative power of t
    UNBOUNDED = 'unbounded'
    INDETERMINATE = 'indeterminate'


class Outcome(models.TextChoices):
    NO_SOLUTION = 'NoSolution'
    UNIQUE = 'Unique'
    FINITE_MULTIPLE = 'FiniteMultiple'
    BAND_OF_SOLUTIONS = 'BandOfSolutions'
    FAILED = 'Failed'


@dataclass(frozen=True)
class ShapeClass:
    '''
    Shape of a solution read off the sign pattern of f''.

    sign_changes is k for Mixed(k); degenerate flags a profile whose f''
    never leaves the dead-band (reported as Concave by convention).
    '''

    value: str
    sign_changes: int = 0
    degenerate: bool = False

    def __str__(self):
        if self.value == Shape.MIXED:
            return f"Mixed({self.sign_changes})"
        return str(self.value)


@dataclass(frozen=True)
class AsymptoticFit:
    '''
    Least-squares line through (log t, log|f|) over the final decade.

    exponent is the slope, c_constant = exp(intercept).
    '''

    exponent: float
    c_constant: float
    fit_window: tuple
    r_squared: float
    n_samples: int


@dataclass(frozen=True)
class AsymptoticClass:
    '''Verdict of the boundedness ladder for one profile.'''

    status: str
    limit_lambda: Optional[float] = None
    growth_exponent: Optional[float] = None
    decay_exponent: Optional[float] = None
    fit: Optional[AsymptoticFit] = None

    @property
    def bounded(self):
        return self.status in (Boundedness.BOUNDED, Boundedness.DECAYING)

    @property
    def admissible(self):
        return self.status != Boundedness.INDETERMINATE


class AtlasEntry(models.Model):
    '''
    Classification outcome at one (family, m, gamma) grid point.

    build_atlas returns unsaved instances; `sweep --store` persists them so
    later runs can be queried with the `atlas` command.
    '''

    family = models.CharField(max_length=16, choices=Family.choices, db_index=True)
    m = models.FloatField(db_index=True)
    gamma = models.FloatField(db_index=True)
    outcome = models.CharField(max_length=20, choices=Outcome.choices, db_index=True)
    n_solutions = models.PositiveIntegerField(default=0)
    n_bounded = models.PositiveIntegerField(default=0)
    n_unbounded = models.PositiveIntegerField(default=0)
    band_lo = models.FloatField(null=True, blank=True)
    band_hi = models.FloatField(null=True, blank=True)
    # SolutionRecord summaries, sorted by free value
    records = models.JSONField(default=list)
    failure = models.TextField(null=True, blank=True)
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['family', 'm', 'gamma']

    def __str__(self):
        return f"{self.family}(m={self.m:g}, gamma={self.gamma:g}): {self.outcome_label}"

    @property
    def outcome_label(self):
        if self.outcome == Outcome.FINITE_MULTIPLE:
            return f"FiniteMultiple({self.n_solutions})"
        return self.outcome


@dataclass(frozen=True)
class LambdaReport:
    '''
    Counts of the limits lambda among the bounded solutions at one (m, gamma)
    point, with the findings that contradict the expected pattern.
    '''

    n_negative: int
    n_zero: int
    n_positive: int
    n_concave_convex_positive: int
    findings: tuple = ()

    @property
    def ok(self):
        return not self.findings
