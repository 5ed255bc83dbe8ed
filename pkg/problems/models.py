import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from django.db import models

from exceptions import InvalidParameters


class Family(models.TextChoices):
    TEMPERATURE = 'temperature', 'PrescribedTemperature'
    FLUX = 'flux', 'PrescribedFlux'
    GENERIC = 'generic', 'Generic'


class FixedSlot(models.TextChoices):
    SLOPE_FIXED = 'slope', 'SlopeFixed'            # f'(0) = 1
    CURVATURE_FIXED = 'curvature', 'CurvatureFixed'  # f''(0) = -1


class ClosedFormKind(models.TextChoices):
    M1_ANY_GAMMA = 'm1', 'M1AnyGamma'
    M_THIRD_ANY_GAMMA = 'm_third', 'MThirdAnyGamma'


@dataclass(frozen=True)
class ModelParams:
    """
    Coefficients of f''' + alpha f f'' - beta f'^2 = 0 for one problem.

    Attributes:
        family (Family): temperature, flux or generic.
        m (float): power-law exponent, None for the generic family.
        alpha (float): coefficient of f f''.
        beta (float): coefficient of f'^2.
        gamma (float): mass-transfer parameter, f(0) = -gamma.

    Use problems.utils.make_params to build one; it applies the family maps.
    """

    family: str
    m: Optional[float]
    alpha: float
    beta: float
    gamma: float

    def __str__(self):
        if self.family == Family.GENERIC:
            return f"generic(alpha={self.alpha:g}, beta={self.beta:g}, gamma={self.gamma:g})"
        return f"{self.family}(m={self.m:g}, gamma={self.gamma:g})"


@dataclass(frozen=True)
class State:
    '''The triple (f, f', f'') at one station t.'''

    f: float
    fp: float
    fpp: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.f, self.fp, self.fpp)):
            raise InvalidParameters(f"State components must be finite, got {self.as_tuple()}")

    def as_tuple(self):
        return (self.f, self.fp, self.fpp)

    def norm(self):
        return max(abs(self.f), abs(self.fp), abs(self.fpp))


@dataclass(frozen=True)
class BoundaryConditionSet:
    '''
    Boundary data at t = 0 for one shooting evaluation.

    f0 is -gamma; the fixed slot is f'(0) = 1 (temperature) or
    f''(0) = -1 (flux) and free_slot_value fills the other one.
    '''

    f0: float
    fixed_slot: str
    free_slot_value: float

    def initial_state(self):
        if self.fixed_slot == FixedSlot.SLOPE_FIXED:
            return State(self.f0, 1.0, self.free_slot_value)
        return State(self.f0, self.free_slot_value, -1.0)


@dataclass(frozen=True)
class ClosedFormSolution:
    """
    An explicit solution with its analytic derivatives.

    derived_constants holds c for M1AnyGamma and L, t0 for MThirdAnyGamma.
    The evaluator maps t to (f, f', f'', f''') so residuals can be checked
    without numerical differentiation.
    """

    kind: str
    gamma: float
    alpha: float
    beta: float
    derived_constants: dict = field(default_factory=dict)
    evaluator: Callable = field(default=None, repr=False, compare=False)

    def __call__(self, t):
        return self.evaluator(t)[0]

    def derivatives(self, t):
        return self.evaluator(t)

    def state(self, t):
        f, fp, fpp, _ = self.evaluator(t)
        return State(float(f), float(fp), float(fpp))
