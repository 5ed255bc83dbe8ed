import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from django.db import models

from exceptions import InvalidParameters
from problems.models import ModelParams, State
from . import solver


class Termination(models.TextChoices):
    REACHED_TMAX = solver.REACHED_END, 'ReachedTmax'
    BLOW_UP = solver.BLOW_UP, 'BlowUp'
    STEP_LIMIT = solver.STEP_LIMIT, 'StepLimitExceeded'
    STEP_UNDERFLOW = solver.STEP_UNDERFLOW, 'StepUnderflow'
    RUNAWAY = solver.RUNAWAY, 'Runaway'


class EventKind(models.TextChoices):
    FPP_SIGN_CHANGE = 'FppSignChange'
    FP_SIGN_CHANGE = 'FpSignChange'
    F_ZERO_CROSSING = 'FZeroCrossing'


class Event(NamedTuple):
    t: float
    kind: str
    # sign of the component after the event, +1 or -1
    direction: int


@dataclass(frozen=True)
class IvpSpec:
    '''
    One initial value problem: equation coefficients, initial State at t=0,
    horizon and integrator controls.
    '''

    params: ModelParams
    initial: State
    t_max: float
    rel_tol: float
    abs_tol: float
    blowup_threshold: float
    max_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise InvalidParameters(f"t_max must be positive, got {self.t_max!r}")
        for name in ('rel_tol', 'abs_tol'):
            value = getattr(self, name)
            if not 0 < value <= 1e-2:
                raise InvalidParameters(f"{name} must lie in (0, 1e-2], got {value!r}")
        if not self.blowup_threshold > 0:
            raise InvalidParameters("blowup_threshold must be positive")
        if self.max_steps < 1:
            raise InvalidParameters("max_steps must be at least 1")


@dataclass(frozen=True, eq=False)
class Profile:
    """
    A sampled trajectory of the equation, the unit of all downstream analysis.

    Attributes:
        t (ndarray): strictly increasing stations, t[0] = 0.
        y (ndarray): (n, 3) array of (f, f', f'') at each station.
        dydt (ndarray): (n, 3) array of (f', f'', f''') at each station,
            used by the Hermite dense output.
        termination (Termination): why the integration stopped.
        t_stop (float): blow-up, runaway or underflow station, None otherwise.
        event_log (tuple): Events in increasing t.
        params (ModelParams): the equation the profile solves.
    """

    t: np.ndarray
    y: np.ndarray
    dydt: np.ndarray
    termination: str
    params: ModelParams
    t_stop: Optional[float] = None
    event_log: tuple = field(default_factory=tuple)

    @property
    def f(self):
        return self.y[:, 0]

    @property
    def fp(self):
        return self.y[:, 1]

    @property
    def fpp(self):
        return self.y[:, 2]

    @property
    def t_final(self):
        return float(self.t[-1])

    @property
    def initial_state(self):
        return State(*(float(v) for v in self.y[0]))

    @property
    def final_state(self):
        return State(*(float(v) for v in self.y[-1]))

    @property
    def reached_tmax(self):
        return self.termination == Termination.REACHED_TMAX

    def events(self, kind=None):
        return [e for e in self.event_log if kind is None or e.kind == kind]

    def at(self, t):
        '''Dense output: (f, f', f'') at station(s) t inside [0, t_final].'''
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if ts.min() < self.t[0] - 1e-12 or ts.max() > self.t[-1] + 1e-12:
            raise ValueError(f"t outside the profile range [{self.t[0]}, {self.t[-1]}]")
        if len(self.t) == 1:
            values = np.repeat(self.y[:1], len(ts), axis=0)
            return values[0] if scalar else values

        idx = np.clip(np.searchsorted(self.t, ts, side='right') - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[idx], self.t[idx + 1]
        h = (t1 - t0)[:, None]
        s = ((ts - t0) / (t1 - t0))[:, None]
        s2, s3 = s * s, s * s * s
        values = ((2 * s3 - 3 * s2 + 1) * self.y[idx]
                  + (s3 - 2 * s2 + s) * h * self.dydt[idx]
                  + (-2 * s3 + 3 * s2) * self.y[idx + 1]
                  + (s3 - s2) * h * self.dydt[idx + 1])
        return values[0] if scalar else values

    def resample(self, ts):
        '''A (len(ts), 4) array of t, f, f', f'' on the given stations.'''
        ts = np.asarray(ts, dtype=float)
        return np.column_stack([ts, self.at(ts)])

    def __len__(self):
        return len(self.t)
