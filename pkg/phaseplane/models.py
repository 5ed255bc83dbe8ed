from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from django.db import models


class FixedPointClass(models.TextChoices):
    SADDLE = 'Saddle'
    STABLE_NODE = 'StableNode'
    UNSTABLE_NODE = 'UnstableNode'
    STABLE_FOCUS = 'StableFocus'
    UNSTABLE_FOCUS = 'UnstableFocus'
    CENTER = 'Center'
    DEGENERATE = 'Degenerate'


class PhaseState(NamedTuple):
    '''A point of the planar system: s = int f dt, u = f'/f^2, v = f''/f^3.'''

    s: float
    u: float
    v: float


@dataclass(frozen=True)
class FixedPointInfo:
    location: tuple
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    classification: str


@dataclass(frozen=True, eq=False)
class PhaseTrajectory:
    '''
    Sampled trajectory of the planar system.

    Attributes:
        s (ndarray): strictly increasing values of the rescaled variable.
        y (ndarray): (n, 2) array of (u, v).
        dyds (ndarray): (n, 2) array of (du/ds, dv/ds), used for dense output.
        termination (str): ReachedTmax (end of the span) or an integrator failure.
        t (ndarray): physical stations when the trajectory is the image of a
            Profile, None for trajectories integrated in the plane.
    '''

    s: np.ndarray
    y: np.ndarray
    dyds: np.ndarray
    termination: str
    t: Optional[np.ndarray] = None

    @property
    def u(self):
        return self.y[:, 0]

    @property
    def v(self):
        return self.y[:, 1]

    def at(self, s):
        '''(u, v) on the cubic Hermite interpolant at the value(s) s.'''
        ss = np.atleast_1d(np.asarray(s, dtype=float))
        if len(self.s) == 1:
            values = np.repeat(self.y[:1], len(ss), axis=0)
        else:
            idx = np.clip(np.searchsorted(self.s, ss, side='right') - 1, 0, len(self.s) - 2)
            s0, s1 = self.s[idx], self.s[idx + 1]
            h = (s1 - s0)[:, None]
            x = ((ss - s0) / (s1 - s0))[:, None]
            x2, x3 = x * x, x * x * x
            values = ((2 * x3 - 3 * x2 + 1) * self.y[idx]
                      + (x3 - 2 * x2 + x) * h * self.dyds[idx]
                      + (-2 * x3 + 3 * x2) * self.y[idx + 1]
                      + (x3 - x2) * h * self.dyds[idx + 1])
        return values[0] if np.ndim(s) == 0 else values

    def __len__(self):
        return len(self.s)
