from dataclasses import dataclass

import numpy as np
from django.conf import settings

from classify.models import Shape
from classify.utils import check_lambda_limits, monotonicity_findings
from problems.models import Family


@dataclass(frozen=True)
class FigureCase:
    '''A published solution set to reproduce: the problem and its scan window.'''

    fig_id: int
    family: str
    m: float
    gamma: float
    scan_range: tuple
    caption: str


FIGURES = {
    1: FigureCase(1, Family.TEMPERATURE, -2.0, 5.0, (0.0, 5.0),
                  "m=-2, gamma=5: two solutions with lambda < 0 and further solutions tending to 0"),
    2: FigureCase(2, Family.TEMPERATURE, -0.75, -10.0, (-10.0, 10.0),
                  "m=-0.75, gamma=-10: bounded and unbounded solutions"),
    3: FigureCase(3, Family.TEMPERATURE, 0.5, 0.0, (-10.0, 0.0),
                  "m=0.5, gamma=0: the unique, concave solution"),
    4: FigureCase(4, Family.TEMPERATURE, 1.1, 0.0, (-5.0, 1.0),
                  "m=1.1, gamma=0: one concave and many concave-convex solutions"),
}


def curve_counts(records):
    '''Counts by type written to the figure manifest.'''
    shapes = [r.shape.value for r in records]
    return {
        'n_curves': len(records),
        'n_bounded': sum(1 for r in records if r.bounded),
        'n_unbounded': sum(1 for r in records if not r.bounded),
        'n_lambda_negative': sum(1 for r in records if r.bounded and r.limit_lambda < 0),
        'n_lambda_zero': sum(1 for r in records if r.bounded and r.limit_lambda == 0),
        'n_lambda_positive': sum(1 for r in records if r.bounded and r.limit_lambda > 0),
        'n_concave': shapes.count(Shape.CONCAVE),
        'n_concave_convex': shapes.count(Shape.CONCAVE_CONVEX),
        'n_concave_convex_lambda_positive': sum(
            1 for r in records
            if r.shape.value == Shape.CONCAVE_CONVEX and r.bounded and r.limit_lambda > 0),
    }


def gate_findings(case, records, bc_tol=None):
    '''
    What a reproduction of `case` gets wrong; an empty list means it passes.

    1: >= 5 solutions, exactly 2 with lambda < 0, all negative and increasing.
    2: 2 bounded and >= 4 unbounded.
    3: exactly one solution, concave and bounded.
    4: 1 concave and >= 3 concave-convex, all bounded, exactly one
       concave-convex with lambda > 0.
    '''
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    counts = curve_counts(records)
    findings = []

    def expect(condition, message):
        if not condition:
            findings.append(message)

    if case.fig_id == 1:
        expect(counts['n_curves'] >= 5, f"expected >= 5 curves, found {counts['n_curves']}")
        expect(counts['n_lambda_negative'] == 2,
               f"expected 2 curves with lambda < 0, found {counts['n_lambda_negative']}")
        findings += monotonicity_findings(records, case.family, case.m, bc_tol)
        for record in records:
            if np.any(record.profile.fp < -bc_tol):
                findings.append(f"free value {record.free_value:.10g}: f is not increasing")
    elif case.fig_id == 2:
        expect(counts['n_bounded'] == 2, f"expected 2 bounded curves, found {counts['n_bounded']}")
        expect(counts['n_unbounded'] >= 4,
               f"expected >= 4 unbounded curves, found {counts['n_unbounded']}")
    elif case.fig_id == 3:
        expect(counts['n_curves'] == 1, f"expected exactly 1 curve, found {counts['n_curves']}")
        expect(counts['n_concave'] == counts['n_curves'] == counts['n_bounded'],
               "the solution is not concave and bounded")
    elif case.fig_id == 4:
        expect(counts['n_concave'] == 1, f"expected 1 concave curve, found {counts['n_concave']}")
        expect(counts['n_concave_convex'] >= 3,
               f"expected >= 3 concave-convex curves, found {counts['n_concave_convex']}")
        expect(counts['n_unbounded'] == 0, f"{counts['n_unbounded']} unbounded curve(s)")
        report = check_lambda_limits(records, case.family, case.m, gamma=case.gamma)
        findings += list(report.findings)
    return findings
