import logging
import math

from exceptions import PreconditionViolation, SimbvpError
from problems.utils import make_params
from shooting.serializers import SolutionRecordSerializer
from shooting.utils import parallel_map, scan_solutions
from .models import AtlasEntry, Outcome
from .utils import atlas_outcome, check_lambda_limits


logger = logging.getLogger(__name__)


def _check_grid(name, grid):
    values = [float(v) for v in grid]
    if not values:
        raise PreconditionViolation(f"{name} is empty")
    if not all(math.isfinite(v) for v in values):
        raise PreconditionViolation(f"{name} holds non-finite values")
    if values != sorted(values):
        raise PreconditionViolation(f"{name} must be sorted")
    return values


def _atlas_point(task):
    '''Classify one grid point; failures are captured, never raised.'''
    family, m, gamma, scan_kwargs = task
    try:
        params = make_params(family, m, gamma)
        report = scan_solutions(params, threads=1, **scan_kwargs)
    except SimbvpError as exc:
        logger.warning(f'{family}(m={m:g}, gamma={gamma:g}) failed: {exc}')
        return {'family': family, 'm': m, 'gamma': gamma,
                'outcome': Outcome.FAILED, 'failure': f'{exc.message}: {exc}'}
    except Exception as exc:
        logger.error(f'{family}(m={m:g}, gamma={gamma:g}) failed: {exc}', exc_info=True)
        return {'family': family, 'm': m, 'gamma': gamma,
                'outcome': Outcome.FAILED, 'failure': str(exc)}

    records = report.records
    bands = report.admissible_bands
    check_lambda_limits(records, family, m, gamma=gamma)
    return {
        'family': family,
        'm': m,
        'gamma': gamma,
        'outcome': atlas_outcome(len(records), bool(bands)),
        'n_solutions': len(records),
        'n_bounded': sum(1 for r in records if r.bounded),
        'n_unbounded': sum(1 for r in records if not r.bounded),
        'band_lo': min(b.lo for b in bands) if bands else None,
        'band_hi': max(b.hi for b in bands) if bands else None,
        'records': [dict(r) for r in SolutionRecordSerializer(records, many=True).data],
    }


def build_atlas(family, m_grid, gamma_grid, threads=None, **scan_kwargs):
    '''
    Sweep a (m, gamma) grid and classify the solution set at every point.

    Args:
        family (Family): temperature or flux.
        m_grid, gamma_grid (iterable): finite, sorted grids.
        threads (int): worker processes over grid points.
        scan_kwargs: scan controls passed to scan_solutions
            (scan_range, scan_step, bc_tol, unbounded_ok, horizon).

    Returns:
        list of unsaved AtlasEntry, m-major grid order.

    Raises:
        PreconditionViolation: empty, non-finite or unsorted grid.
    '''
    m_values = _check_grid('m_grid', m_grid)
    gamma_values = _check_grid('gamma_grid', gamma_grid)
    tasks = [(str(family), m, gamma, scan_kwargs) for m in m_values for gamma in gamma_values]
    rows = parallel_map(_atlas_point, tasks, threads)
    entries = [AtlasEntry(**row) for row in rows]
    for entry in entries:
        logger.info(f'{entry}')
    return entries
