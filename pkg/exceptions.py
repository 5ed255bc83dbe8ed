import logging

from rest_framework import serializers


logger = logging.getLogger('cli')

# Exit codes shared by every command
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_NO_SOLUTION = 3


class SimbvpError(Exception):
    '''
    Base class for every error raised by the simbvp apps.

    Subclasses carry an `exit_code` so the command layer can turn any of them
    into the documented process exit status without a lookup table.
    '''

    exit_code = EXIT_NUMERICAL
    message = 'Numerical failure'


class InvalidParameters(SimbvpError, ValueError):
    exit_code = EXIT_USAGE
    message = 'Invalid parameters'


class PreconditionViolation(SimbvpError, ValueError):
    exit_code = EXIT_USAGE
    message = 'Precondition violated'


class Indeterminate(SimbvpError):
    '''The integrator stopped on StepUnderflow or StepLimitExceeded.'''

    message = 'Integration was indeterminate'

    def __init__(self, detail, termination=None):
        super().__init__(detail)
        self.termination = termination


class NoSignChange(SimbvpError):
    message = 'Bracket contains no root evidence'


class SameStatusAtEndpoints(SimbvpError):
    message = 'Bracket does not straddle the critical value'


class FVanishes(SimbvpError):
    '''f has a zero inside the interval handed to the blowing-up transform.'''

    message = 'f vanishes on the interval'

    def __init__(self, t):
        super().__init__(f'f vanishes at t={t!r}')
        self.t = t


class RefusesBlowUpProfile(SimbvpError):
    message = 'Profile did not reach t_max'


class FitRejected(SimbvpError):
    message = 'Asymptotic fit rejected'


class WindowTooShort(FitRejected):
    message = 'Fit window holds too few samples'


class PoorFit(FitRejected):
    message = 'Fit quality below threshold'

    def __init__(self, detail, r_squared=None):
        super().__init__(detail)
        self.r_squared = r_squared


class NoSolutionFound(SimbvpError):
    '''Not a failure: a scan found no solution in range.'''

    exit_code = EXIT_NO_SOLUTION
    message = 'No solution found in range'


class FigureGateFailed(SimbvpError):
    message = 'Figure reproduction did not match the expected counts'


class VerificationFailed(SimbvpError):
    message = 'Property suite failed'


def custom_exception_handler(exc, context=None):
    '''
    Translate an exception raised while running a command into an error
    payload and an exit code.

    Args:
        exc (Exception): The exception raised by the command.
        context (dict): Optional extra information (command name, options).

    Returns:
        tuple: (payload dict, exit code). The payload follows the
        {'status', 'message', 'errors'} shape used by every JSON output.
    '''
    if isinstance(exc, serializers.ValidationError):
        return {
            'status': 'error',
            'message': "Validation Error",
            'errors': exc.detail,
        }, EXIT_USAGE

    if isinstance(exc, SimbvpError):
        return {
            'status': 'error',
            'message': exc.message,
            'errors': str(exc),
        }, exc.exit_code

    # Anything else is a bug or an environment problem; keep the traceback
    logger.error(f'An error occurred: {exc}', exc_info=True,
                 extra={'context': context})
    return {
        'status': 'error',
        'message': 'An unexpected error occurred.',
        'errors': str(exc),
    }, EXIT_NUMERICAL
