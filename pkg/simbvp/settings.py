"""
Django settings for the simbvp project.

simbvp solves, classifies and validates similarity solutions of
f''' + alpha f f'' - beta f'^2 = 0 under prescribed-temperature and
prescribed-flux boundary conditions. The Django project hosts the
command-line surface (management commands), the atlas store and the
logging configuration; the numerics live in the apps.

Every numerical default below can be overridden from the environment
(or a .env file next to manage.py).
"""
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Nothing is served over HTTP, the key only satisfies Django's checks.
SECRET_KEY = os.environ.get('SECRET_KEY', 'simbvp-local-only')

DEBUG = os.environ.get('DEBUG') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third party apps
    'rest_framework',
    'django_filters',

    # User defined apps
    'problems',
    'integrator',
    'shooting',
    'phaseplane',
    'classify',
    'cli',
]


# Database
# The atlas store; SQLite unless the environment says otherwise.

DATABASES = {
    'default': {
        'ENGINE': os.environ.get('SIMBVP_DATABASE_ENGINE', 'django.db.backends.sqlite3'),
        'NAME': os.environ.get('SIMBVP_DATABASE_NAME', str(BASE_DIR / 'simbvp.sqlite3')),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

USE_TZ = True


# Integrator defaults

INTEGRATOR_REL_TOL = float(os.environ.get('SIMBVP_REL_TOL', '1e-8'))
INTEGRATOR_ABS_TOL = float(os.environ.get('SIMBVP_ABS_TOL', '1e-10'))
BLOWUP_THRESHOLD = float(os.environ.get('SIMBVP_BLOWUP_THRESHOLD', '1e6'))
MAX_STEPS = int(os.environ.get('SIMBVP_MAX_STEPS', '200000'))

# t_max = HORIZON_FACTOR * max(1, 1/alpha_eff), alpha_eff = max(|alpha|, 0.1)
HORIZON_FACTOR = float(os.environ.get('SIMBVP_HORIZON_FACTOR', '50'))
ASYMPTOTIC_HORIZON_FACTOR = float(
    os.environ.get('SIMBVP_ASYMPTOTIC_HORIZON_FACTOR', '100'))


# Shooting defaults

BC_TOL = float(os.environ.get('SIMBVP_BC_TOL', '1e-6'))
SCAN_STEP = float(os.environ.get('SIMBVP_SCAN_STEP', '1e-2'))
# Scans run looser than refinements; roots are polished at the full tolerances.
SCAN_REL_TOL = float(os.environ.get('SIMBVP_SCAN_REL_TOL', '1e-7'))
SCAN_ABS_TOL = float(os.environ.get('SIMBVP_SCAN_ABS_TOL', '1e-9'))
BAND_REPRESENTATIVES = int(os.environ.get('SIMBVP_BAND_REPRESENTATIVES', '4'))


# Classification defaults

LAMBDA_ZERO_TOL = float(os.environ.get('SIMBVP_LAMBDA_ZERO_TOL', '1e-3'))
MIN_R_SQUARED = float(os.environ.get('SIMBVP_MIN_R_SQUARED', '0.999'))


# CLI

SIMBVP_THREADS = int(os.environ.get('SIMBVP_THREADS', str(os.cpu_count() or 1)))
OUTPUT_DIR = Path(os.environ.get('SIMBVP_OUTPUT_DIR', str(BASE_DIR / 'output')))
SPEC_VERSION = '1'


# Logging configuration

LOG_FILE_PATH = os.environ.get('SIMBVP_LOG_FILE', os.path.join(BASE_DIR, 'simbvp.log'))
LOG_LEVEL = os.environ.get('SIMBVP_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'class': 'logging.FileHandler',
            'filename': LOG_FILE_PATH,
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'ERROR',
        },
        **{
            app: {
                'handlers': ['console', 'file'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for app in ('problems', 'integrator', 'shooting', 'phaseplane', 'classify', 'cli')
        },
    },
}
