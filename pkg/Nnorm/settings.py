"""
Django settings for the Nnorm project.

The project carries no web surface: Django provides configuration, logging and
the management-command CLI (``python manage.py <command>``) around the
``toolkit`` app, which holds all of the numerical code.
"""

from pathlib import Path
import os
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Required by Django at startup; nothing in the toolkit is signed with it.
SECRET_KEY = config('NNORM_SECRET_KEY', default='django-insecure-n9w+2kq0%m1v@nnorm-local-only')

DEBUG = config('NNORM_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'toolkit',
]

# REST Framework settings (serializers and the JSON renderer only)
REST_FRAMEWORK = {
    'STRICT_JSON': True,
    'COERCE_DECIMAL_TO_STRING': False,
    'UNAUTHENTICATED_USER': None,
}

MIDDLEWARE = []

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Numerical defaults
# Not read from the environment: a report depends only on its command
# line.

NNORM_REL_TOL = 1e-9
NNORM_ABS_TOL = 1e-12
NNORM_DEFAULT_SEED = 7

# Sampled checks are split into this many shards, each seeded from
# SeedSequence(seed).spawn(NNORM_SHARDS).
NNORM_SHARDS = 4

# Threads used to run the shards; affects wall time only.
NNORM_WORKERS = config('NNORM_WORKERS', default=4, cast=int)

# Banach iteration aborts after this many consecutive growing steps.
NNORM_DIVERGENCE_WINDOW = 10

# uniqueness_probe passes when solutions lie within factor * eps of each other.
NNORM_UNIQUENESS_FACTOR = 10

# Bisection steps used by continuity_probe to locate an eps-crossing on a ray.
NNORM_BISECTION_STEPS = 80


# Logging Configuration
# Reports go to stdout; logs go to stderr (and optionally a file).

NNORM_LOG_LEVEL = config('NNORM_LOG_LEVEL', default='INFO')
NNORM_LOG_FILE = config('NNORM_LOG_FILE', default='')

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
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': True,
        },
        'toolkit': {
            'handlers': ['console'],
            'level': NNORM_LOG_LEVEL,
            'propagate': False,
        },
    },
}

if NNORM_LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': 'DEBUG',
        'class': 'logging.FileHandler',
        'filename': os.path.join(BASE_DIR, NNORM_LOG_FILE),
        'formatter': 'verbose',
    }
    LOGGING['loggers']['toolkit']['handlers'].append('file')
