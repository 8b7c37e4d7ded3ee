"""
Django settings for schottkydim project.

There is no database and no web surface: Django provides configuration, the app
registry, management commands and the test runner. Every value can be
overridden from the environment (or a .env file loaded by manage.py).

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

import logging
import os
from enum import Enum

from django.core.management.utils import get_random_secret_key

logger = logging.getLogger(__name__)


def strtobool(value):
    # distutils.util.strtobool is gone in Python 3.12
    value = value.lower()
    if value in ("y", "yes", "t", "true", "on", "1"):
        return True
    if value in ("n", "no", "f", "false", "off", "0"):
        return False
    raise ValueError(f"invalid truth value {value!r}")


# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY")
if not SECRET_KEY:
    logger.warning("No DJANGO_SECRET_KEY set. Generating random secret key")
    SECRET_KEY = get_random_secret_key()

DEBUG = bool(strtobool(os.environ.get("DEBUG", "false")))

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    "rest_framework",
    "hyperbolic",
    "schottky",
    "dimension",
    "trees",
    "kernels",
    "degeneration",
    "runs",
]

DATABASES = {}

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# REST framework is only used for (de)serializing descriptors and results.
REST_FRAMEWORK = {
    "UNAUTHENTICATED_USER": None,
}

# Tool settings
SCHOTTKYDIM_VERSION = os.environ.get("SCHOTTKYDIM_VERSION", "0.1.0")
SCHOTTKYDIM_THREADS = int(os.environ.get("SCHOTTKYDIM_THREADS", "1"))
SCHOTTKYDIM_DEPTH = int(os.environ.get("SCHOTTKYDIM_DEPTH", "12"))
SCHOTTKYDIM_TOL = float(os.environ.get("SCHOTTKYDIM_TOL", "1e-10"))
SCHOTTKYDIM_QI_BALL_RADIUS = int(os.environ.get("SCHOTTKYDIM_QI_BALL_RADIUS", "6"))
# unset: every property runs its own trial count
_check_trials = os.environ.get("SCHOTTKYDIM_CHECK_TRIALS")
SCHOTTKYDIM_CHECK_TRIALS = int(_check_trials) if _check_trials else None


# Celery settings
class TaskPriority(Enum):
    HIGH = 9
    MED = 5
    LOW = 0


# Without a broker every task runs in-process; sweeps then fan out on threads.
REDIS_URL = os.environ.get("REDIS_URL", "")
CELERY_BROKER_URL = REDIS_URL or "memory://"
CELERY_TASK_ALWAYS_EAGER = bool(
    strtobool(
        os.environ.get("CELERY_TASK_ALWAYS_EAGER", "false" if REDIS_URL else "true")
    )
)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_RESULT_BACKEND = REDIS_URL or None
CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_BROKER_TRANSPORT_OPTIONS = {"max_retries": 5, "queue_order_strategy": "priority"}
CELERY_TASK_DEFAULT_PRIORITY = TaskPriority.MED.value
CELERY_TASK_REJECT_ON_WORKER_LOST = True

if "rediss" in REDIS_URL:
    CELERY_BROKER_USE_SSL = {"ssl_cert_reqs": None}
    CELERY_REDIS_BACKEND_USE_SSL = {"ssl_cert_reqs": None}

# Logging configuration
SCHOTTKYDIM_LOG_LEVEL = os.getenv("SCHOTTKYDIM_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.getenv("DJANGO_APP_LOG_LEVEL", "INFO"),
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": os.getenv("DJANGO_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
        **{
            app: {"level": SCHOTTKYDIM_LOG_LEVEL}
            for app in (
                "hyperbolic",
                "schottky",
                "dimension",
                "trees",
                "kernels",
                "degeneration",
                "runs",
            )
        },
    },
}
