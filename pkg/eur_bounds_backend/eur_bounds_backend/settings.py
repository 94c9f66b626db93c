"""
Django settings for eur_bounds_backend project.

The project has no web surface: Django provides the management-command CLI,
configuration and logging for the entropic uncertainty solver in
``eur_bounds_algo``.

For more information on this file, see
https://docs.djangoproject.com/en/5.1/topics/settings/
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()


def env_bool(name: str, default: bool = False) -> bool:
    """Read a boolean environment variable with common truthy values."""
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "yes", "on"}


def env_int(name: str, default: int) -> int:
    """Read an integer environment variable, falling back to ``default``."""
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    return int(value)


def env_float(name: str, default: float) -> float:
    """Read a float environment variable, falling back to ``default``."""
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    return float(value)


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "eur-bounds-local-only")

DEBUG = env_bool("DJANGO_DEBUG", default=False)

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "eur_bounds_algo.apps.EurBoundsAlgoConfig",
]

# The solver keeps no persistent state; sqlite only satisfies Django's
# configuration checks.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Solver configuration
EUR_DEFAULT_EPSILON = env_float("EUR_DEFAULT_EPSILON", 1e-6)
EUR_DEFAULT_MAX_ITERATIONS = env_int("EUR_DEFAULT_MAX_ITERATIONS", 500)
EUR_VERTEX_LIMIT = env_int("EUR_VERTEX_LIMIT", 10**6)
EUR_RANK_TOLERANCE = env_float("EUR_RANK_TOLERANCE", 1e-10)
EUR_STALL_WINDOW = env_int("EUR_STALL_WINDOW", 10)
EUR_USE_PAIR_CONSTRAINTS = env_bool("EUR_USE_PAIR_CONSTRAINTS", default=True)

# Sweep parallelism (worker processes); defaults to the number of logical cores
EUR_SWEEP_JOBS = env_int("EUR_SWEEP_JOBS", os.cpu_count() or 1)

EUR_LOG_LEVEL = os.getenv("EUR_LOG_LEVEL", "INFO").upper()

# Add logging configuration
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": "INFO",
        },
        "eur_bounds_algo": {
            "handlers": ["console"],
            "level": EUR_LOG_LEVEL,
            "propagate": False,
        },
    },
}
