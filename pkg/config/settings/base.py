from config import BASE_DIR
from config import env

APPS_DIR = BASE_DIR / "apps"
LOGS_DIR = BASE_DIR / "logs"

# ==========================
# Core Django Settings
# ==========================

# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = env.bool("DJANGO_DEBUG", False)

# ==========================
# Application Definition
# ==========================

DJANGO_APPS = [
    "django.contrib.contenttypes",
]

LOCAL_APPS = [
    "apps.specfun.apps.SpecfunConfig",
    "apps.epstein.apps.EpsteinConfig",
    "apps.casimir.apps.CasimirConfig",
    "apps.cutofflab.apps.CutofflabConfig",
    "apps.commando.apps.CommandoConfig",
]

# https://docs.djangoproject.com/en/dev/ref/settings/#installed-apps
INSTALLED_APPS = DJANGO_APPS + LOCAL_APPS

# ==========================
# Database Configuration
# ==========================

# The laboratory stores nothing; tests run on SimpleTestCase
DATABASES = {}

# https://docs.djangoproject.com/en/dev/ref/settings/#std:setting-DEFAULT_AUTO_FIELD
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ==========================
# Internationalization
# ==========================
# https://docs.djangoproject.com/en/dev/topics/i18n/

LANGUAGE_CODE = "en-us"

# https://en.wikipedia.org/wiki/List_of_tz_database_time_zones
TIME_ZONE = "UTC"

# https://docs.djangoproject.com/en/dev/ref/settings/#use-i18n
USE_I18N = False

# https://docs.djangoproject.com/en/dev/ref/settings/#use-tz
USE_TZ = True

# ==========================
# Numerical Defaults
# ==========================
# Read by the lab command only; library code takes explicit
# SeriesControl / ToleranceSpec objects.

# Double series and lattice sums
LAB_SERIES_REL_TOL = env.float("LAB_SERIES_REL_TOL", default=1e-12)
LAB_SERIES_MAX_TERMS = env.int("LAB_SERIES_MAX_TERMS", default=2000)

# Adaptive Gauss-Kronrod quadrature
LAB_QUAD_REL_TOL = env.float("LAB_QUAD_REL_TOL", default=1e-10)
LAB_QUAD_MAX_EVALS = env.int("LAB_QUAD_MAX_EVALS", default=400_000)

# Threads evaluating sweep grid points
LAB_SWEEP_WORKERS = env.int("LAB_SWEEP_WORKERS", default=4)

# Cutoff-verification campaign: scales and "AxB" geometries
LAB_CUTOFF_LAMBDAS = [
    float(scale) for scale in env.list("LAB_CUTOFF_LAMBDAS", default=["20", "40", "60"])
]
LAB_CUTOFF_GEOMETRIES = [
    tuple(float(side) for side in item.split("x"))
    for item in env.list(
        "LAB_CUTOFF_GEOMETRIES",
        default=["1x1", "1x2", "2x1", "1.5x1.5", "0.7x1.3"],
    )
]

# Sign change of the Casimir tension, echoed by `lab critical-ratio`
LAB_CRITICAL_RATIO_REFERENCE = 2.74
