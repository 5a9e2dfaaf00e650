import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Pas de serveur web: la clé ne sert qu'à satisfaire Django.
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-deis-lab-development-key')

DEBUG = os.environ.get('DJANGO_DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    # Local apps
    'sampling',
]

MIDDLEWARE = []


# Database (registre des exécutions)
# https://docs.djangoproject.com/en/5.0/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('DEIS_DATABASE_PATH', str(BASE_DIR / 'db.sqlite3')),
    }
}


# Internationalization

LANGUAGE_CODE = 'fr-fr'

TIME_ZONE = 'Africa/Libreville'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# ============================================================================
# SCHÉMA DE BRUIT (VP linéaire)
# ============================================================================
# Valeurs du schéma "linear" standard: β_min = 1e-4, β_max = 2e-2, N = 1000
DEIS_BETA_MIN = float(os.environ.get('DEIS_BETA_MIN', '1e-4'))
DEIS_BETA_MAX = float(os.environ.get('DEIS_BETA_MAX', '2e-2'))
DEIS_N_DISCRETE = int(os.environ.get('DEIS_N_DISCRETE', '1000'))


# ============================================================================
# PROFIL DE NORMALISATION DU SCORE (SN)
# ============================================================================
# En dessous de ce temps, s̄(t) est gelé à s̄(seuil) (stabilité près de t = 0)
DEIS_TRUNCATION_THRESHOLD = float(os.environ.get('DEIS_TRUNCATION_THRESHOLD', '0.005'))

# Collecte: DEIS-tAB3 avec K = σ, pas uniformes, graine distincte de l'évaluation
DEIS_PROFILE_NFE = int(os.environ.get('DEIS_PROFILE_NFE', '1000'))
DEIS_PROFILE_BATCH = int(os.environ.get('DEIS_PROFILE_BATCH', '256'))
DEIS_PROFILE_SEED = int(os.environ.get('DEIS_PROFILE_SEED', '1'))


# ============================================================================
# COEFFICIENTS / ÉCHANTILLONNAGE
# ============================================================================
# Sous-intervalles Gauss-Legendre (4 points) par pas
DEIS_QUADRATURE_SUBDIVISIONS = int(os.environ.get('DEIS_QUADRATURE_SUBDIVISIONS', '32'))

DEIS_EVAL_SEED = int(os.environ.get('DEIS_EVAL_SEED', '0'))
DEIS_BATCH = int(os.environ.get('DEIS_BATCH', '256'))
DEIS_N_PROJECTIONS = int(os.environ.get('DEIS_N_PROJECTIONS', '64'))

# Threads pour découper le lot (1 = séquentiel). Le résultat ne dépend pas de cette valeur.
DEIS_WORKERS = int(os.environ.get('DEIS_WORKERS', '1'))

DEIS_OUTPUT_DIR = os.environ.get('DEIS_OUTPUT_DIR', str(BASE_DIR / 'runs'))


# ============================================================================
# LOGGING
# ============================================================================

DEIS_LOG_LEVEL = os.environ.get('DEIS_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'sampling': {
            'handlers': ['console'],
            'level': DEIS_LOG_LEVEL,
            'propagate': False,
        },
    },
}
