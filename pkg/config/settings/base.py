import os
from pathlib import Path
from decouple import config, Csv
import dj_database_url

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Security
SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-me')
DEBUG = config('DEBUG', default=True, cast=bool)
ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=Csv())

# Application definition
DJANGO_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
]

THIRD_PARTY_APPS = [
    'rest_framework',
    'corsheaders',
    'drf_spectacular',
    'django_filters',
]

LOCAL_APPS = [
    'apps.common',
    'apps.ir',
    'apps.regionizer',
    'apps.checkpointing',
    'apps.loopopt',
    'apps.regalloc',
    'apps.scheduler',
    'apps.microsim',
    'apps.faults',
    'apps.harness',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

MIDDLEWARE = [
    'corsheaders.middleware.CorsMiddleware',
    'django.middleware.security.SecurityMiddleware',
    'whitenoise.middleware.WhiteNoiseMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'config.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [BASE_DIR / 'templates'],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'config.wsgi.application'

# Database
DATABASES = {
    'default': dj_database_url.config(
        default=f'sqlite:///{BASE_DIR / "db.sqlite3"}',
        conn_max_age=600,
    )
}

# Internationalization
LANGUAGE_CODE = 'es-ES'
TIME_ZONE = 'America/Lima'
USE_I18N = True
USE_TZ = True

# Static files
STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Django REST Framework
REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_FILTER_BACKENDS': [
        'django_filters.rest_framework.DjangoFilterBackend',
    ],
    'DEFAULT_SCHEMA_CLASS': 'drf_spectacular.openapi.AutoSchema',
}

# DRF Spectacular (Swagger)
SPECTACULAR_SETTINGS = {
    'TITLE': 'Resiliencia API',
    'DESCRIPTION': 'Compilación con checkpoints, simulación del núcleo in-order e inyección de fallos',
    'VERSION': '1.0.0',
    'SERVE_INCLUDE_SCHEMA': False,
    'SWAGGER_UI_SETTINGS': {
        'deepLinking': True,
        'displayOperationId': False,
        'defaultModelsExpandDepth': 1,
        'displayRequestDuration': True,
        'docExpansion': 'none',
        'filter': True,
    },
}

# CORS
CORS_ALLOWED_ORIGINS = config(
    'CORS_ALLOWED_ORIGINS',
    default='http://localhost:3000,http://127.0.0.1:3000',
    cast=Csv()
)

# ============================================================================
# LOGGING
# ============================================================================

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'apps': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'apps.microsim': {'handlers': ['console'], 'level': config('SIM_LOG_LEVEL', default=LOG_LEVEL), 'propagate': False},
        'apps.faults': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'apps.harness': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
    },
}

# ============================================================================
# IR Y COMPILADOR
# ============================================================================

# Registros que una llamada opaca destruye
IR_CALLER_SAVED = config('IR_CALLER_SAVED', default='', cast=Csv())

# Segmentos reservados, disjuntos de la memoria del programa
CKPT_BASE = config('CKPT_BASE', default=1 << 40, cast=int)
SPILL_BASE = config('SPILL_BASE', default=1 << 39, cast=int)

REGION_SB_SIZE = config('REGION_SB_SIZE', default=4, cast=int)

# Instrucciones netas por iteración que la fusión de IVs puede añadir a un bucle
LIVM_MAX_ADDED_OPS = config('LIVM_MAX_ADDED_OPS', default=0, cast=int)

PRUNING_MAX_SLICE = config('PRUNING_MAX_SLICE', default=8, cast=int)
PRUNING_MAX_BRANCHES = config('PRUNING_MAX_BRANCHES', default=1, cast=int)

REGALLOC_REGISTERS = config('REGALLOC_REGISTERS', default=16, cast=int)
REGALLOC_WRITE_WEIGHT = config('REGALLOC_WRITE_WEIGHT', default=3.0, cast=float)
REGALLOC_READ_WEIGHT = config('REGALLOC_READ_WEIGHT', default=1.0, cast=float)

# ============================================================================
# SIMULADOR
# ============================================================================

SIM_ISSUE_WIDTH = config('SIM_ISSUE_WIDTH', default=2, cast=int)
SIM_MEMORY_PORTS = config('SIM_MEMORY_PORTS', default=1, cast=int)
SIM_LATENCY_ALU = config('SIM_LATENCY_ALU', default=1, cast=int)
SIM_LATENCY_MUL = config('SIM_LATENCY_MUL', default=3, cast=int)
SIM_LATENCY_BRANCH = config('SIM_LATENCY_BRANCH', default=1, cast=int)
SIM_LOAD_HIT = config('SIM_LOAD_HIT', default=2, cast=int)
SIM_LOAD_MISS = config('SIM_LOAD_MISS', default=20, cast=int)
SIM_REDIRECT_PENALTY = config('SIM_REDIRECT_PENALTY', default=2, cast=int)
SIM_L1_SETS = config('SIM_L1_SETS', default=64, cast=int)
SIM_L1_LINE = config('SIM_L1_LINE', default=64, cast=int)
SIM_SB_SIZE = config('SIM_SB_SIZE', default=4, cast=int)
SIM_WCDL = config('SIM_WCDL', default=10, cast=int)
SIM_CLQ_MODE = config('SIM_CLQ_MODE', default='compact')
SIM_CLQ_ENTRIES = config('SIM_CLQ_ENTRIES', default=2, cast=int)
SIM_COLORS = config('SIM_COLORS', default=4, cast=int)
SIM_MAX_CYCLES = config('SIM_MAX_CYCLES', default=5_000_000, cast=int)

# ============================================================================
# FALLOS Y HARNESS
# ============================================================================

FAULTS_DEFAULT_SEED = config('FAULTS_DEFAULT_SEED', default=2024, cast=int)
FAULTS_DEFAULT_TRIALS = config('FAULTS_DEFAULT_TRIALS', default=1000, cast=int)

HARNESS_KERNEL_DIR = BASE_DIR / 'apps' / 'harness' / 'kernels'
HARNESS_OUT_DIR = Path(config('HARNESS_OUT_DIR', default=str(BASE_DIR / 'out')))
HARNESS_JOBS = config('HARNESS_JOBS', default=os.cpu_count() or 1, cast=int)

# Programas aleatorios por test de propiedades
TEST_RANDOM_PROGRAMS = config('TEST_RANDOM_PROGRAMS', default=1000, cast=int)
# Campañas completas y barridos de tendencias (minutos)
HARNESS_SLOW_TESTS = config('HARNESS_SLOW_TESTS', default=False, cast=bool)
