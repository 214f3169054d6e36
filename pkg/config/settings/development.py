from .base import *

# CORS para desarrollo
CORS_ALLOW_ALL_ORIGINS = True

# Extensiones de desarrollo (shell_plus, show_urls)
INSTALLED_APPS += ['django_extensions']

# Simulaciones cortas en desarrollo: el watchdog salta antes
SIM_MAX_CYCLES = config('SIM_MAX_CYCLES', default=2_000_000, cast=int)
