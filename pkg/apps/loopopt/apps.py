from django.apps import AppConfig

class LoopoptConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.loopopt'
    verbose_name = 'Optimizaciones de bucle'
