from django.apps import AppConfig

class RegionizerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.regionizer'
    verbose_name = 'Particionado en regiones'
