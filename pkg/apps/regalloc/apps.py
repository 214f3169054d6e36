from django.apps import AppConfig

class RegallocConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.regalloc'
    verbose_name = 'Asignación de registros'
