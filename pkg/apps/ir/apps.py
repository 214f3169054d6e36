from django.apps import AppConfig

class IrConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.ir'
    verbose_name = 'IR (parser, CFG y análisis de flujo de datos)'
