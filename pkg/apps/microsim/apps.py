from django.apps import AppConfig

class MicrosimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.microsim'
    verbose_name = 'Microsimulador'
