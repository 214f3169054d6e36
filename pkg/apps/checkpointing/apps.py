from django.apps import AppConfig

class CheckpointingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.checkpointing'
    verbose_name = 'Checkpoints y bloques de recuperación'
