"""
Modelos base comunes para los registros persistidos del harness
"""
from django.db import models
from django.utils.translation import gettext_lazy as _


class TimeStampedModel(models.Model):
    """
    Modelo abstracto con marcas de tiempo de creación y actualización
    """
    fecha_creacion = models.DateTimeField(
        _('Fecha de creación'),
        auto_now_add=True,
        help_text=_('Momento en que se lanzó la ejecución')
    )
    fecha_actualizacion = models.DateTimeField(
        _('Fecha de actualización'),
        auto_now=True
    )

    class Meta:
        abstract = True
        ordering = ['-fecha_creacion']


class KernelRunModel(TimeStampedModel):
    """
    Modelo abstracto para cualquier ejecución sobre un kernel con un modo de compilación
    """
    kernel = models.CharField(_('Kernel'), max_length=64, db_index=True)
    mode = models.CharField(_('Modo'), max_length=32, db_index=True)
    wcdl = models.PositiveIntegerField(_('WCDL (ciclos)'), default=10)
    sb_size = models.PositiveIntegerField(_('Tamaño del SB'), default=4)
    report = models.JSONField(_('Reporte'), default=dict, blank=True)

    class Meta:
        abstract = True
        ordering = ['-fecha_creacion']

    def __str__(self):
        return f'{self.kernel}/{self.mode} (wcdl={self.wcdl}, sb={self.sb_size})'
