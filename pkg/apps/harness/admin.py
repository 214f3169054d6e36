"""
Configuración del admin para las ejecuciones del harness
"""
from django.contrib import admin

from .models import FaultCampaign, SimulationRun


@admin.register(SimulationRun)
class SimulationRunAdmin(admin.ModelAdmin):
    list_display = ['kernel', 'mode', 'wcdl', 'sb_size', 'clq', 'cycles', 'overhead_pct', 'fecha_creacion']
    list_filter = ['mode', 'clq', 'sb_size', 'fecha_creacion']
    search_fields = ['kernel', 'mode']
    readonly_fields = ['fecha_creacion', 'fecha_actualizacion', 'report', 'config', 'compile_options']

    def overhead_pct(self, obj):
        """Sobrecarga en porcentaje"""
        return '-' if obj.overhead is None else f'{obj.overhead * 100:.2f}%'
    overhead_pct.short_description = 'Sobrecarga'


@admin.register(FaultCampaign)
class FaultCampaignAdmin(admin.ModelAdmin):
    list_display = ['kernel', 'mode', 'trials', 'seed', 'recovered', 'masked', 'failed', 'negative_control']
    list_filter = ['mode', 'target_class', 'negative_control']
    search_fields = ['kernel']
    readonly_fields = ['fecha_creacion', 'fecha_actualizacion', 'report']
