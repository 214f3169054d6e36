"""
Filtros para las ejecuciones persistidas
"""
import django_filters

from .models import FaultCampaign, SimulationRun


class SimulationRunFilter(django_filters.FilterSet):
    """Filtros para simulaciones"""

    kernel = django_filters.CharFilter(field_name='kernel', lookup_expr='iexact')
    mode = django_filters.CharFilter(field_name='mode', lookup_expr='iexact')

    # Filtros por configuración
    wcdl_min = django_filters.NumberFilter(field_name='wcdl', lookup_expr='gte')
    wcdl_max = django_filters.NumberFilter(field_name='wcdl', lookup_expr='lte')
    sb_size = django_filters.NumberFilter(field_name='sb_size')

    # Filtros por fecha
    fecha_desde = django_filters.DateFilter(field_name='fecha_creacion', lookup_expr='gte')
    fecha_hasta = django_filters.DateFilter(field_name='fecha_creacion', lookup_expr='lte')

    class Meta:
        model = SimulationRun
        fields = {
            'clq': ['exact'],
            'cycles': ['gte', 'lte'],
        }


class FaultCampaignFilter(django_filters.FilterSet):
    """Filtros para campañas de fallos"""

    kernel = django_filters.CharFilter(field_name='kernel', lookup_expr='iexact')
    mode = django_filters.CharFilter(field_name='mode', lookup_expr='iexact')
    con_fallos = django_filters.BooleanFilter(method='filter_con_fallos')

    fecha_desde = django_filters.DateFilter(field_name='fecha_creacion', lookup_expr='gte')
    fecha_hasta = django_filters.DateFilter(field_name='fecha_creacion', lookup_expr='lte')

    class Meta:
        model = FaultCampaign
        fields = {
            'target_class': ['exact'],
            'negative_control': ['exact'],
            'seed': ['exact'],
        }

    def filter_con_fallos(self, queryset, name, value):
        """Campañas con alguna prueba fallida (o ninguna)"""
        if value:
            return queryset.filter(failed__gt=0)
        return queryset.filter(failed=0)
