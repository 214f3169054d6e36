"""
Serializers del harness: validan las opciones de compilación y de
simulación tanto en la API como en los comandos de gestión
"""
from django.conf import settings
from drf_spectacular.types import OpenApiTypes
from drf_spectacular.utils import extend_schema_field
from rest_framework import serializers

from apps.common.exceptions import ConfigurationError, ToolchainError
from apps.ir.parser import parse_ir
from apps.microsim.config import CHECKPOINT_RELEASES, CLQ_MODES, SimConfig
from apps.microsim.core import FAULT_TARGETS

from .models import FaultCampaign, SimulationRun
from .pipeline import MODES, CompileOptions, kernel_names, load_kernel
from .sweep import CLQ_CHOICES, EXPERIMENTS


def _drop_none(data: dict) -> dict:
    return {k: v for k, v in data.items() if v is not None}


# ============================================================================
# OPCIONES
# ============================================================================

class SimConfigSerializer(serializers.Serializer):
    """Parámetros del núcleo simulado; lo que falta sale de settings"""
    issue_width = serializers.IntegerField(required=False, min_value=1)
    memory_ports = serializers.IntegerField(required=False, min_value=1)
    latency_alu = serializers.IntegerField(required=False, min_value=1)
    latency_mul = serializers.IntegerField(required=False, min_value=1)
    latency_branch = serializers.IntegerField(required=False, min_value=0)
    load_hit = serializers.IntegerField(required=False, min_value=1)
    load_miss = serializers.IntegerField(required=False, min_value=1)
    redirect_penalty = serializers.IntegerField(required=False, min_value=0)
    sb_size = serializers.IntegerField(required=False)
    wcdl = serializers.IntegerField(required=False)
    clq_mode = serializers.ChoiceField(choices=CLQ_MODES, required=False)
    clq_entries = serializers.IntegerField(required=False)
    colors = serializers.IntegerField(required=False)
    fast_release = serializers.BooleanField(required=False, allow_null=True, default=None)
    checkpoint_release = serializers.ChoiceField(choices=CHECKPOINT_RELEASES, required=False)
    max_cycles = serializers.IntegerField(required=False, min_value=1)

    def validate(self, attrs):
        try:
            SimConfig.from_settings(**attrs)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def overrides(self) -> dict:
        return _drop_none(dict(self.validated_data))


class CompileOptionsSerializer(serializers.Serializer):
    """Interruptores de los pases; lo que falta lo decide el modo"""
    sb_size = serializers.IntegerField(required=False)
    livm = serializers.BooleanField(required=False, allow_null=True, default=None)
    prune = serializers.BooleanField(required=False, allow_null=True, default=None)
    licm_sink = serializers.BooleanField(required=False, allow_null=True, default=None)
    sched = serializers.BooleanField(required=False, allow_null=True, default=None)
    regs = serializers.IntegerField(required=False)
    write_weight = serializers.FloatField(required=False)

    def validate(self, attrs):
        try:
            CompileOptions.from_settings(**attrs)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def overrides(self) -> dict:
        return _drop_none(dict(self.validated_data))


# ============================================================================
# PETICIONES
# ============================================================================

class ProgramRequestSerializer(serializers.Serializer):
    """Un kernel incluido o un programa IR en línea, y un modo"""
    kernel = serializers.CharField(required=False)
    source = serializers.CharField(required=False, trim_whitespace=False)
    mode = serializers.ChoiceField(choices=list(MODES), default='turnpike')
    options = CompileOptionsSerializer(required=False)

    def validate_kernel(self, value):
        if value not in kernel_names():
            raise serializers.ValidationError(f'kernel desconocido "{value}"')
        return value

    def validate(self, attrs):
        if bool(attrs.get('kernel')) == bool(attrs.get('source')):
            raise serializers.ValidationError('indique exactamente uno de "kernel" o "source"')
        if attrs.get('source'):
            try:
                attrs['program'] = parse_ir(attrs['source'])
            except ToolchainError as exc:
                raise serializers.ValidationError({'source': str(exc)})
        else:
            attrs['program'] = load_kernel(attrs['kernel'])
        return attrs

    def compile_overrides(self) -> dict:
        return _drop_none(dict(self.validated_data.get('options') or {}))

    @property
    def program_label(self) -> str:
        return self.validated_data.get('kernel') or 'inline'


class SimulationRequestSerializer(ProgramRequestSerializer):
    config = SimConfigSerializer(required=False)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        compiled = (attrs.get('options') or {}).get('sb_size')
        simulated = (attrs.get('config') or {}).get('sb_size')
        if compiled is not None and simulated is not None and simulated < compiled:
            raise serializers.ValidationError(
                f'el SB simulado ({simulated}) es menor que el usado al compilar ({compiled})'
            )
        return attrs

    def compile_overrides(self) -> dict:
        """Sin tamaño de SB explícito, se compila para el SB simulado"""
        overrides = super().compile_overrides()
        simulated = self.sim_overrides().get('sb_size')
        if simulated is not None:
            overrides.setdefault('sb_size', simulated)
        return overrides

    def sim_overrides(self) -> dict:
        return _drop_none(dict(self.validated_data.get('config') or {}))


class CampaignRequestSerializer(SimulationRequestSerializer):
    trials = serializers.IntegerField(required=False, min_value=1, max_value=100_000)
    seed = serializers.IntegerField(required=False)
    target_class = serializers.ChoiceField(choices=FAULT_TARGETS, required=False, allow_null=True)
    negative_control = serializers.BooleanField(default=False)
    jobs = serializers.IntegerField(required=False, min_value=1)

    def validate_mode(self, value):
        if value == 'baseline':
            raise serializers.ValidationError('la máquina base no tolera fallos')
        return value

    def campaign_arguments(self) -> dict:
        data = self.validated_data
        return {
            'trials': data.get('trials', settings.FAULTS_DEFAULT_TRIALS),
            'seed': data.get('seed', settings.FAULTS_DEFAULT_SEED),
            'target_class': data.get('target_class'),
            'negative_control': data.get('negative_control', False),
            'jobs': data.get('jobs', 1),
        }


class SweepRequestSerializer(serializers.Serializer):
    experiments = serializers.ListField(
        child=serializers.ChoiceField(choices=list(EXPERIMENTS)), allow_empty=False,
    )
    kernels = serializers.ListField(child=serializers.CharField(), required=False)
    jobs = serializers.IntegerField(required=False, min_value=1)
    wcdl = serializers.IntegerField(required=False, min_value=1)
    sb_size = serializers.IntegerField(required=False, min_value=2)
    clq = serializers.ChoiceField(choices=CLQ_CHOICES, required=False)

    def validate_kernels(self, value):
        unknown = sorted(set(value) - set(kernel_names()))
        if unknown:
            raise serializers.ValidationError(f'kernels desconocidos: {", ".join(unknown)}')
        return value

    def defaults(self) -> dict:
        return {k: self.validated_data[k] for k in ('wcdl', 'sb_size', 'clq') if k in self.validated_data}


# ============================================================================
# MODELOS
# ============================================================================

class SimulationRunSerializer(serializers.ModelSerializer):
    overhead = serializers.SerializerMethodField()

    @extend_schema_field(OpenApiTypes.FLOAT)
    def get_overhead(self, obj):
        return obj.overhead

    class Meta:
        model = SimulationRun
        fields = [
            'id', 'kernel', 'mode', 'wcdl', 'sb_size', 'clq', 'cycles', 'baseline_cycles',
            'overhead', 'instructions', 'compile_options', 'config', 'report', 'fecha_creacion',
        ]
        read_only_fields = fields


class SimulationRunListSerializer(SimulationRunSerializer):
    """Listado sin el informe completo"""

    class Meta(SimulationRunSerializer.Meta):
        fields = [
            'id', 'kernel', 'mode', 'wcdl', 'sb_size', 'clq', 'cycles', 'baseline_cycles',
            'overhead', 'instructions', 'fecha_creacion',
        ]
        read_only_fields = fields


class FaultCampaignSerializer(serializers.ModelSerializer):
    success_rate = serializers.SerializerMethodField()

    @extend_schema_field(OpenApiTypes.FLOAT)
    def get_success_rate(self, obj):
        return obj.success_rate

    class Meta:
        model = FaultCampaign
        fields = [
            'id', 'kernel', 'mode', 'wcdl', 'sb_size', 'trials', 'seed', 'target_class',
            'negative_control', 'recovered', 'masked', 'failed', 'success_rate', 'report',
            'fecha_creacion',
        ]
        read_only_fields = fields
