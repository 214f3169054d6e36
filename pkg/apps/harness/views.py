"""
Vistas de la API del harness
"""
import logging

from drf_spectacular.utils import OpenApiExample, extend_schema
from rest_framework import mixins, permissions, status
from rest_framework.filters import OrderingFilter
from rest_framework.response import Response
from rest_framework.views import APIView
from rest_framework.viewsets import GenericViewSet
from django_filters.rest_framework import DjangoFilterBackend

from apps.common.exceptions import ToolchainError
from apps.faults.campaign import run_campaign

from .filters import FaultCampaignFilter, SimulationRunFilter
from .models import FaultCampaign, SimulationRun
from .pipeline import MODES, compile_program, get_mode, kernel_names, load_kernel, run_program
from .serializers import (
    CampaignRequestSerializer, FaultCampaignSerializer, ProgramRequestSerializer,
    SimulationRequestSerializer, SimulationRunListSerializer, SimulationRunSerializer,
)
from .sweep import clq_label

logger = logging.getLogger(__name__)


def error_response(exc: ToolchainError) -> Response:
    return Response({'error': str(exc)}, status=status.HTTP_400_BAD_REQUEST)


class KernelListView(APIView):
    """Kernels incluidos y modos disponibles"""
    permission_classes = [permissions.AllowAny]

    @extend_schema(
        summary="Listar kernels",
        description="Kernels IR incluidos con su tamaño estático, y los modos de compilación",
        tags=['Kernels']
    )
    def get(self, request):
        kernels = [
            {
                'name': name,
                'instructions': load_kernel(name).static_size(),
                'functions': [f.name for f in load_kernel(name).functions],
            }
            for name in kernel_names()
        ]
        modes = [{'name': m.name, 'description': m.description} for m in MODES.values()]
        return Response({'kernels': kernels, 'modes': modes})


class CompileView(APIView):
    """Compila un kernel o un programa en línea y devuelve el artefacto"""
    permission_classes = [permissions.AllowAny]

    @extend_schema(
        summary="Compilar",
        description="Ejecuta el pipeline completo y devuelve programa, plan de checkpoints, "
                    "regiones, asignación, bloques de recuperación y conteos de stores",
        request=ProgramRequestSerializer,
        examples=[
            OpenApiExample(
                "Kernel vecsum sin poda",
                value={"kernel": "vecsum", "mode": "turnpike", "options": {"prune": False, "sb_size": 8}},
            ),
        ],
        tags=['Compilación']
    )
    def post(self, request):
        serializer = ProgramRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        mode = get_mode(serializer.validated_data['mode'])
        try:
            options = mode.compile_options(**serializer.compile_overrides())
            artifact = compile_program(serializer.validated_data['program'], options)
        except ToolchainError as exc:
            return error_response(exc)
        return Response(artifact.to_dict())


class SimulationRunViewSet(mixins.CreateModelMixin, mixins.ListModelMixin,
                           mixins.RetrieveModelMixin, GenericViewSet):
    """Simulaciones persistidas; crear una la ejecuta"""
    queryset = SimulationRun.objects.all()
    permission_classes = [permissions.AllowAny]
    filter_backends = [DjangoFilterBackend, OrderingFilter]
    filterset_class = SimulationRunFilter
    ordering_fields = ['fecha_creacion', 'cycles', 'wcdl', 'sb_size']
    ordering = ['-fecha_creacion']

    def get_serializer_class(self):
        if self.action == 'list':
            return SimulationRunListSerializer
        if self.action == 'create':
            return SimulationRequestSerializer
        return SimulationRunSerializer

    @extend_schema(
        summary="Simular",
        description="Compila el programa en el modo pedido, lo simula sin fallos, comprueba "
                    "la memoria final contra el intérprete y guarda el resultado",
        request=SimulationRequestSerializer,
        responses={201: SimulationRunSerializer},
        tags=['Simulaciones']
    )
    def create(self, request, *args, **kwargs):
        serializer = SimulationRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        try:
            outcome = run_program(
                data['program'], data['mode'],
                compile_overrides=serializer.compile_overrides(),
                sim_overrides=serializer.sim_overrides(),
                label=serializer.program_label,
            )
            baseline = run_program(data['program'], 'baseline', label=serializer.program_label)
        except ToolchainError as exc:
            return error_response(exc)

        config = outcome.config
        run = SimulationRun.objects.create(
            kernel=serializer.program_label,
            mode=data['mode'],
            wcdl=config.wcdl,
            sb_size=config.sb_size,
            clq=clq_label(config.clq_mode, config.clq_entries),
            compile_options=outcome.artifact.options.to_dict(),
            config=config.to_dict(),
            cycles=outcome.result.report.cycles,
            baseline_cycles=baseline.result.report.cycles,
            instructions=outcome.result.report.instructions,
            report=outcome.result.report.to_dict(),
        )
        logger.info('api: simulación %s guardada (%d ciclos)', run, run.cycles)
        return Response(SimulationRunSerializer(run).data, status=status.HTTP_201_CREATED)


class FaultCampaignViewSet(mixins.CreateModelMixin, mixins.ListModelMixin,
                           mixins.RetrieveModelMixin, GenericViewSet):
    """Campañas de fallos persistidas; crear una la ejecuta"""
    queryset = FaultCampaign.objects.all()
    serializer_class = FaultCampaignSerializer
    permission_classes = [permissions.AllowAny]
    filter_backends = [DjangoFilterBackend, OrderingFilter]
    filterset_class = FaultCampaignFilter
    ordering_fields = ['fecha_creacion', 'trials', 'failed']
    ordering = ['-fecha_creacion']

    def get_serializer_class(self):
        if self.action == 'create':
            return CampaignRequestSerializer
        return FaultCampaignSerializer

    @extend_schema(
        summary="Lanzar campaña de fallos",
        description="Inyecta un fallo por prueba y clasifica cada resultado contra la ejecución dorada",
        request=CampaignRequestSerializer,
        responses={201: FaultCampaignSerializer},
        examples=[
            OpenApiExample(
                "Control negativo",
                value={"kernel": "vecsum", "trials": 200, "seed": 7, "negative_control": True},
            ),
        ],
        tags=['Fallos']
    )
    def create(self, request, *args, **kwargs):
        serializer = CampaignRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        arguments = serializer.campaign_arguments()
        try:
            preset = get_mode(data['mode'])
            artifact = compile_program(data['program'], preset.compile_options(**serializer.compile_overrides()))
            config = preset.sim_config(**serializer.sim_overrides())
            report = run_campaign(artifact.program, config, artifact.recovery, **arguments)
        except ToolchainError as exc:
            return error_response(exc)

        campaign = FaultCampaign.objects.create(
            kernel=serializer.program_label,
            mode=data['mode'],
            wcdl=config.wcdl,
            sb_size=config.sb_size,
            trials=report.trials,
            seed=report.seed,
            target_class=report.target_class,
            negative_control=report.negative_control,
            recovered=report.outcomes['recovered'],
            masked=report.outcomes['masked'],
            failed=report.outcomes['failed'],
            report=report.to_dict(),
        )
        logger.info('api: campaña %s guardada (%d fallidas)', campaign, campaign.failed)
        return Response(FaultCampaignSerializer(campaign).data, status=status.HTTP_201_CREATED)
