"""
Ejecuciones persistidas del harness: simulaciones y campañas de fallos
"""
from django.db import models

from apps.common.models import KernelRunModel


class SimulationRun(KernelRunModel):
    """Una simulación sin fallos de un kernel compilado en un modo"""
    CLQ_CHOICES = [
        ('1', '1 entrada'),
        ('2', '2 entradas'),
        ('4', '4 entradas'),
        ('ideal', 'Ideal'),
    ]

    clq = models.CharField(max_length=8, choices=CLQ_CHOICES, default='2')
    compile_options = models.JSONField(default=dict, blank=True)
    config = models.JSONField(default=dict, blank=True)
    cycles = models.PositiveBigIntegerField(default=0)
    baseline_cycles = models.PositiveBigIntegerField(null=True, blank=True)
    instructions = models.PositiveBigIntegerField(default=0)

    class Meta(KernelRunModel.Meta):
        db_table = 'simulation_runs'
        verbose_name = 'Simulación'
        verbose_name_plural = 'Simulaciones'

    @property
    def overhead(self):
        """Sobrecarga frente al baseline sin resiliencia"""
        if not self.baseline_cycles:
            return None
        return self.cycles / self.baseline_cycles - 1


class FaultCampaign(KernelRunModel):
    """Campaña de inyección de fallos contra la ejecución dorada"""
    TARGET_CHOICES = [
        ('register', 'Registro'),
        ('store-value', 'Valor de store'),
        ('store-address', 'Dirección de store'),
    ]

    trials = models.PositiveIntegerField(default=1000)
    seed = models.BigIntegerField(default=2024)
    target_class = models.CharField(max_length=20, choices=TARGET_CHOICES, null=True, blank=True)
    negative_control = models.BooleanField(default=False)
    recovered = models.PositiveIntegerField(default=0)
    masked = models.PositiveIntegerField(default=0)
    failed = models.PositiveIntegerField(default=0)

    class Meta(KernelRunModel.Meta):
        db_table = 'fault_campaigns'
        verbose_name = 'Campaña de fallos'
        verbose_name_plural = 'Campañas de fallos'

    @property
    def success_rate(self):
        return (self.recovered + self.masked) / self.trials if self.trials else 0.0
