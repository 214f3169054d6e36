"""
Campaña de inyección de fallos contra la ejecución dorada
"""
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.common.exceptions import ToolchainError
from apps.faults.campaign import run_campaign
from apps.harness.cli import (
    add_compile_arguments, add_program_arguments, add_sim_arguments, base_config,
    compile_overrides, load_program, sim_overrides, write_output,
)
from apps.harness.pipeline import compile_program, get_mode
from apps.microsim.core import FAULT_TARGETS


class Command(BaseCommand):
    help = ('Inyecta un fallo por prueba (bit flip en registro, valor o dirección de store) y '
            'clasifica cada prueba como recuperada, enmascarada o fallida')

    def add_arguments(self, parser):
        add_program_arguments(parser)
        add_compile_arguments(parser)
        add_sim_arguments(parser)
        parser.add_argument('--n', type=int, default=settings.FAULTS_DEFAULT_TRIALS, help='Número de pruebas')
        parser.add_argument('--seed', type=int, default=settings.FAULTS_DEFAULT_SEED)
        parser.add_argument('--target-class', choices=FAULT_TARGETS)
        parser.add_argument('--negative-control', action='store_true',
                            help='Checkpoints escritos sin coloreado; se espera que fallen pruebas')
        parser.add_argument('--jobs', type=int, default=1)
        parser.add_argument('--out', help='Fichero JSON de salida (por defecto, stdout)')

    def handle(self, *args, **options):
        if options['mode'] == 'baseline':
            raise CommandError('la máquina base no tolera fallos; elija un modo resiliente')
        if options['n'] < 1:
            raise CommandError('--n debe ser >= 1')
        program = load_program(options['program'])
        preset = get_mode(options['mode'])
        try:
            artifact = compile_program(program, preset.compile_options(**compile_overrides(options)))
            config = preset.sim_config(base_config(options), **sim_overrides(options))
            report = run_campaign(
                artifact.program, config, artifact.recovery,
                trials=options['n'],
                seed=options['seed'],
                target_class=options['target_class'],
                negative_control=options['negative_control'],
                jobs=max(1, options['jobs']),
            )
        except ToolchainError as exc:
            raise CommandError(str(exc))

        write_output(self, report.to_json(), options['out'])
        summary = (f'{report.trials} pruebas: {report.outcomes["recovered"]} recuperadas, '
                   f'{report.outcomes["masked"]} enmascaradas, {report.outcomes["failed"]} fallidas')
        style = self.style.WARNING if report.outcomes['failed'] else self.style.SUCCESS
        self.stderr.write(style(summary))
