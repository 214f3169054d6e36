"""
Compila y simula un programa sin fallos
"""
import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from apps.common.exceptions import ToolchainError
from apps.harness.cli import (
    add_compile_arguments, add_program_arguments, add_sim_arguments, base_config,
    compile_overrides, load_program, program_label, sim_overrides, write_output,
)
from apps.harness.pipeline import run_program


class Command(BaseCommand):
    help = ('Simula un programa compilado en el modo indicado; comprueba que la memoria final '
            'coincide con el intérprete y emite el informe en JSON o CSV')

    def add_arguments(self, parser):
        add_program_arguments(parser)
        add_compile_arguments(parser)
        add_sim_arguments(parser)
        parser.add_argument('--trace', help='Fichero donde volcar la traza ciclo a ciclo')
        parser.add_argument('--csv', action='store_true', help='Informe como fila CSV')
        parser.add_argument('--out', help='Fichero de salida (por defecto, stdout)')

    def handle(self, *args, **options):
        program = load_program(options['program'])
        overrides = sim_overrides(options)
        if options['trace']:
            overrides['trace'] = True
        try:
            outcome = run_program(
                program, options['mode'],
                compile_overrides=compile_overrides(options),
                base=base_config(options),
                sim_overrides=overrides,
                label=program_label(options['program']),
            )
        except ToolchainError as exc:
            raise CommandError(str(exc))

        report = outcome.result.report
        if options['trace']:
            path = Path(options['trace'])
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text('\n'.join(report.trace) + '\n')
        text = report.to_csv() if options['csv'] else json.dumps(outcome.to_dict(), indent=2, sort_keys=True)
        write_output(self, text, options['out'])
