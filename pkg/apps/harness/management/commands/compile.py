"""
Compila un kernel o un fichero IR y vuelca el resultado
"""
import json

from django.core.management.base import BaseCommand, CommandError

from apps.common.exceptions import ToolchainError
from apps.harness.cli import (
    add_compile_arguments, add_program_arguments, compile_overrides, load_program, write_output,
)
from apps.harness.pipeline import compile_program, get_mode
from apps.ir.printer import print_ir


class Command(BaseCommand):
    help = 'Compila un programa con el pipeline resiliente y muestra el IR o el artefacto completo en JSON'

    def add_arguments(self, parser):
        add_program_arguments(parser)
        add_compile_arguments(parser)
        parser.add_argument('--json', action='store_true', help='Artefacto completo: plan, regiones, asignación, recuperación')
        parser.add_argument('--regions', action='store_true', help='Solo la tabla de regiones en JSON')
        parser.add_argument('--out', help='Fichero de salida (por defecto, stdout)')

    def handle(self, *args, **options):
        program = load_program(options['program'])
        try:
            artifact = compile_program(program, get_mode(options['mode']).compile_options(**compile_overrides(options)))
        except ToolchainError as exc:
            raise CommandError(str(exc))

        if options['regions']:
            text = json.dumps(artifact.regions.to_dict(), indent=2, sort_keys=True)
        elif options['json']:
            text = artifact.to_json()
        else:
            text = print_ir(artifact.program)
        write_output(self, text, options['out'])
