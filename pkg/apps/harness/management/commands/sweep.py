"""
Barrido de experimentos sobre los kernels incluidos
"""
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.common.exceptions import ToolchainError
from apps.harness.cli import flatten_errors
from apps.harness.serializers import SweepRequestSerializer
from apps.harness.sweep import EXPERIMENTS, SWEEP_FILE, sweep, write_csv


class Command(BaseCommand):
    help = 'Ejecuta los experimentos indicados y escribe una fila CSV por celda en <out-dir>/sweep.csv'

    def add_arguments(self, parser):
        parser.add_argument('--experiment', action='append', choices=list(EXPERIMENTS),
                            help='Repetible; por defecto, todos')
        parser.add_argument('--kernels', help='Lista separada por comas; por defecto, todos')
        parser.add_argument('--jobs', type=int)
        parser.add_argument('--wcdl', type=int)
        parser.add_argument('--sb-size', type=int)
        parser.add_argument('--clq')
        parser.add_argument('--out-dir', default=settings.HARNESS_OUT_DIR)

    def handle(self, *args, **options):
        data = {
            'experiments': options['experiment'] or list(EXPERIMENTS),
            'kernels': [k.strip() for k in options['kernels'].split(',') if k.strip()] if options['kernels'] else None,
            'jobs': options['jobs'],
            'wcdl': options['wcdl'],
            'sb_size': options['sb_size'],
            'clq': options['clq'],
        }
        serializer = SweepRequestSerializer(data={k: v for k, v in data.items() if v is not None})
        if not serializer.is_valid():
            raise CommandError(flatten_errors(serializer.errors))
        validated = serializer.validated_data

        try:
            rows = sweep(
                validated['experiments'],
                kernels=validated.get('kernels'),
                jobs=validated.get('jobs'),
                defaults=serializer.defaults(),
            )
        except ToolchainError as exc:
            raise CommandError(str(exc))

        path = write_csv(rows, Path(options['out_dir']) / SWEEP_FILE)
        self.stdout.write(self.style.SUCCESS(f'{len(rows)} filas en {path}'))
