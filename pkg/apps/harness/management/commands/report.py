"""
Tablas y comprobaciones de tendencia a partir de un barrido
"""
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.common.exceptions import ToolchainError
from apps.harness.reporting import FAILED, summarize, write_report
from apps.harness.sweep import SWEEP_FILE, read_csv


class Command(BaseCommand):
    help = ('Lee <out-dir>/sweep.csv y escribe el desglose de stores, la ocupación del CLQ '
            'y las comprobaciones de tendencia')

    def add_arguments(self, parser):
        parser.add_argument('--out-dir', default=settings.HARNESS_OUT_DIR)
        parser.add_argument('--input', help='CSV del barrido (por defecto, <out-dir>/sweep.csv)')
        parser.add_argument('--strict', action='store_true', help='Termina con error si falla alguna tendencia')

    def handle(self, *args, **options):
        out_dir = Path(options['out_dir'])
        source = Path(options['input']) if options['input'] else out_dir / SWEEP_FILE
        if not source.is_file():
            raise CommandError(f'no existe "{source}"; ejecute antes el comando sweep')
        rows = read_csv(source)
        try:
            summary = summarize(rows)
            paths = write_report(rows, out_dir, summary)
        except ToolchainError as exc:
            raise CommandError(str(exc))

        checks = summary['checks']
        for check in checks:
            style = self.style.ERROR if check['status'] == FAILED else self.style.SUCCESS
            self.stdout.write(style(f'{check["name"]}: {check["status"]}'))
        for path in paths.values():
            self.stdout.write(f'Escrito {path}')
        failed = [c['name'] for c in checks if c['status'] == FAILED]
        if failed and options['strict']:
            raise CommandError(f'tendencias no cumplidas: {", ".join(failed)}')
