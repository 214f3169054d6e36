"""
Argumentos compartidos por los comandos de gestión.

Los valores pasan por los mismos serializers que la API, así que un flag
inválido produce el mismo mensaje por las dos vías.
"""
from pathlib import Path

from django.core.management.base import CommandError

from apps.common.exceptions import ToolchainError
from apps.microsim.config import CLQ_MODES, SimConfig

from .pipeline import MODES, read_program
from .serializers import CompileOptionsSerializer, SimConfigSerializer


def add_program_arguments(parser, default_mode='turnpike'):
    parser.add_argument('program', help='Nombre de un kernel incluido o ruta de un fichero .ir')
    parser.add_argument('--mode', default=default_mode, choices=list(MODES))


def add_compile_arguments(parser):
    group = parser.add_argument_group('compilación')
    group.add_argument('--sb-size', type=int, help='Presupuesto de stores por región (y tamaño del SB)')
    group.add_argument('--no-prune', dest='prune', action='store_const', const=False)
    group.add_argument('--no-licm-sink', dest='licm_sink', action='store_const', const=False)
    group.add_argument('--no-livm', dest='livm', action='store_const', const=False)
    group.add_argument('--no-sched', dest='sched', action='store_const', const=False)
    group.add_argument('--regs', type=int, help='Registros físicos disponibles')
    group.add_argument('--write-weight', type=float, help='Peso de las escrituras en el coste de spill')


def add_sim_arguments(parser):
    group = parser.add_argument_group('simulación')
    group.add_argument('--config', help='Fichero clave=valor con la configuración del núcleo')
    group.add_argument('--wcdl', type=int, help='Latencia de detección en el peor caso (ciclos)')
    group.add_argument('--clq', choices=CLQ_MODES, help='Diseño del CLQ')
    group.add_argument('--clq-entries', type=int, help='Entradas del CLQ compacto')
    group.add_argument('--no-fast-release', dest='fast_release', action='store_const', const=False)
    group.add_argument('--no-coloring', dest='coloring', action='store_const', const=False)


def _validated(serializer_class, data: dict) -> dict:
    serializer = serializer_class(data={k: v for k, v in data.items() if v is not None})
    if not serializer.is_valid():
        raise CommandError(flatten_errors(serializer.errors))
    return serializer.overrides()


def flatten_errors(errors) -> str:
    if isinstance(errors, dict):
        return '; '.join(f'{k}: {flatten_errors(v)}' if k != 'non_field_errors' else flatten_errors(v) for k, v in errors.items())
    if isinstance(errors, list):
        return '; '.join(flatten_errors(e) for e in errors)
    return str(errors)


def compile_overrides(options: dict) -> dict:
    return _validated(CompileOptionsSerializer, {
        'sb_size': options.get('sb_size'),
        'livm': options.get('livm'),
        'prune': options.get('prune'),
        'licm_sink': options.get('licm_sink'),
        'sched': options.get('sched'),
        'regs': options.get('regs'),
        'write_weight': options.get('write_weight'),
    })


def sim_overrides(options: dict) -> dict:
    data = {
        'sb_size': options.get('sb_size'),
        'wcdl': options.get('wcdl'),
        'clq_mode': options.get('clq'),
        'clq_entries': options.get('clq_entries'),
        'fast_release': options.get('fast_release'),
    }
    if options.get('coloring') is False:
        data['checkpoint_release'] = 'quarantine'
    return _validated(SimConfigSerializer, data)


def base_config(options: dict):
    """Configuración leída de `--config`, o None para usar settings"""
    path = options.get('config')
    if not path:
        return None
    if not Path(path).is_file():
        raise CommandError(f'no existe el fichero de configuración "{path}"')
    try:
        return SimConfig.from_file(path)
    except ToolchainError as exc:
        raise CommandError(str(exc))


def load_program(source: str):
    try:
        return read_program(source)
    except ToolchainError as exc:
        raise CommandError(str(exc))


def program_label(source: str) -> str:
    path = Path(source)
    return path.stem if path.suffix == '.ir' else source


def write_output(command, text: str, path=None) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text if text.endswith('\n') else text + '\n')
        command.stdout.write(command.style.SUCCESS(f'Escrito {path}'))
    else:
        command.stdout.write(text)
