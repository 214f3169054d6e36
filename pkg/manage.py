#!/usr/bin/env python
"""
Punto de entrada de la cadena de herramientas.

Además de los comandos de Django expone `compile`, `run`, `inject`,
`sweep` y `report` (ver apps/harness/management/commands).
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings.development')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "No se pudo importar Django. ¿Está instalado y activo el entorno virtual "
            "(pip install -r requirements.txt)?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
