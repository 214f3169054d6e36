"""
Jerarquía de errores compartida por el compilador, el simulador y el harness.

Las excepciones con argumentos propios definen `__reduce__` para poder
volver de los procesos del pool con sus atributos intactos.
"""


class ToolchainError(Exception):
    """Error base de toda la cadena de herramientas"""


# ============================================================================
# ERRORES DEL IR
# ============================================================================

class IRSyntaxError(ToolchainError):
    """Error de sintaxis en el texto IR, con línea y columna"""

    def __init__(self, message, line, column=1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f'{line}:{column}: {message}')

    def __reduce__(self):
        return self.__class__, (self.message, self.line, self.column)


class UndefinedLabel(ToolchainError):
    """Un salto apunta a una etiqueta que no existe"""

    def __init__(self, label, line=None):
        self.label = label
        self.line = line
        where = f' (línea {line})' if line else ''
        super().__init__(f'UndefinedLabel("{label}"){where}')

    def __reduce__(self):
        return self.__class__, (self.label, self.line)


class RegisterArityError(IRSyntaxError):
    """La instrucción no recibe el número de registros que su opcode exige"""


class IrreducibleCFG(ToolchainError):
    """El CFG de la función no es reducible"""

    def __init__(self, function, edges=()):
        self.function = function
        self.edges = tuple(edges)
        super().__init__(f'CFG irreducible en {function}: {list(self.edges)}')

    def __reduce__(self):
        return self.__class__, (self.function, self.edges)


# ============================================================================
# ERRORES DE CONFIGURACIÓN Y DE LOS PASES
# ============================================================================

class ConfigurationError(ToolchainError):
    """Parámetros fuera de rango (tamaño de SB, WCDL, registros, ...)"""


class AllocationError(ToolchainError):
    """La asignación de registros no puede satisfacer la presión de una instrucción"""


# ============================================================================
# ERRORES DEL SIMULADOR Y DEL MODELO DE FALLOS
# ============================================================================

class WatchdogExpired(ToolchainError):
    """La simulación superó el límite de ciclos"""

    def __init__(self, limit, snapshot):
        self.limit = limit
        self.snapshot = dict(snapshot)
        super().__init__(f'watchdog de {limit} ciclos agotado: {self.snapshot}')

    def __reduce__(self):
        return self.__class__, (self.limit, self.snapshot)


class HardFault(ToolchainError):
    """La recuperación no puede reconstruir el estado de una región"""


class RegionCapacityExceeded(ToolchainError):
    """El SB está lleno sólo con entradas de la región en curso; esperar no lo vaciaría"""

    def __init__(self, region, sb_size, snapshot):
        self.region = region
        self.sb_size = sb_size
        self.snapshot = dict(snapshot)
        super().__init__(f'la región {region} necesita más de {sb_size} entradas de SB: {self.snapshot}')

    def __reduce__(self):
        return self.__class__, (self.region, self.sb_size, self.snapshot)


class HardenedTargetError(ToolchainError):
    """Se intentó inyectar un fallo en una estructura endurecida"""

    def __init__(self, target):
        self.target = target
        super().__init__(f'{target} es una estructura endurecida; no admite fallos')

    def __reduce__(self):
        return self.__class__, (self.target,)


class InvariantViolation(ToolchainError):
    """Un oráculo detectó una violación (estado final distinto, categorías que no suman, ...)"""

    def __init__(self, message, diff=None):
        self.diff = diff or {}
        super().__init__(message)

    def __reduce__(self):
        return self.__class__, (self.args[0], self.diff)
