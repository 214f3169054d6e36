"""
L1 de correspondencia directa para la latencia de las cargas
"""


class DirectMappedCache:

    def __init__(self, sets: int, line: int):
        self.sets = sets
        self.line = line
        self.tags = [None] * sets
        self.hits = 0
        self.misses = 0

    def access(self, address: int) -> bool:
        """Registra el acceso y devuelve True si acierta"""
        block = address // self.line
        index = block % self.sets
        if self.tags[index] == block:
            self.hits += 1
            return True
        self.tags[index] = block
        self.misses += 1
        return False
