"""
Grafo de flujo de control de una función
"""
from functools import cached_property
from typing import Dict, List, Set, Tuple

from .instructions import Function, Opcode


class ControlFlowGraph:
    """Sucesores, predecesores y recorridos de una función"""

    def __init__(self, function: Function):
        self.function = function
        self.entry = function.entry.label
        self.successors: Dict[str, Tuple[str, ...]] = {}
        self.predecessors: Dict[str, List[str]] = {b.label: [] for b in function.blocks}
        for block in function.blocks:
            succs = tuple(dict.fromkeys(block.successors))
            self.successors[block.label] = succs
            for succ in succs:
                self.predecessors[succ].append(block.label)

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.function.labels

    @cached_property
    def layout_index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def _dfs(self):
        """DFS iterativo: devuelve (postorden, aristas de retroceso)"""
        postorder, retreating = [], []
        state = {self.entry: 'open'}
        stack = [(self.entry, iter(self.successors[self.entry]))]
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if child not in state:
                    state[child] = 'open'
                    stack.append((child, iter(self.successors[child])))
                    advanced = True
                    break
                if state[child] == 'open':
                    retreating.append((node, child))
            if not advanced:
                state[node] = 'done'
                postorder.append(node)
                stack.pop()
        return postorder, retreating

    @cached_property
    def reverse_postorder(self) -> Tuple[str, ...]:
        postorder, _ = self._dfs()
        return tuple(reversed(postorder))

    @cached_property
    def retreating_edges(self) -> Tuple[Tuple[str, str], ...]:
        _, retreating = self._dfs()
        return tuple(retreating)

    @cached_property
    def reachable(self) -> Set[str]:
        return set(self.reverse_postorder)

    @cached_property
    def exits(self) -> Tuple[str, ...]:
        """Bloques que terminan en ret"""
        return tuple(
            b.label for b in self.function.blocks
            if b.terminator.opcode is Opcode.RET and b.label in self.reachable
        )

    def is_fallthrough(self, source: str, target: str) -> bool:
        return self.layout_index[target] == self.layout_index[source] + 1
