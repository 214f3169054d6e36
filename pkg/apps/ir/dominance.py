"""
Dominadores y post-dominadores por punto fijo sobre conjuntos
"""
from functools import reduce
from typing import Dict, Iterable, Optional, Set, Tuple

from .cfg import ControlFlowGraph

EXIT = '<exit>'


def _fixpoint(nodes, start, preds_of) -> Dict[str, Set[str]]:
    # Un nodo domina a n si domina a todos los predecesores de n
    universe = set(nodes)
    dominated_by = {n: set(universe) for n in nodes}
    dominated_by[start] = {start}
    changed = True
    while changed:
        changed = False
        for node in nodes:
            if node == start:
                continue
            preds = [p for p in preds_of(node) if p in dominated_by]
            if preds:
                new = {node} | reduce(lambda a, b: a & b, (dominated_by[p] for p in preds))
            else:
                new = {node}
            if new != dominated_by[node]:
                dominated_by[node] = new
                changed = True
    return dominated_by


def _immediate(dominated_by, start) -> Dict[str, Optional[str]]:
    idom = {start: None}
    for node, doms in dominated_by.items():
        if node == start:
            continue
        strict = doms - {node}
        # el dominador inmediato es el dominador estricto con más dominadores
        idom[node] = max(strict, key=lambda d: len(dominated_by[d])) if strict else None
    return idom


class DominatorTree:
    """Relación de dominancia sobre los bloques alcanzables"""

    def __init__(self, cfg: ControlFlowGraph):
        self.cfg = cfg
        order = list(cfg.reverse_postorder)
        self.dominated_by = _fixpoint(order, cfg.entry, lambda n: cfg.predecessors[n])
        self.idom = _immediate(self.dominated_by, cfg.entry)

    def dominates(self, a: str, b: str) -> bool:
        return b in self.dominated_by and a in self.dominated_by[b]

    def strictly_dominates(self, a: str, b: str) -> bool:
        return a != b and self.dominates(a, b)

    def point_dominates(self, a: Tuple[str, int], b: Tuple[str, int]) -> bool:
        """¿La instrucción en a se ejecuta antes que b en todo camino hacia b?"""
        if a[0] == b[0]:
            return a[1] < b[1]
        return self.strictly_dominates(a[0], b[0])

    def nearest_common_dominator(self, blocks: Iterable[str]) -> str:
        common = reduce(lambda x, y: x & y, (self.dominated_by[b] for b in blocks))
        return max(common, key=lambda d: len(self.dominated_by[d]))


class PostDominatorTree:
    """Post-dominancia con un nodo de salida virtual que recibe todos los ret"""

    def __init__(self, cfg: ControlFlowGraph):
        self.cfg = cfg
        nodes = [EXIT] + list(reversed(cfg.reverse_postorder))
        exits = set(cfg.exits)

        def succs_as_preds(node):
            if node == EXIT:
                return []
            succs = list(cfg.successors[node])
            return succs + [EXIT] if node in exits else succs

        self.post_dominated_by = _fixpoint(nodes, EXIT, succs_as_preds)
        self.ipdom = _immediate(self.post_dominated_by, EXIT)

    def post_dominates(self, a: str, b: str) -> bool:
        return b in self.post_dominated_by and a in self.post_dominated_by[b]
