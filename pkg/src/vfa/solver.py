"""
包含约束的工作表求解器 (Andersen 风格)

流不敏感, 上下文不敏感; 约束按创建顺序入队, 工作表先进先出,
边的插入顺序以及由解导出的所有产物都可复现。
"""

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, FrozenSet, List, Optional, Set, Tuple

from config.logging_config import setup_logger
from vfa.constraints import (
    AbstractLoc,
    ConstraintKind,
    ConstraintSet,
    Node,
    RegVar,
    expand,
    shift,
)

logger = setup_logger()


@dataclass(frozen=True)
class PointsToSolution:
    """每个节点的非空指向集合, 以及程序的访问索引"""

    pts: Dict[Node, FrozenSet[AbstractLoc]]
    def_addresses: Dict[int, RegVar] = field(default_factory=dict, compare=False)
    use_addresses: Dict[int, RegVar] = field(default_factory=dict, compare=False)
    slot_counts: Dict[int, int] = field(default_factory=dict, compare=False)

    def points_to(self, node: Node) -> FrozenSet[AbstractLoc]:
        return self.pts.get(node, frozenset())

    def to_dict(self) -> dict:
        rows = {str(node): [str(loc) for loc in sorted(locs)] for node, locs in self.pts.items()}
        return {key: rows[key] for key in sorted(rows)}


def _finish(pts: Dict[Node, Set[AbstractLoc]], constraints: ConstraintSet) -> PointsToSolution:
    return PointsToSolution(
        pts={node: frozenset(locs) for node, locs in pts.items() if locs},
        def_addresses=dict(constraints.def_addresses),
        use_addresses=dict(constraints.use_addresses),
        slot_counts=dict(constraints.slot_counts),
    )


class WorklistSolver:
    def __init__(self, constraints: ConstraintSet):
        self.constraints = constraints
        self.slot_counts = constraints.slot_counts
        self.pts: Dict[Node, Set[AbstractLoc]] = defaultdict(set)
        self.edges: Dict[Node, List[Tuple[Node, Optional[int]]]] = defaultdict(list)
        self.edge_keys: Set[Tuple[Node, Node, Optional[int]]] = set()
        self.loads: Dict[Node, List[Node]] = defaultdict(list)
        self.stores: Dict[Node, List[Node]] = defaultdict(list)
        self.worklist: Deque[Node] = deque()
        self.queued: Set[Node] = set()
        self.iterations = 0

    def _push(self, node: Node) -> None:
        if node not in self.queued:
            self.queued.add(node)
            self.worklist.append(node)

    def _transform(self, locs: Set[AbstractLoc], delta: Optional[int]) -> Set[AbstractLoc]:
        if delta is None:
            return locs
        return {shift(loc, delta, self.slot_counts) for loc in locs}

    def _flow(self, src: Node, dest: Node, delta: Optional[int]) -> None:
        incoming = self._transform(self.pts[src], delta)
        if not incoming <= self.pts[dest]:
            self.pts[dest] |= incoming
            self._push(dest)

    def _add_edge(self, src: Node, dest: Node, delta: Optional[int] = None) -> None:
        key = (src, dest, delta)
        if key in self.edge_keys:
            return
        self.edge_keys.add(key)
        self.edges[src].append((dest, delta))
        self._flow(src, dest, delta)

    def solve(self) -> PointsToSolution:
        for c in self.constraints.constraints:
            if c.kind is ConstraintKind.ADDRESS_OF:
                self.pts[c.dest].add(c.src)
                self._push(c.dest)
            elif c.kind is ConstraintKind.COPY:
                self._add_edge(c.src, c.dest)
            elif c.kind is ConstraintKind.FIELD:
                self._add_edge(c.src, c.dest, c.delta)
            elif c.kind is ConstraintKind.LOAD:
                self.loads[c.src].append(c.dest)
                self._push(c.src)
            else:
                self.stores[c.dest].append(c.src)
                self._push(c.dest)

        while self.worklist:
            node = self.worklist.popleft()
            self.queued.discard(node)
            self.iterations += 1
            if self.loads.get(node) or self.stores.get(node):
                targets = sorted({t for loc in self.pts[node] for t in expand(loc, self.slot_counts)})
                for loc in targets:
                    for dest in self.loads.get(node, ()):
                        self._add_edge(loc, dest)
                    for src in self.stores.get(node, ()):
                        self._add_edge(src, loc)
            for dest, delta in list(self.edges.get(node, ())):
                self._flow(node, dest, delta)

        logger.debug(
            f"Points-to fixpoint after {self.iterations} worklist steps, "
            f"{len(self.edge_keys)} edges"
        )
        return _finish(self.pts, self.constraints)


def solve_points_to(constraints: ConstraintSet) -> PointsToSolution:
    """包含规则的最小不动点"""
    return WorklistSolver(constraints).solve()


def solve_naive(constraints: ConstraintSet) -> PointsToSolution:
    """
    参照实现: 对每条约束反复应用所有规则直到不再变化
    """
    counts = constraints.slot_counts
    pts: Dict[Node, Set[AbstractLoc]] = defaultdict(set)
    changed = True
    while changed:
        changed = False
        for c in constraints.constraints:
            if c.kind is ConstraintKind.ADDRESS_OF:
                updates = [(c.dest, {c.src})]
            elif c.kind is ConstraintKind.COPY:
                updates = [(c.dest, set(pts[c.src]))]
            elif c.kind is ConstraintKind.FIELD:
                updates = [(c.dest, {shift(loc, c.delta, counts) for loc in pts[c.src]})]
            elif c.kind is ConstraintKind.LOAD:
                found: Set[AbstractLoc] = set()
                for loc in list(pts[c.src]):
                    for slot in expand(loc, counts):
                        found |= pts[slot]
                updates = [(c.dest, found)]
            else:
                updates = [
                    (slot, set(pts[c.src]))
                    for loc in list(pts[c.dest])
                    for slot in expand(loc, counts)
                ]
            for node, locs in updates:
                if not locs <= pts[node]:
                    pts[node] |= locs
                    changed = True
    return _finish(pts, constraints)
