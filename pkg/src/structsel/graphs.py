"""Digraph and bipartite machinery for structured systems.

State digraph: vertex x_j has an edge to x_i whenever A_ij is free; input
u_i links to x_j whenever B_ji is free.  The bipartite view pairs left
copies of the states against right copies plus the input vertices; an
edge set there is a candidate matching certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .model import SparsityPattern, StructuredSystem


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components of the state digraph.

    Components are ordered by their smallest state index, so downstream
    incidence rows are reproducible.  A component is a source when no edge
    enters it from another component.
    """

    components: tuple[frozenset[int], ...]
    condensation_edges: frozenset[tuple[int, int]]
    is_source: tuple[bool, ...]

    @property
    def source_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.is_source) if s)

    def source_components(self) -> tuple[frozenset[int], ...]:
        return tuple(self.components[i] for i in self.source_indices)

    def component_of(self) -> dict[int, int]:
        out = {}
        for idx, comp in enumerate(self.components):
            for v in comp:
                out[v] = idx
        return out


def _state_adjacency(a: SparsityPattern) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(a.rows)]
    for i, j in a.nonzeros:
        adj[j].append(i)  # edge x_j -> x_i
    for lst in adj:
        lst.sort()
    return adj


def scc_decompose(a: SparsityPattern) -> SccDecomposition:
    """Tarjan's algorithm, iterative, with components sorted by least member."""
    n = a.rows
    adj = _state_adjacency(a)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[frozenset[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            if ei < len(adj[v]):
                work[-1] = (v, ei + 1)
                w = adj[v][ei]
                if index[w] == -1:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = set()
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.add(w)
                        if w == v:
                            break
                    components.append(frozenset(comp))

    components.sort(key=min)
    comp_of = {}
    for idx, comp in enumerate(components):
        for v in comp:
            comp_of[v] = idx
    cond_edges = set()
    for i, j in a.nonzeros:
        ci, cj = comp_of[j], comp_of[i]
        if ci != cj:
            cond_edges.add((ci, cj))
    has_incoming = {b for _, b in cond_edges}
    is_source = tuple(idx not in has_incoming for idx in range(len(components)))
    return SccDecomposition(tuple(components), frozenset(cond_edges), is_source)


def input_reachable_states(sys: StructuredSystem, selected: Iterable[int]) -> frozenset[int]:
    """States reachable by a directed path from any selected input."""
    adj = _state_adjacency(sys.a)
    seen: set[int] = set()
    frontier: list[int] = []
    for j in sorted(set(selected)):
        if not (0 <= j < sys.m):
            raise ValueError(f"unknown input index {j}")
        for i in sorted(sys.b.column(j)):
            if i not in seen:
                seen.add(i)
                frontier.append(i)
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return frozenset(seen)


@dataclass(frozen=True)
class Matching:
    """Vertex-disjoint edge set of a bipartite graph, as left->right pairs."""

    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        lefts = [l for l, _ in self.edges]
        rights = [r for _, r in self.edges]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise ValueError("matching edges must be pairwise vertex-disjoint")

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def matched_left(self) -> frozenset[int]:
        return frozenset(l for l, _ in self.edges)


def max_matching(adjacency: Sequence[Sequence[int]]) -> dict[int, int]:
    """Hopcroft-Karp maximum matching, deterministic.

    ``adjacency[l]`` lists the right vertices of left vertex ``l``; vertices
    are scanned in ascending index order so the returned pairing (a map
    left -> right) is reproducible.  Only the matching size is unique.
    """
    n_left = len(adjacency)
    adj = [sorted(set(neigh)) for neigh in adjacency]
    INF = float("inf")
    pair_left: dict[int, int] = {}
    pair_right: dict[int, int] = {}
    dist: dict[int, float] = {}

    def bfs() -> bool:
        queue = []
        for l in range(n_left):
            if l not in pair_left:
                dist[l] = 0
                queue.append(l)
            else:
                dist[l] = INF
        found = INF
        head = 0
        while head < len(queue):
            l = queue[head]
            head += 1
            if dist[l] >= found:
                continue
            for r in adj[l]:
                other = pair_right.get(r)
                if other is None:
                    found = min(found, dist[l] + 1)
                elif dist[other] == INF:
                    dist[other] = dist[l] + 1
                    queue.append(other)
        return found != INF

    def dfs(l: int) -> bool:
        for r in adj[l]:
            other = pair_right.get(r)
            if other is None or (dist[other] == dist[l] + 1 and dfs(other)):
                pair_left[l] = r
                pair_right[r] = l
                return True
        dist[l] = INF
        return False

    while bfs():
        for l in range(n_left):
            if l not in pair_left:
                dfs(l)
    return dict(pair_left)


# Right-side vertex numbering in the system bipartite graph: state copies
# come first (0..n-1), inputs follow (n..n+m-1).
def right_state(i: int) -> int:
    return i


def right_input(n: int, j: int) -> int:
    return n + j


@dataclass(frozen=True)
class SystemBipartite:
    """Bipartite graph of a system: left states vs right states + inputs.

    ``xx_edges`` holds (state j, state i) pairs for the free A_ij entries in
    row-major order over A; ``ux_edges`` holds (input j, state i) pairs
    grouped by input.  These orderings fix the optimization variable order.
    """

    n: int
    m: int
    xx_edges: tuple[tuple[int, int], ...]
    ux_edges: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, a: SparsityPattern, b: SparsityPattern) -> "SystemBipartite":
        xx = tuple((j, i) for i, j in sorted(a.nonzeros))
        ux = tuple((j, i) for j in range(b.cols) for i in sorted(b.column(j)))
        return cls(a.rows, b.cols, xx, ux)

    def input_bundle(self, j: int) -> tuple[int, ...]:
        """Positions of input j's edges within the ux_edges ordering."""
        return tuple(pos for pos, (jj, _) in enumerate(self.ux_edges) if jj == j)

    def adjacency(self, selected: Optional[Iterable[int]] = None) -> list[list[int]]:
        """Left adjacency lists over right vertices, restricted to ``selected`` inputs."""
        allowed = set(range(self.m)) if selected is None else set(selected)
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for j, i in self.xx_edges:
            adj[i].append(right_state(j))
        for j, i in self.ux_edges:
            if j in allowed:
                adj[i].append(right_input(self.n, j))
        return adj


def saturating_matching(bip: SystemBipartite, selected: Optional[Iterable[int]] = None
                        ) -> tuple[Optional[Matching], frozenset[int]]:
    """Left-saturating matching, or the deficient left set if none exists.

    The deficiency witness is the set of left vertices reachable from an
    unmatched left vertex by alternating paths; its neighborhood is smaller
    than itself, certifying that saturation is impossible.
    """
    adj = bip.adjacency(selected)
    pairing = max_matching(adj)
    if len(pairing) == bip.n:
        return Matching(frozenset(pairing.items())), frozenset()
    pair_right = {r: l for l, r in pairing.items()}
    reach = {l for l in range(bip.n) if l not in pairing}
    frontier = list(reach)
    while frontier:
        l = frontier.pop()
        for r in adj[l]:
            other = pair_right.get(r)
            if other is not None and other not in reach:
                reach.add(other)
                frontier.append(other)
    return None, frozenset(reach)


def min_cost_max_matching_inputs(sys: StructuredSystem) -> tuple[Matching, Fraction]:
    """Cheapest input usage over all left-saturating maximum matchings.

    Solved through the exact LP relaxation of the matching polytope, whose
    vertices are integral here, so the optimum is attained by an actual
    matching.  Raises ``DeficiencyError`` when no saturating matching exists.
    """
    from .ilp import build_matching_lp  # deferred: ilp builds on this module
    from .simplex import LpStatus, solve

    bip = SystemBipartite.build(sys.a, sys.b)
    model = build_matching_lp(sys, bip)
    sol = solve(model)
    if sol.status is not LpStatus.OPTIMAL:
        _, deficient = saturating_matching(bip)
        raise DeficiencyError(deficient)
    edges = set()
    for pos, (j, i) in enumerate(bip.ux_edges):
        if sol.x[len(bip.xx_edges) + pos]:
            edges.add((i, right_input(bip.n, j)))
    for pos, (j, i) in enumerate(bip.xx_edges):
        if sol.x[pos]:
            edges.add((i, right_state(j)))
    return Matching(frozenset(edges)), sol.objective


class DeficiencyError(ValueError):
    """No left-saturating matching exists; carries the deficient left set."""

    def __init__(self, deficient: frozenset[int]):
        self.deficient = deficient
        names = sorted(i + 1 for i in deficient)
        super().__init__(f"left states {names} cannot all be matched")


def to_dot(sys: StructuredSystem) -> str:
    """System digraph in DOT format (states as circles, inputs as boxes)."""
    lines = ["digraph system {"]
    for i in range(sys.n):
        lines.append(f'  x{i + 1} [shape=circle];')
    for j in range(sys.m):
        lines.append(f'  u{j + 1} [shape=box];')
    for i, j in sorted(sys.a.nonzeros):
        lines.append(f"  x{j + 1} -> x{i + 1};")
    for i, j in sorted(sys.b.nonzeros):
        lines.append(f"  u{j + 1} -> x{i + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"
