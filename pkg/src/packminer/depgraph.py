"""Dependency graphs over attributes and minimum arborescences toward a sink."""

from __future__ import annotations

from typing import Mapping


class DependencyGraph:
    """Edge ``(t, s)`` means the tree for attribute ``t`` tests attribute ``s``.

    Out-neighbourhoods are int bitsets, so reachability is a cheap DFS.
    """

    def __init__(self, n_vertices: int, edges=()) -> None:
        self.n = n_vertices
        self.out = [0] * n_vertices
        for t, s in edges:
            self.add_edge(t, s)

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range")

    def has_edge(self, t: int, s: int) -> bool:
        return bool((self.out[t] >> s) & 1)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for t, nbrs in enumerate(self.out):
            s = 0
            while nbrs:
                if nbrs & 1:
                    out.append((t, s))
                nbrs >>= 1
                s += 1
        return out

    def reachable(self, start: int) -> int:
        """Bitset of vertices reachable from ``start`` (including itself)."""
        seen = 1 << start
        frontier = [start]
        while frontier:
            v = frontier.pop()
            fresh = self.out[v] & ~seen
            seen |= fresh
            while fresh:
                low = fresh & -fresh
                frontier.append(low.bit_length() - 1)
                fresh ^= low
        return seen

    def would_be_acyclic(self, t: int, s: int) -> bool:
        self._check(t)
        self._check(s)
        if t == s:
            return False
        return not (self.reachable(s) >> t) & 1

    def add_edge(self, t: int, s: int, check: bool = True) -> None:
        """Insert ``(t, s)``; idempotent.  Raises if the edge closes a cycle, unless ``check`` is off."""
        if self.has_edge(t, s):
            return
        if check and not self.would_be_acyclic(t, s):
            raise ValueError(f"edge ({t}, {s}) would create a cycle")
        self.out[t] |= 1 << s

    def is_acyclic(self) -> bool:
        try:
            self.transmission_order()
        except ValueError:
            return False
        return True

    def transmission_order(self) -> list[int]:
        """Topological order with sources first; smallest index among ready vertices."""
        import heapq

        pending = [bin(nbrs).count("1") for nbrs in self.out]
        dependants: list[list[int]] = [[] for _ in range(self.n)]
        for t, s in self.edges():
            dependants[s].append(t)
        ready = [v for v in range(self.n) if pending[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for t in dependants[v]:
                pending[t] -= 1
                if pending[t] == 0:
                    heapq.heappush(ready, t)
        if len(order) != self.n:
            raise ValueError("dependency graph has a cycle")
        return order

    def to_dot(self, names=None) -> str:
        names = names or [str(v) for v in range(self.n)]
        lines = ["digraph dependencies {"]
        for v in range(self.n):
            label = str(names[v]).replace('"', '\\"')
            lines.append(f'  n{v} [label="{label}"];')
        for t, s in self.edges():
            lines.append(f"  n{t} -> n{s};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def dmst(n_vertices: int, weights: Mapping[tuple[int, int], float], sink: int = 0) -> dict[int, int]:
    """Minimum-weight arborescence in which every vertex has one outgoing edge toward ``sink``.

    ``weights[(u, v)]`` is the weight of edge ``u -> v``.  Returns a map from
    each non-sink vertex to the head of its chosen edge.  Chu-Liu/Edmonds with
    cycle contraction; ties go to the lexicographically smallest original
    ``(tail, head)`` pair.
    """
    edges = {}
    for (u, v), w in weights.items():
        if u == v or u == sink:
            continue
        edges[(u, v)] = (w, (u, v))
    vertices = list(range(n_vertices))
    chosen = _cle(vertices, sink, edges)
    return dict(sorted(orig for _, orig in chosen.values()))


def _cle(vertices, sink, edges):
    # edges: (u, v) -> (weight, original edge); returns u -> (head at this level, original edge)
    best: dict[int, tuple[int, float, tuple[int, int]]] = {}
    for (u, v), (w, orig) in edges.items():
        cur = best.get(u)
        if cur is None or (w, orig) < (cur[1], cur[2]):
            best[u] = (v, w, orig)
    for u in vertices:
        if u != sink and u not in best:
            raise ValueError(f"vertex {u} has no path to the sink")

    cycle = _find_cycle(best, sink)
    if cycle is None:
        return {u: (v, orig) for u, (v, _, orig) in best.items()}

    members = set(cycle)
    c = max(vertices) + 1
    contracted: dict[tuple[int, int], tuple[float, tuple[int, int]]] = {}
    via: dict[tuple[int, int], int] = {}  # contracted edge -> cycle member it leaves or enters
    for (u, v), (w, orig) in edges.items():
        if u in members and v in members:
            continue
        if u in members:
            key, w2 = (c, v), w - best[u][1]
        elif v in members:
            key, w2 = (u, c), w
        else:
            key, w2 = (u, v), w
        cur = contracted.get(key)
        if cur is None or (w2, orig) < cur:
            contracted[key] = (w2, orig)
            if u in members:
                via[key] = u
            elif v in members:
                via[key] = v
    new_vertices = [v for v in vertices if v not in members] + [c]
    sub = _cle(new_vertices, sink, contracted)

    result = {}
    for u, (v, orig) in sub.items():
        if u == c:
            result[via[(c, v)]] = (v, orig)
        elif v == c:
            result[u] = (via[(u, c)], orig)
        else:
            result[u] = (v, orig)
    for u in members:
        if u not in result:
            result[u] = (best[u][0], best[u][2])
    return result


def _find_cycle(best, sink):
    state: dict[int, int] = {}
    for start in sorted(best):
        if start in state:
            continue
        trail = []
        v = start
        while v != sink and v not in state:
            state[v] = 1
            trail.append(v)
            v = best[v][0]
        if v != sink and state.get(v) == 1 and v in trail:
            return trail[trail.index(v):]
        for u in trail:
            state[u] = 2
    return None
