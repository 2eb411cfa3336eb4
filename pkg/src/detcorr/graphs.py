"""Graphs for graph states: vertices, edges, and a proper coloring.

Stabilizers of the associated state are X on a vertex and Z on each of its
neighbors, so all stabilizers within one color class commute and share a
product measurement basis (X on the class, Z elsewhere).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GraphSpec:
    n: int
    edges: frozenset[tuple[int, int]]
    coloring: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        norm = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) out of range")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))
        coloring = tuple(int(c) for c in self.coloring)
        if len(coloring) != self.n:
            raise ValueError(f"coloring has {len(coloring)} entries for {self.n} vertices")
        object.__setattr__(self, "coloring", coloring)
        for a, b in norm:
            if coloring[a] == coloring[b]:
                raise ValueError(f"adjacent vertices {a}, {b} share color {coloring[a]}")

    @property
    def colors(self) -> tuple[int, ...]:
        """Distinct colors in use, ascending."""
        return tuple(sorted(set(self.coloring)))

    def color_class(self, color: int) -> tuple[int, ...]:
        members = tuple(v for v in range(self.n) if self.coloring[v] == color)
        if not members:
            raise ValueError(f"color {color} is not used")
        return members

    def neighbors(self, vertex: int) -> tuple[int, ...]:
        return tuple(sorted(b if a == vertex else a for a, b in self.edges if vertex in (a, b)))

    def degree(self, vertex: int) -> int:
        return len(self.neighbors(vertex))


def build_graph(kind: str, n: int) -> GraphSpec:
    """Star graph ("ghz", hub at vertex 0) or path graph ("linear_cluster")."""
    if n < 2:
        raise ValueError(f"need n >= 2 vertices, got {n}")
    if kind == "ghz":
        edges = frozenset((0, k) for k in range(1, n))
        coloring = (0,) + (1,) * (n - 1)
    elif kind == "linear_cluster":
        edges = frozenset((k, k + 1) for k in range(n - 1))
        coloring = tuple(k % 2 for k in range(n))
    else:
        raise ValueError(f"unknown graph kind {kind!r}; use 'ghz' or 'linear_cluster'")
    return GraphSpec(n=n, edges=edges, coloring=coloring)


def class_setting(graph: GraphSpec, color: int) -> str:
    """Measurement basis for one color class: X on the class, Z elsewhere."""
    members = set(graph.color_class(color))
    return "".join("X" if v in members else "Z" for v in range(graph.n))


__all__ = ["GraphSpec", "build_graph", "class_setting"]
