"""
Hopcroft-Karp maximum matching on a bipartite graph with integer vertices.

Left vertices are rows 0..m-1, right vertices columns 0..m-1; adjacency
lists are kept sorted so the matching found is deterministic.
"""
from collections import deque

import numpy as np

_INFINITY = np.iinfo(np.int64).max


class HopcroftKarp:
    def __init__(self, adjacency: list[list[int]]):
        self._graph = [sorted(set(int(j) for j in row)) for row in adjacency]
        self._pair_left: dict[int, int] = {}
        self._pair_right: dict[int, int] = {}
        self._dist: list[int] = [_INFINITY] * len(self._graph)
        self._reference = _INFINITY

    @classmethod
    def from_support(cls, support: np.ndarray) -> "HopcroftKarp":
        """Graph with an edge (i, j) wherever support[i, j] is true."""
        return cls([np.flatnonzero(row).tolist() for row in np.asarray(support, dtype=bool)])

    def maximum_matching(self) -> dict[int, int]:
        """Left vertex -> matched right vertex."""
        self._pair_left.clear()
        self._pair_right.clear()
        while self._bfs():
            for left in range(len(self._graph)):
                if left not in self._pair_left:
                    self._dfs(left)
        return dict(self._pair_left)

    def perfect_matching(self) -> np.ndarray | None:
        """sigma with sigma[i] = column matched to row i, or None."""
        matching = self.maximum_matching()
        if len(matching) < len(self._graph):
            return None
        return np.array([matching[i] for i in range(len(self._graph))], dtype=int)

    def _bfs(self) -> bool:
        queue: deque[int] = deque()
        for left in range(len(self._graph)):
            if left not in self._pair_left:
                self._dist[left] = 0
                queue.append(left)
            else:
                self._dist[left] = _INFINITY
        self._reference = _INFINITY
        while queue:
            left = queue.popleft()
            if self._dist[left] >= self._reference:
                continue
            for right in self._graph[left]:
                other = self._pair_right.get(right)
                if other is None:
                    if self._reference == _INFINITY:
                        self._reference = self._dist[left] + 1
                elif self._dist[other] == _INFINITY:
                    self._dist[other] = self._dist[left] + 1
                    queue.append(other)
        return self._reference < _INFINITY

    def _dfs(self, left: int) -> bool:
        for right in self._graph[left]:
            other = self._pair_right.get(right)
            if other is None:
                if self._reference == self._dist[left] + 1:
                    self._match(left, right)
                    return True
            elif self._dist[other] == self._dist[left] + 1 and self._dfs(other):
                self._match(left, right)
                return True
        self._dist[left] = _INFINITY
        return False

    def _match(self, left: int, right: int) -> None:
        self._pair_left[left] = right
        self._pair_right[right] = left
