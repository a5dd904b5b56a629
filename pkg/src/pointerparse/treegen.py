"""Uniform random dependency trees, for property tests and synthetic data.

Sampling goes through Pruefer sequences: a uniform labelled tree on the
n+1 nodes {0..n} is drawn and rooted at node 0, which yields a uniform
spanning arborescence, i.e. a uniform valid head array.  Non-projective
trees appear with their natural frequency.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np


def random_heads(n: int, rng: np.random.Generator) -> list[int]:
    """Uniform random head array for an n-word sentence (root = 0)."""
    if n < 1:
        raise ValueError(f"sentence length must be >= 1, got {n}")
    if n == 1:
        return [0]
    size = n + 1
    prufer = rng.integers(0, size, size=size - 2)
    degree = [1] * size
    for a in prufer:
        degree[a] += 1
    adj: list[list[int]] = [[] for _ in range(size)]
    # classic decode: repeatedly join the smallest leaf to the next code entry
    leaves = [i for i in range(size) if degree[i] == 1]
    heapq.heapify(leaves)
    for a in prufer:
        leaf = heapq.heappop(leaves)
        adj[leaf].append(int(a))
        adj[int(a)].append(leaf)
        degree[a] -= 1
        if degree[a] == 1:
            heapq.heappush(leaves, int(a))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    adj[u].append(v)
    adj[v].append(u)

    heads = [0] * n
    seen = [False] * size
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nb in adj[node]:
            if not seen[nb]:
                seen[nb] = True
                heads[nb - 1] = node
                queue.append(nb)
    return heads


def is_projective(heads: list[int]) -> bool:
    """Crossing-arc check: false iff two arcs interleave."""
    arcs = [(min(d + 1, h), max(d + 1, h)) for d, h in enumerate(heads)]
    for i, (a1, b1) in enumerate(arcs):
        for a2, b2 in arcs[i + 1:]:
            if a1 < a2 < b1 < b2 or a2 < a1 < b2 < b1:
                return False
    return True
