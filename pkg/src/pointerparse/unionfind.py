"""Incremental acyclicity tracking for partial parses via disjoint-set union.

Components are tracked with path compression and union by rank, so checking
whether a candidate attachment would close a cycle is amortized near-constant
time.  One forest instance covers nodes ``0..n`` where node 0 is the
artificial root.
"""

from __future__ import annotations


class CycleError(ValueError):
    """Raised when an attachment that would close a cycle is recorded."""


class DisjointForest:
    """Union-find over the nodes of a partial dependency graph.

    Because every dependent acquires at most one head, each connected
    component of the partial graph is a tree rooted at its unique headless
    node.  Attaching a still-headless word ``dep`` to ``head`` closes a
    directed cycle exactly when both already share a component.
    """

    __slots__ = ("parent", "rank", "find_steps")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"sentence length must be >= 1, got {n}")
        self.parent = list(range(n + 1))
        self.rank = [0] * (n + 1)
        # parent-chasing hops, used to verify the amortized cost bound
        self.find_steps = 0

    def __len__(self) -> int:
        return len(self.parent)

    def copy(self) -> "DisjointForest":
        dup = DisjointForest.__new__(DisjointForest)
        dup.parent = self.parent[:]
        dup.rank = self.rank[:]
        dup.find_steps = self.find_steps
        return dup

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
            self.find_steps += 1
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
            self.find_steps += 1
        return root

    def would_cycle(self, head: int, dep: int) -> bool:
        """True iff adding the arc head -> dep would close a directed cycle.

        Assumes ``dep`` has no head yet, which the left-to-right order
        guarantees: then ``dep`` is the root of its component, so sharing a
        component means ``head`` is already a descendant of ``dep``.
        """
        if head == dep:
            raise ValueError(f"self-attachment of node {dep}")
        return self.find(head) == self.find(dep)

    def record_attach(self, head: int, dep: int) -> None:
        """Merge the components of ``head`` and ``dep`` after an attachment."""
        ra = self.find(head)
        rb = self.find(dep)
        if ra == rb:
            raise CycleError(f"attaching {head} -> {dep} would create a cycle")
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        elif self.rank[ra] == self.rank[rb]:
            # deterministic: lower index becomes the new root on rank ties
            if rb < ra:
                ra, rb = rb, ra
            self.rank[ra] += 1
        self.parent[rb] = ra
