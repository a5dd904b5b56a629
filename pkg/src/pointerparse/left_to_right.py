"""Left-to-right transition system: one head attachment per word.

The configuration is just a focus pointer that sweeps the sentence once.  At
each position exactly one parameterized action exists, attaching the focus
word to some other position (0 = root) and advancing the pointer, so any
n-word sentence is parsed in exactly n actions.  Acyclicity is enforced
incrementally through the union-find forest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .trees import DependencyTree, validate_tree
from .unionfind import DisjointForest

UNATTACHED = -1


@dataclass
class L2RState:
    n: int
    focus: int
    heads: list[int]
    forest: DisjointForest

    @property
    def is_terminal(self) -> bool:
        return self.focus > self.n

    def clone(self) -> "L2RState":
        return L2RState(self.n, self.focus, self.heads[:], self.forest.copy())


def initial_state(n: int) -> L2RState:
    if n < 1:
        raise ValueError(f"sentence length must be >= 1, got {n}")
    return L2RState(n=n, focus=1, heads=[UNATTACHED] * n, forest=DisjointForest(n))


def legal_targets(state: L2RState) -> list[int]:
    """Positions the focus word may attach to: everything but itself and any
    head that would close a cycle.  Never empty, since the root qualifies."""
    if state.is_terminal:
        return []
    i = state.focus
    return [p for p in range(state.n + 1)
            if p != i and not state.forest.would_cycle(p, i)]


def apply_attach(state: L2RState, p: int) -> L2RState:
    """Attach the focus word to position ``p`` and advance the pointer."""
    if state.is_terminal:
        raise ValueError("cannot attach in a terminal state")
    i = state.focus
    if p < 0 or p > state.n:
        raise ValueError(f"attachment target {p} out of range 0..{state.n}")
    if p == i:
        raise ValueError(f"word {i} cannot attach to itself")
    if state.forest.would_cycle(p, i):
        raise ValueError(f"attaching {i} to {p} would create a cycle")
    new = state.clone()
    new.heads[i - 1] = p
    new.forest.record_attach(p, i)
    new.focus = i + 1
    return new


def oracle_actions(gold: DependencyTree) -> list[int]:
    """Static oracle: the action at position i is simply the gold head of
    word i.  Replaying through apply_attach reconstructs the tree; gold
    acyclicity guarantees every step is legal."""
    if not validate_tree(gold):
        raise ValueError("gold annotation is not a valid dependency tree")
    return list(gold.heads)


def replay(actions: list[int]) -> L2RState:
    state = initial_state(len(actions))
    for p in actions:
        state = apply_attach(state, p)
    return state
