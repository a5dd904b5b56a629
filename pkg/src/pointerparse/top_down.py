"""Top-down stack-based transition system, kept as a comparison baseline.

A stack holds partially processed words (root at the bottom) and a buffer
holds still-unattached words.  Pointing at a buffer word attaches it to the
stack top and pushes it; pointing at the stack top itself pops it.  A full
parse takes exactly 2n-1 actions: n attachments plus n-1 reduces, because
the configuration with the root plus one word left on the stack and an empty
buffer is terminal (the last reduce, which would leave the root alone, is
never taken).

The root's own reduce is likewise never a legal action: popping the root
would strand unattached words, so termination is detected from the
configuration rather than signalled by a transition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .trees import DependencyTree, validate_tree

UNATTACHED = -1


@dataclass
class TopDownState:
    n: int
    stack: list[int]
    in_buffer: list[bool]  # entry p is True while word p is unattached
    buffer_size: int
    heads: list[int]
    step_count: int = 0

    @property
    def is_terminal(self) -> bool:
        return self.buffer_size == 0 and len(self.stack) <= 2

    @property
    def top(self) -> int:
        return self.stack[-1]

    def clone(self) -> "TopDownState":
        return TopDownState(self.n, self.stack[:], self.in_buffer[:],
                            self.buffer_size, self.heads[:], self.step_count)


def td_initial(n: int) -> TopDownState:
    if n < 1:
        raise ValueError(f"sentence length must be >= 1, got {n}")
    in_buffer = [False] + [True] * n
    return TopDownState(n=n, stack=[0], in_buffer=in_buffer, buffer_size=n,
                        heads=[UNATTACHED] * n)


def td_legal_targets(state: TopDownState) -> list[int]:
    """Buffer words plus the stack top (whose self-point means Reduce).

    The root never reduces, so position 0 only ever appears here while some
    other word occupies the stack top.
    """
    if state.is_terminal:
        return []
    targets = [p for p in range(1, state.n + 1) if state.in_buffer[p]]
    if state.top != 0:
        targets.append(state.top)
    return sorted(targets)


def td_apply(state: TopDownState, p: int) -> TopDownState:
    """Apply one pointed action: attach-and-push for a buffer word, Reduce
    when the stack top points at itself."""
    if state.is_terminal:
        raise ValueError("cannot act in a terminal state")
    top = state.top
    new = state.clone()
    if p == top:
        if top == 0:
            raise ValueError("the root cannot be reduced")
        new.stack.pop()
    elif 1 <= p <= state.n and state.in_buffer[p]:
        new.heads[p - 1] = top
        new.in_buffer[p] = False
        new.buffer_size -= 1
        new.stack.append(p)
    else:
        raise ValueError(f"position {p} is neither the stack top nor in the buffer")
    new.step_count += 1
    return new


def td_oracle(gold: DependencyTree) -> list[int]:
    """Static oracle emitting a depth-first, inside-out action sequence.

    Children of a head are produced nearest-first; the left child wins ties
    between equidistant left/right children.  The sequence has exactly
    n attachments and n-1 reduces.
    """
    if not validate_tree(gold):
        raise ValueError("gold annotation is not a valid dependency tree")
    n = len(gold.heads)
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for dep0, head in enumerate(gold.heads):
        children[head].append(dep0 + 1)
    for head, kids in enumerate(children):
        kids.sort(key=lambda c: (abs(c - head), c))
    next_child = [0] * (n + 1)

    actions: list[int] = []
    state = td_initial(n)
    while not state.is_terminal:
        top = state.top
        kids = children[top]
        if next_child[top] < len(kids):
            p = kids[next_child[top]]
            next_child[top] += 1
        else:
            p = top
        actions.append(p)
        state = td_apply(state, p)
    return actions


def td_replay(n: int, actions: list[int]) -> TopDownState:
    state = td_initial(n)
    for p in actions:
        state = td_apply(state, p)
    return state
