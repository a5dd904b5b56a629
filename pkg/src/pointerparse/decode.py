"""Greedy and beam-search inference over either transition system.

Probabilities always come from the training-time candidate distribution (for
the left-to-right system: everything but the focus word), so accumulated
hypothesis scores stay comparable to teacher-forced tree probabilities.  The
acyclicity constraint restricts which candidates may be chosen but never
renormalizes.  Under the ``post_fix`` policy the constraint is dropped
entirely and cycles are repaired afterwards from the retained attention
distributions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import left_to_right as l2r
from . import top_down as td
from .conllu import Sentence
from .scorer import (AttentionStep, DecoderState, EncodedSentence, ScorerModel,
                     attention_step, decoder_start, decoder_step, encode,
                     focus_context, predict_labels, stack_top_context)
from .trees import DependencyTree, validate_tree


@dataclass
class Hypothesis:
    state: "l2r.L2RState | td.TopDownState"
    log_prob: float
    dec: DecoderState
    step_log_probs: list[float] = field(default_factory=list)
    dists: list[np.ndarray] | None = None


@dataclass
class ParseResult:
    tree: DependencyTree
    attention_steps: int
    wall_nanos: int
    repaired: bool
    log_prob: float
    beam_log_probs: list[float]
    step_log_probs: list[float]


def _l2r_step_inputs(enc: EncodedSentence, state: "l2r.L2RState"):
    i = state.focus
    u = focus_context(enc, i)
    mask = np.zeros(len(enc) + 1, dtype=bool)
    mask[i] = True
    return u, mask


def _td_step_inputs(enc: EncodedSentence, state: "td.TopDownState"):
    u = stack_top_context(enc, state.top)
    allowed = td.td_legal_targets(state)
    mask = np.ones(len(enc) + 1, dtype=bool)
    mask[allowed] = False
    return u, mask


def _allowed(state, mode: str, cycle_policy: str) -> list[int]:
    if mode == "l2r":
        if cycle_policy == "forbid":
            return l2r.legal_targets(state)
        i = state.focus
        return [p for p in range(state.n + 1) if p != i]
    return td.td_legal_targets(state)


def _apply(state, p: int, mode: str):
    if mode == "l2r":
        return l2r.apply_attach(state, p)
    return td.td_apply(state, p)


def _initial(n: int, mode: str):
    if mode == "l2r":
        return l2r.initial_state(n)
    if mode == "topdown":
        return td.td_initial(n)
    raise ValueError(f"unknown mode {mode!r}")


def _argmax_over(dist: np.ndarray, allowed: list[int]) -> int:
    masked = np.full(dist.shape, -np.inf)
    masked[allowed] = dist[allowed]
    return int(masked.argmax())  # ties resolve to the lowest head index


def _finish(model: ScorerModel, enc: EncodedSentence, hyp: Hypothesis,
            mode: str, cycle_policy: str, steps: int, started: int,
            beam_log_probs: list[float]) -> ParseResult:
    heads = list(hyp.state.heads)
    repaired = False
    if mode == "l2r" and cycle_policy == "post_fix":
        tree = DependencyTree(heads)
        if not validate_tree(tree):
            scores = np.stack(hyp.dists)
            heads = list(repair_cycles(heads, scores).heads)
            repaired = True
    labels = predict_labels(model, enc, heads)
    tree = DependencyTree(heads, labels)
    wall = time.perf_counter_ns() - started
    return ParseResult(tree=tree, attention_steps=steps, wall_nanos=wall,
                       repaired=repaired, log_prob=hyp.log_prob,
                       beam_log_probs=beam_log_probs,
                       step_log_probs=hyp.step_log_probs)


def parse_greedy(model: ScorerModel, sentence: Sentence, mode: str,
                 cycle_policy: str = "forbid") -> ParseResult:
    """Argmax decoding; exactly n attention steps for the left-to-right
    system and 2n-1 for the top-down baseline."""
    started = time.perf_counter_ns()
    n = len(sentence)
    enc = encode(model, sentence)
    keep_dists = mode == "l2r" and cycle_policy == "post_fix"
    hyp = Hypothesis(state=_initial(n, mode), log_prob=0.0,
                     dec=decoder_start(model),
                     dists=[] if keep_dists else None)
    steps = 0
    while not hyp.state.is_terminal:
        steps += 1
        if mode == "l2r":
            u, mask = _l2r_step_inputs(enc, hyp.state)
        else:
            u, mask = _td_step_inputs(enc, hyp.state)
        hyp.dec = decoder_step(model, hyp.dec, u)
        att = attention_step(model, hyp.dec.h, enc, mask)
        allowed = _allowed(hyp.state, mode, cycle_policy)
        p = _argmax_over(att.dist, allowed)
        lp = float(np.log(att.dist[p]))
        hyp.log_prob += lp
        hyp.step_log_probs.append(lp)
        if keep_dists:
            hyp.dists.append(att.dist)
        hyp.state = _apply(hyp.state, p, mode)
    return _finish(model, enc, hyp, mode, cycle_policy, steps, started,
                   [hyp.log_prob])


def parse_beam(model: ScorerModel, sentence: Sentence, mode: str,
               beam_size: int, cycle_policy: str = "forbid") -> ParseResult:
    """Step-synchronous beam search over hypotheses ranked by accumulated log
    probability; ties break toward the lower head index, then the earlier
    hypothesis."""
    if beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {beam_size}")
    started = time.perf_counter_ns()
    n = len(sentence)
    enc = encode(model, sentence)
    keep_dists = mode == "l2r" and cycle_policy == "post_fix"
    beam = [Hypothesis(state=_initial(n, mode), log_prob=0.0,
                       dec=decoder_start(model),
                       dists=[] if keep_dists else None)]
    steps = 0
    while not beam[0].state.is_terminal:
        steps += 1
        expansions: list[tuple[float, int, int, DecoderState, AttentionStep]] = []
        for idx, hyp in enumerate(beam):
            if mode == "l2r":
                u, mask = _l2r_step_inputs(enc, hyp.state)
            else:
                u, mask = _td_step_inputs(enc, hyp.state)
            dec = decoder_step(model, hyp.dec, u)
            att = attention_step(model, dec.h, enc, mask)
            for p in _allowed(hyp.state, mode, cycle_policy):
                expansions.append(
                    (hyp.log_prob + float(np.log(att.dist[p])), p, idx, dec, att))
        expansions.sort(key=lambda e: (-e[0], e[1], e[2]))
        next_beam = []
        for lp, p, idx, dec, att in expansions[:beam_size]:
            parent = beam[idx]
            next_beam.append(Hypothesis(
                state=_apply(parent.state, p, mode),
                log_prob=lp,
                dec=dec,
                step_log_probs=parent.step_log_probs + [lp - parent.log_prob],
                dists=parent.dists + [att.dist] if keep_dists else None))
        beam = next_beam
    return _finish(model, enc, beam[0], mode, cycle_policy, steps, started,
                   [h.log_prob for h in beam])


def parse_sentence(model: ScorerModel, sentence: Sentence, mode: str,
                   beam_size: int = 1, cycle_policy: str = "forbid") -> ParseResult:
    if beam_size == 1:
        return parse_greedy(model, sentence, mode, cycle_policy)
    return parse_beam(model, sentence, mode, beam_size, cycle_policy)


def _find_cycle(heads: list[int]) -> list[int] | None:
    """One cycle of the head graph as a node list, or None if acyclic."""
    n = len(heads)
    color = [0] * (n + 1)  # 0 unseen, 1 on current chain, 2 known acyclic
    color[0] = 2
    for start in range(1, n + 1):
        if color[start]:
            continue
        chain = []
        x = start
        while color[x] == 0:
            color[x] = 1
            chain.append(x)
            x = heads[x - 1]
        if color[x] == 1:
            return chain[chain.index(x):]
        for node in chain:
            color[node] = 2
    return None


def _chain_reaches(heads: list[int], start: int, target: int) -> bool:
    x = start
    for _ in range(len(heads) + 1):
        if x == 0:
            return False
        if x == target:
            return True
        x = heads[x - 1]
    return False  # chain fell into an unrelated cycle; target unreachable


def repair_cycles(heads: list[int], scores: np.ndarray) -> DependencyTree:
    """Break every cycle by dropping its lowest-scoring arc and reattaching
    that dependent to its best alternative head that keeps the graph acyclic.

    ``scores[d-1][p]`` is the decoder's score for attaching word d to head p
    (the retained attention distributions).  Arcs outside cycles are never
    touched.
    """
    n = len(heads)
    if scores.shape != (n, n + 1):
        raise ValueError(f"scores shape {scores.shape} does not match n={n}")
    heads = list(heads)
    while True:
        cycle = _find_cycle(heads)
        if cycle is None:
            break
        victim = min(cycle, key=lambda d: (scores[d - 1][heads[d - 1]], d))
        old_head = heads[victim - 1]
        best_p = -1
        best_score = -np.inf
        for p in range(n + 1):
            if p == victim or p == old_head:
                continue
            if _chain_reaches(heads, p, victim):
                continue
            if scores[victim - 1][p] > best_score:
                best_score = scores[victim - 1][p]
                best_p = p
        heads[victim - 1] = best_p  # p = 0 is always reachable-free
    return DependencyTree(heads)
