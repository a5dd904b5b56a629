"""Trainable attention scorer for pointer-style head selection.

Word and POS embeddings feed a bidirectional LSTM encoder; a unidirectional
LSTM decoder consumes per-position context sums and a biaffine function
scores every candidate head position against the decoder state.  Dependency
labels come from a parallel per-label biaffine classifier over (head,
dependent) encoder-state pairs, and both objectives are summed during
training.  All forward and reverse-mode computation is hand-written numpy in
double precision; ``tests`` verify every gradient against central finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .config import RunConfig
from .conllu import Sentence
from .network import init_lstm, lstm_step, lstm_step_backward, masked_log_softmax
from .top_down import td_apply, td_initial, td_legal_targets, td_oracle
from .trees import DependencyTree, Vocabulary, validate_tree


@dataclass
class EncodedSentence:
    """Encoder states with the learned root representation at position 0."""

    all_states: np.ndarray  # (n+1, 2*enc_hidden); row 0 is the root vector

    @property
    def root_state(self) -> np.ndarray:
        return self.all_states[0]

    @property
    def states(self) -> np.ndarray:
        return self.all_states[1:]

    def __len__(self) -> int:
        return self.all_states.shape[0] - 1


@dataclass
class DecoderState:
    h: np.ndarray
    c: np.ndarray


@dataclass
class AttentionStep:
    """Scores and normalized distribution over candidate head positions."""

    scores: np.ndarray    # raw biaffine scores, all positions 0..n
    dist: np.ndarray      # softmax over unmasked positions; masked are exactly 0
    excluded: np.ndarray  # bool mask, True = not a candidate


class ScorerModel:
    """Parameter container plus vocabulary and dimensions."""

    def __init__(self, config: RunConfig, vocab: Vocabulary,
                 rng: np.random.Generator | None = None,
                 params: dict[str, np.ndarray] | None = None):
        self.config = config
        self.vocab = vocab
        self.input_dim = config.word_dim + config.pos_dim
        self.state_dim = 2 * config.enc_hidden
        if params is not None:
            self.params = params
            self._check_shapes()
        else:
            if rng is None:
                rng = np.random.default_rng(config.seed)
            self.params = self._init_params(rng)

    def _init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        cfg = self.config
        two_h = self.state_dim
        g = cfg.dec_hidden
        labels = self.vocab.n_labels
        p: dict[str, np.ndarray] = {}
        p["emb.word"] = rng.normal(0.0, 0.1, size=(self.vocab.n_words, cfg.word_dim))
        p["emb.word"][0] = 0.0  # padding row stays silent
        p["emb.pos"] = rng.normal(0.0, 0.1, size=(self.vocab.n_pos, cfg.pos_dim))
        init_lstm(p, rng, "enc_f", self.input_dim, cfg.enc_hidden)
        init_lstm(p, rng, "enc_b", self.input_dim, cfg.enc_hidden)
        init_lstm(p, rng, "dec", two_h, g)
        p["dec.h0"] = np.zeros(g)
        p["dec.c0"] = np.zeros(g)
        p["root"] = rng.normal(0.0, 0.1, size=two_h)

        def glorot(shape):
            bound = np.sqrt(6.0 / (shape[-2] + shape[-1]))
            return rng.uniform(-bound, bound, size=shape)

        p["att.W"] = glorot((g, two_h))
        p["att.u"] = np.zeros(g)
        p["att.v"] = np.zeros(two_h)
        p["att.b"] = np.zeros(1)
        p["label.U"] = glorot((labels, two_h, two_h))
        p["label.wh"] = np.zeros((labels, two_h))
        p["label.wd"] = np.zeros((labels, two_h))
        p["label.b"] = np.zeros(labels)
        return p

    def _check_shapes(self) -> None:
        cfg = self.config
        expect = expected_shapes(cfg, self.vocab)
        for name, shape in expect.items():
            if name not in self.params:
                raise ValueError(f"missing parameter tensor {name!r}")
            if tuple(self.params[name].shape) != shape:
                raise ValueError(
                    f"parameter {name!r} has shape {self.params[name].shape}, "
                    f"expected {shape}")
        extra = set(self.params) - set(expect)
        if extra:
            raise ValueError(f"unexpected parameter tensors: {sorted(extra)}")

    def new_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def token_ids(self, sentence: Sentence) -> tuple[list[int], list[int]]:
        w = [self.vocab.word_id(t.form) for t in sentence.tokens]
        p = [self.vocab.pos_id(t.upos) for t in sentence.tokens]
        return w, p


def expected_shapes(config: RunConfig, vocab: Vocabulary) -> dict[str, tuple]:
    m = config.word_dim + config.pos_dim
    h = config.enc_hidden
    two_h = 2 * h
    g = config.dec_hidden
    labels = vocab.n_labels
    return {
        "emb.word": (vocab.n_words, config.word_dim),
        "emb.pos": (vocab.n_pos, config.pos_dim),
        "enc_f.W": (4 * h, m), "enc_f.U": (4 * h, h), "enc_f.b": (4 * h,),
        "enc_b.W": (4 * h, m), "enc_b.U": (4 * h, h), "enc_b.b": (4 * h,),
        "dec.W": (4 * g, two_h), "dec.U": (4 * g, g), "dec.b": (4 * g,),
        "dec.h0": (g,), "dec.c0": (g,),
        "root": (two_h,),
        "att.W": (g, two_h), "att.u": (g,), "att.v": (two_h,), "att.b": (1,),
        "label.U": (labels, two_h, two_h),
        "label.wh": (labels, two_h), "label.wd": (labels, two_h),
        "label.b": (labels,),
    }


def _embed(model: ScorerModel, sentence: Sentence) -> tuple[np.ndarray, list[int], list[int]]:
    w_ids, p_ids = model.token_ids(sentence)
    X = np.concatenate([model.params["emb.word"][w_ids],
                        model.params["emb.pos"][p_ids]], axis=1)
    return X, w_ids, p_ids


def _encode_cached(model: ScorerModel, X: np.ndarray):
    n = X.shape[0]
    h = model.config.enc_hidden
    p = model.params
    hf = np.zeros(h)
    cf = np.zeros(h)
    fwd_states = np.empty((n, h))
    fwd_caches = []
    for i in range(n):
        hf, cf, cache = lstm_step(p, "enc_f", X[i], hf, cf)
        fwd_states[i] = hf
        fwd_caches.append(cache)
    hb = np.zeros(h)
    cb = np.zeros(h)
    bwd_states = np.empty((n, h))
    bwd_caches: list = [None] * n
    for i in range(n - 1, -1, -1):
        hb, cb, cache = lstm_step(p, "enc_b", X[i], hb, cb)
        bwd_states[i] = hb
        bwd_caches[i] = cache
    S = np.empty((n + 1, 2 * h))
    S[0] = p["root"]
    S[1:, :h] = fwd_states
    S[1:, h:] = bwd_states
    return S, fwd_caches, bwd_caches


def encode(model: ScorerModel, sentence: Sentence) -> EncodedSentence:
    """Run the bidirectional encoder; state i concatenates the forward pass
    up to word i with the backward pass down to word i."""
    X, _, _ = _embed(model, sentence)
    S, _, _ = _encode_cached(model, X)
    return EncodedSentence(S)


def _context_rows(n: int, position: int, use_root: bool) -> list[int]:
    """Rows of the encoded matrix summed into one decoder input.

    Out-of-range neighbours contribute nothing (the zero-vector convention);
    the root row participates only when the position itself is the root.
    """
    rows = []
    if use_root and position == 0:
        rows.append(0)
    elif position >= 1:
        rows.append(position)
    if position - 1 >= 1:
        rows.append(position - 1)
    if position + 1 <= n:
        rows.append(position + 1)
    return rows


def focus_context(enc: EncodedSentence, i: int) -> np.ndarray:
    """Decoder input for focus word i: its encoder state plus those of the
    previous and next words, zero vectors at the boundaries."""
    n = len(enc)
    if not 1 <= i <= n:
        raise ValueError(f"focus index {i} out of range 1..{n}")
    rows = _context_rows(n, i, use_root=False)
    return enc.all_states[rows].sum(axis=0)


def stack_top_context(enc: EncodedSentence, i: int) -> np.ndarray:
    """Decoder input for the top-down system: same neighbour scheme, with the
    learned root vector standing in when the root is on top."""
    n = len(enc)
    if not 0 <= i <= n:
        raise ValueError(f"stack top {i} out of range 0..{n}")
    rows = _context_rows(n, i, use_root=True)
    return enc.all_states[rows].sum(axis=0)


def decoder_start(model: ScorerModel) -> DecoderState:
    return DecoderState(model.params["dec.h0"].copy(), model.params["dec.c0"].copy())


def decoder_step(model: ScorerModel, prev: DecoderState, u: np.ndarray) -> DecoderState:
    h, c, _ = lstm_step(model.params, "dec", u, prev.h, prev.c)
    return DecoderState(h, c)


def biaffine_score(model: ScorerModel, d: np.ndarray, s: np.ndarray) -> float:
    """Bilinear head score plus linear terms and bias."""
    p = model.params
    return float(d @ p["att.W"] @ s + p["att.u"] @ d + p["att.v"] @ s + p["att.b"][0])


def _pointer_scores(params: dict, d: np.ndarray, S: np.ndarray):
    """Scores of every position at once; returns (scores, q) with q the
    precomputed right-hand factor reused by the backward pass."""
    q = params["att.W"].T @ d + params["att.v"]
    scores = S @ q + params["att.u"] @ d + params["att.b"][0]
    return scores, q


def _as_excluded(mask: "Iterable[int] | np.ndarray", size: int) -> np.ndarray:
    if isinstance(mask, np.ndarray) and mask.dtype == bool:
        if mask.shape != (size,):
            raise ValueError(f"mask shape {mask.shape} does not match {size} positions")
        return mask
    excluded = np.zeros(size, dtype=bool)
    for pos in mask:
        excluded[pos] = True
    return excluded


def attention_step(model: ScorerModel, d: np.ndarray, enc: EncodedSentence,
                   mask: "Iterable[int] | np.ndarray") -> AttentionStep:
    """Score all positions against decoder state ``d`` and normalize over the
    candidates; masked positions get exactly zero probability."""
    S = enc.all_states
    excluded = _as_excluded(mask, S.shape[0])
    scores, _ = _pointer_scores(model.params, d, S)
    probs, _ = masked_log_softmax(scores, excluded)
    return AttentionStep(scores=scores, dist=probs, excluded=excluded)


def label_logits(model: ScorerModel, head_state: np.ndarray,
                 dep_state: np.ndarray) -> np.ndarray:
    """Per-label biaffine scores for one (head, dependent) state pair."""
    p = model.params
    bilinear = np.tensordot(head_state, p["label.U"], axes=(0, 1)) @ dep_state
    return bilinear + p["label.wh"] @ head_state + p["label.wd"] @ dep_state + p["label.b"]


def _batched_label_logits(params: dict, SH: np.ndarray, SD: np.ndarray) -> np.ndarray:
    # (n, L, 2h) intermediate via BLAS, then contract against the dep states
    T = np.tensordot(SH, params["label.U"], axes=(1, 1))
    logits = (T * SD[:, None, :]).sum(axis=2)
    logits += SH @ params["label.wh"].T + SD @ params["label.wd"].T + params["label.b"]
    return logits


def predict_labels(model: ScorerModel, enc: EncodedSentence,
                   heads: list[int]) -> list[int]:
    """Most likely label id for each arc, given the chosen head positions."""
    S = enc.all_states
    SH = S[np.asarray(heads, dtype=int)]
    SD = S[1:]
    logits = _batched_label_logits(model.params, SH, SD)
    return [int(k) for k in logits.argmax(axis=1)]


def _training_steps(model: ScorerModel, n: int, gold: DependencyTree, mode: str):
    """Teacher-forced step plan: decoder input rows, candidate mask and gold
    target for every attention step of the oracle sequence."""
    steps = []
    if mode == "l2r":
        for i in range(1, n + 1):
            excluded = np.zeros(n + 1, dtype=bool)
            excluded[i] = True
            # training masks only the focus word; cycles are a decoding matter
            assert int((~excluded).sum()) == n
            steps.append((_context_rows(n, i, use_root=False), excluded,
                          gold.heads[i - 1]))
    elif mode == "topdown":
        state = td_initial(n)
        for action in td_oracle(gold):
            allowed = td_legal_targets(state)
            excluded = np.ones(n + 1, dtype=bool)
            excluded[allowed] = False
            steps.append((_context_rows(n, state.top, use_root=True), excluded,
                          action))
            state = td_apply(state, action)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return steps


def sentence_loss(model: ScorerModel, sentence: Sentence, gold: DependencyTree,
                  mode: str, dropout_rng: np.random.Generator | None = None):
    """Joint negative log-likelihood of the gold head sequence and labels,
    with gradients for every parameter tensor.

    The decoder is teacher-forced along the oracle action sequence of the
    requested transition system.  Returns (loss, grads).
    """
    if not validate_tree(gold):
        raise ValueError("gold annotation is not a valid dependency tree")
    n = len(sentence)
    if len(gold.heads) != n:
        raise ValueError(f"gold tree has {len(gold.heads)} words, sentence has {n}")
    p = model.params
    grads = model.new_grads()

    X, w_ids, p_ids = _embed(model, sentence)
    drop_mask = None
    rate = model.config.dropout
    if dropout_rng is not None and rate > 0.0:
        drop_mask = (dropout_rng.random(X.shape) >= rate) / (1.0 - rate)
        X = X * drop_mask
    S, fwd_caches, bwd_caches = _encode_cached(model, X)

    steps = _training_steps(model, n, gold, mode)

    # decoder sweep with per-step attention
    h = p["dec.h0"]
    c = p["dec.c0"]
    loss = 0.0
    dec_caches = []
    for rows, excluded, target in steps:
        u = S[rows].sum(axis=0)
        h, c, cache = lstm_step(p, "dec", u, h, c)
        scores, q = _pointer_scores(p, h, S)
        probs, logp = masked_log_softmax(scores, excluded)
        loss -= logp[target]
        dec_caches.append((cache, rows, probs, target, q, h))

    # label classifier over the gold arcs
    head_rows = np.asarray(gold.heads, dtype=int)
    dep_rows = np.arange(1, n + 1)
    SH = S[head_rows]
    SD = S[dep_rows]
    logits = _batched_label_logits(p, SH, SD)
    shift = logits.max(axis=1, keepdims=True)
    expl = np.exp(logits - shift)
    label_probs = expl / expl.sum(axis=1, keepdims=True)
    gold_labels = np.asarray(gold.labels, dtype=int)
    picked = logits[dep_rows - 1, gold_labels] - shift[:, 0]
    loss -= float(picked.sum() - np.log(expl.sum(axis=1)).sum())

    # ---- backward ----
    dS = np.zeros_like(S)

    dlogits = label_probs.copy()
    dlogits[dep_rows - 1, gold_labels] -= 1.0
    grads["label.U"] += np.einsum("nl,na,nb->lab", dlogits, SH, SD, optimize=True)
    grads["label.wh"] += dlogits.T @ SH
    grads["label.wd"] += dlogits.T @ SD
    grads["label.b"] += dlogits.sum(axis=0)
    dSH = np.einsum("nl,lab,nb->na", dlogits, p["label.U"], SD, optimize=True)
    dSD = np.einsum("nl,lab,na->nb", dlogits, p["label.U"], SH, optimize=True)
    np.add.at(dS, head_rows, dSH)
    np.add.at(dS, dep_rows, dSD)

    dh_next = np.zeros_like(p["dec.h0"])
    dc_next = np.zeros_like(p["dec.c0"])
    for cache, rows, probs, target, q, d in reversed(dec_caches):
        dv = probs.copy()
        dv[target] -= 1.0
        dq = S.T @ dv
        dS += np.outer(dv, q)
        total = dv.sum()
        grads["att.u"] += d * total
        grads["att.b"] += total
        grads["att.v"] += dq
        grads["att.W"] += np.outer(d, dq)
        dh = dh_next + p["att.u"] * total + p["att.W"] @ dq
        du, dh_next, dc_next = lstm_step_backward(p, grads, "dec", cache, dh, dc_next)
        for r in rows:
            dS[r] += du
    grads["dec.h0"] += dh_next
    grads["dec.c0"] += dc_next

    grads["root"] += dS[0]
    dE = dS[1:]
    enc_h = model.config.enc_hidden
    dX = np.zeros_like(X)
    dh_acc = np.zeros(enc_h)
    dc_acc = np.zeros(enc_h)
    for i in range(n - 1, -1, -1):
        dh = dE[i, :enc_h] + dh_acc
        dx, dh_acc, dc_acc = lstm_step_backward(p, grads, "enc_f", fwd_caches[i], dh, dc_acc)
        dX[i] += dx
    dh_acc = np.zeros(enc_h)
    dc_acc = np.zeros(enc_h)
    for i in range(n):
        dh = dE[i, enc_h:] + dh_acc
        dx, dh_acc, dc_acc = lstm_step_backward(p, grads, "enc_b", bwd_caches[i], dh, dc_acc)
        dX[i] += dx
    if drop_mask is not None:
        dX *= drop_mask
    dw = model.config.word_dim
    np.add.at(grads["emb.word"], np.asarray(w_ids), dX[:, :dw])
    np.add.at(grads["emb.pos"], np.asarray(p_ids), dX[:, dw:])

    return float(loss), grads
