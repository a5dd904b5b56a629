"""Dependency tree and vocabulary types shared by the whole toolkit."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .conllu import Sentence

PAD = "<pad>"
UNK = "<unk>"


@dataclass
class DependencyTree:
    """A head assignment over words 1..n plus one label id per word.

    ``heads[i]`` is the head position (0 = artificial root) of word ``i+1``.
    """

    heads: list[int]
    labels: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.heads = [int(h) for h in self.heads]
        if not self.labels:
            self.labels = [0] * len(self.heads)

    def __len__(self) -> int:
        return len(self.heads)


def validate_tree(tree: DependencyTree) -> bool:
    """Check that a head array forms a forest rooted at node 0.

    Implemented as a traversal from the root over child lists, independent of
    the union-find tracker, so it doubles as the cycle-check oracle: true iff
    every head is in range, no word heads itself, and every word is reachable
    from node 0.
    """
    n = len(tree.heads)
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for dep0, head in enumerate(tree.heads):
        dep = dep0 + 1
        if head < 0 or head > n or head == dep:
            return False
        children[head].append(dep)
    seen = 0
    stack = [0]
    visited = [False] * (n + 1)
    visited[0] = True
    while stack:
        node = stack.pop()
        for child in children[node]:
            if not visited[child]:
                visited[child] = True
                seen += 1
                stack.append(child)
    return seen == n


def gold_tree(sentence: "Sentence", vocab: "Vocabulary | None" = None) -> DependencyTree:
    """Build the gold DependencyTree of a sentence, mapping labels through
    ``vocab`` when given (unknown labels map to id 0)."""
    heads = [tok.head for tok in sentence.tokens]
    if vocab is None:
        labels = [0] * len(heads)
    else:
        labels = [vocab.label_id(tok.deprel) for tok in sentence.tokens]
    return DependencyTree(heads, labels)


class Vocabulary:
    """Bijective string<->id maps for word forms, POS tags and labels.

    Words reserve id 0 for padding and id 1 for unknowns; POS tags reserve
    id 0 for unknowns.  Labels carry no reserved ids: the classifier only
    ever predicts labels seen in training, and unseen gold labels simply
    never match (they count as LAS errors).
    """

    def __init__(self, words: Sequence[str], pos: Sequence[str],
                 labels: Sequence[str], freq: dict[str, int] | None = None):
        self.words = [PAD, UNK, *words]
        self.pos = [UNK, *pos]
        self.labels = list(labels)
        self.freq = dict(freq or {})
        self._word_ids = {w: i for i, w in enumerate(self.words)}
        self._pos_ids = {p: i for i, p in enumerate(self.pos)}
        self._label_ids = {l: i for i, l in enumerate(self.labels)}
        if len(self._word_ids) != len(self.words):
            raise ValueError("duplicate word forms in vocabulary")
        if len(self._label_ids) != len(self.labels):
            raise ValueError("duplicate labels in vocabulary")

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    def word_id(self, form: str) -> int:
        return self._word_ids.get(form, 1)

    def pos_id(self, tag: str) -> int:
        return self._pos_ids.get(tag, 0)

    def label_id(self, label: str) -> int:
        return self._label_ids.get(label, 0)

    def label_name(self, label_id: int) -> str:
        return self.labels[label_id]

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def n_pos(self) -> int:
        return len(self.pos)

    @property
    def n_labels(self) -> int:
        return len(self.labels)


def build_vocabulary(train: Sequence["Sentence"], min_freq: int = 1) -> Vocabulary:
    """Collect the training vocabulary.

    Word forms below ``min_freq`` are dropped (they will map to the unknown
    id); every POS tag and dependency label seen in training is retained.
    Orders are deterministic: words by descending frequency then form, tags
    and labels alphabetically.
    """
    if not train:
        raise ValueError("cannot build a vocabulary from an empty treebank")
    freq: Counter[str] = Counter()
    pos: set[str] = set()
    labels: set[str] = set()
    for sent in train:
        for tok in sent.tokens:
            freq[tok.form] += 1
            pos.add(tok.upos)
            labels.add(tok.deprel)
    kept = sorted((w for w, c in freq.items() if c >= min_freq),
                  key=lambda w: (-freq[w], w))
    return Vocabulary(kept, sorted(pos), sorted(labels), dict(freq))
