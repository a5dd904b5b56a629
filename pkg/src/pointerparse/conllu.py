"""CoNLL-U / CoNLL-X treebank reading and writing.

Both formats carry 10 tab-separated columns per word line, sentences are
separated by blank lines and ``#`` lines are comments.  The reader uses the
columns the two formats share by position: ID, FORM, column 4 as the
universal/coarse tag, column 5 as the language-specific tag, HEAD and DEPREL.
The trailing columns (DEPS/MISC in CoNLL-U, PHEAD/PDEPREL in CoNLL-X) are
ignored.  Multiword-token ranges (``1-2``) and empty nodes (``1.1``) are
skipped; input must be strict UTF-8.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence

from .trees import DependencyTree, validate_tree

PTB_PUNCT_TAGS = frozenset({"``", "''", ":", ",", "."})


class TreebankError(ValueError):
    """Malformed treebank input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    upos: str
    xpos: str
    head: int
    deprel: str


@dataclass
class Sentence:
    tokens: list[Token]
    sent_id: str | None = None
    comments: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def gold_heads(self) -> list[int]:
        return [t.head for t in self.tokens]

    @property
    def gold_labels(self) -> list[str]:
        return [t.deprel for t in self.tokens]


def is_evaluation_punct(token: Token, mode: str = "ud") -> bool:
    """Whether a token is excluded from attachment scoring as punctuation.

    ``ptb`` tests the language-specific tag against the standard PTB
    punctuation tag set, ``ud`` tests the universal tag against PUNCT and
    ``none`` excludes nothing.
    """
    if mode == "ptb":
        return token.xpos in PTB_PUNCT_TAGS
    if mode == "ud":
        return token.upos == "PUNCT"
    if mode == "none":
        return False
    raise ValueError(f"unknown punctuation mode {mode!r}")


def _is_word_id(col: str) -> bool:
    return col.isdigit()


def _is_skipped_id(col: str) -> bool:
    # multiword-token ranges look like "1-2", empty nodes like "1.1"
    if "-" in col:
        a, _, b = col.partition("-")
        return a.isdigit() and b.isdigit()
    if "." in col:
        a, _, b = col.partition(".")
        return a.isdigit() and b.isdigit()
    return False


def read_conllu(stream: BinaryIO) -> list[Sentence]:
    """Parse a CoNLL-U byte stream into sentences.

    Gold annotations are validated on load: indices must be contiguous from
    1, heads in range and acyclic.  Violations raise TreebankError naming the
    offending line.
    """
    sentences: list[Sentence] = []
    comments: list[str] = []
    rows: list[tuple[int, list[str]]] = []
    sent_start = 1

    def flush(end_line: int) -> None:
        nonlocal comments, rows
        if not rows:
            comments = []
            return
        tokens = []
        for pos, (lineno, cols) in enumerate(rows, start=1):
            index = int(cols[0])
            if index != pos:
                raise TreebankError(
                    f"non-contiguous word index {index}, expected {pos}", lineno)
            try:
                head = int(cols[6])
            except ValueError:
                raise TreebankError(f"non-integer head {cols[6]!r}", lineno) from None
            if head < 0 or head > len(rows):
                raise TreebankError(f"head {head} out of range 0..{len(rows)}", lineno)
            if head == index:
                raise TreebankError(f"word {index} heads itself", lineno)
            tokens.append(Token(index=index, form=cols[1], upos=cols[3],
                                xpos=cols[4], head=head, deprel=cols[7]))
        if not validate_tree(DependencyTree([t.head for t in tokens])):
            raise TreebankError(
                "gold heads contain a cycle or unreachable word "
                f"(sentence starting at line {sent_start})", end_line)
        sent_id = None
        for c in comments:
            body = c.lstrip("#").strip()
            if body.startswith("sent_id"):
                _, _, value = body.partition("=")
                sent_id = value.strip()
        sentences.append(Sentence(tokens, sent_id=sent_id, comments=list(comments)))
        comments = []
        rows = []

    lineno = 0
    for lineno, raw in enumerate(stream.read().split(b"\n"), start=1):
        try:
            line = raw.decode("utf-8", errors="strict")
        except UnicodeDecodeError as exc:
            raise TreebankError(f"invalid UTF-8: {exc.reason}", lineno) from None
        line = line.rstrip("\r")
        if not line.strip():
            flush(lineno)
            sent_start = lineno + 1
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise TreebankError(f"expected 10 columns, found {len(cols)}", lineno)
        if _is_skipped_id(cols[0]):
            continue
        if not _is_word_id(cols[0]):
            raise TreebankError(f"unparseable word id {cols[0]!r}", lineno)
        rows.append((lineno, cols))
    flush(lineno + 1)
    return sentences


def load_treebank(path: str) -> list[Sentence]:
    with open(path, "rb") as f:
        return read_conllu(f)


def write_conllu(sentences: Sequence[Sentence],
                 predicted: Sequence[DependencyTree] | None = None,
                 label_names: Sequence[str] | None = None) -> bytes:
    """Serialize sentences back to CoNLL-U.

    With ``predicted`` given, the HEAD and DEPREL columns carry the predicted
    trees (labels decoded through ``label_names``); otherwise the gold
    annotation is written.  Unmodelled columns are emitted as ``_``.
    """
    if predicted is not None and len(predicted) != len(sentences):
        raise ValueError(
            f"{len(sentences)} sentences but {len(predicted)} predicted trees")
    out: list[str] = []
    for k, sent in enumerate(sentences):
        tree = predicted[k] if predicted is not None else None
        if tree is not None and len(tree) != len(sent):
            raise ValueError(
                f"sentence {k}: {len(sent)} words but predicted tree has {len(tree)}")
        out.extend(sent.comments)
        for i, tok in enumerate(sent.tokens):
            if tree is None:
                head, deprel = tok.head, tok.deprel
            else:
                head = tree.heads[i]
                label_id = tree.labels[i]
                deprel = (label_names[label_id] if label_names is not None
                          else str(label_id))
            out.append("\t".join([str(tok.index), tok.form, "_", tok.upos,
                                  tok.xpos, "_", str(head), deprel, "_", "_"]))
        out.append("")
    return ("\n".join(out) + ("\n" if out else "")).encode("utf-8")


def iter_word_lines(data: bytes) -> Iterable[list[str]]:
    """Yield the column lists of plain word lines (used by roundtrip checks)."""
    for raw in data.split(b"\n"):
        line = raw.decode("utf-8").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if _is_skipped_id(cols[0]):
            continue
        yield cols
