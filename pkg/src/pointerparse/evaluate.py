"""Attachment scoring, multi-run aggregation and system comparison."""

from __future__ import annotations

import math
import time
from typing import Callable, Sequence

from .conllu import Sentence, is_evaluation_punct
from .decode import ParseResult, parse_sentence
from .trees import DependencyTree

# Full-scale reference values from the literature, quoted in comparison
# reports only; desk-scale runs are not expected to approach them.
REFERENCE = {
    "ptb_sd_l2r": {"uas": 96.04, "las": 94.43},
    "ptb_sd_topdown": {"uas": 95.87, "las": 94.19},
    "ptb_sd_speed_l2r": 23.08,
    "ptb_sd_speed_topdown": 10.24,
}


def score(gold: Sequence[Sentence], pred: Sequence[DependencyTree],
          punct_mode: str = "ud",
          label_names: Sequence[str] | None = None) -> dict:
    """UAS/LAS over non-punctuation tokens, as percentages.

    A token scores for LAS only when both its head and its label are correct;
    predicted label ids decode through ``label_names``.
    """
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences but {len(pred)} predictions")
    scored = 0
    head_hits = 0
    label_hits = 0
    for sent, tree in zip(gold, pred):
        if len(tree) != len(sent):
            raise ValueError(
                f"sentence {sent.sent_id or '?'}: {len(sent)} words, "
                f"prediction has {len(tree)}")
        for tok, head, label_id in zip(sent.tokens, tree.heads, tree.labels):
            if is_evaluation_punct(tok, punct_mode):
                continue
            scored += 1
            if head == tok.head:
                head_hits += 1
                predicted_label = (label_names[label_id]
                                   if label_names is not None else str(label_id))
                if predicted_label == tok.deprel:
                    label_hits += 1
    uas = 100.0 * head_hits / scored if scored else 0.0
    las = 100.0 * label_hits / scored if scored else 0.0
    return {
        "uas": uas,
        "las": las,
        "counts": {"scored": scored, "correct_heads": head_hits,
                   "correct_labeled": label_hits},
    }


def aggregate(runs: Sequence[dict]) -> dict:
    """Mean and population standard deviation of UAS/LAS over repeated runs."""
    if not runs:
        raise ValueError("need at least one run to aggregate")

    def stats(values: list[float]) -> dict:
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        return {"mean": mean, "stddev": math.sqrt(var)}

    return {
        "uas": stats([r["uas"] for r in runs]),
        "las": stats([r["las"] for r in runs]),
    }


def run_system(model, sentences: Sequence[Sentence], mode: str,
               beam_size: int = 1, cycle_policy: str = "forbid",
               parallel_map: Callable | None = None) -> tuple[list[ParseResult], float]:
    """Parse a treebank, returning per-sentence results and wall seconds."""
    start = time.perf_counter()
    if parallel_map is None:
        results = [parse_sentence(model, s, mode, beam_size, cycle_policy)
                   for s in sentences]
    else:
        results = list(parallel_map(
            lambda s: parse_sentence(model, s, mode, beam_size, cycle_policy),
            sentences))
    return results, time.perf_counter() - start


def compare_systems(sentences: Sequence[Sentence], model_l2r, model_td,
                    beam_size: int = 1, cycle_policy: str = "forbid",
                    punct_mode: str = "ud") -> dict:
    """Parse the same treebank with both systems and tabulate accuracy, step
    counts and throughput, alongside the full-scale reference numbers."""
    if not sentences:
        raise ValueError("cannot compare systems on an empty treebank")
    lengths = [len(s) for s in sentences]
    report: dict = {
        "sentences": len(sentences),
        "mean_length": sum(lengths) / len(lengths),
        "theoretical_step_ratio": sum(2 * n - 1 for n in lengths) / sum(lengths),
        "beam_size": beam_size,
        "reference": REFERENCE,
        "systems": {},
    }
    for name, model in (("l2r", model_l2r), ("topdown", model_td)):
        results, wall = run_system(model, sentences, name, beam_size, cycle_policy)
        metrics = score(sentences, [r.tree for r in results], punct_mode,
                        model.vocab.labels)
        total_steps = sum(r.attention_steps for r in results)
        report["systems"][name] = {
            "uas": metrics["uas"],
            "las": metrics["las"],
            "total_attention_steps": total_steps,
            "mean_steps_per_sentence": total_steps / len(sentences),
            "wall_seconds": wall,
            "sentences_per_second": len(sentences) / wall if wall > 0 else float("inf"),
            "repaired_sentences": sum(1 for r in results if r.repaired),
        }
    l2r_stats = report["systems"]["l2r"]
    td_stats = report["systems"]["topdown"]
    report["observed_step_ratio"] = (
        td_stats["total_attention_steps"] / l2r_stats["total_attention_steps"])
    report["observed_speedup"] = (
        td_stats["wall_seconds"] / l2r_stats["wall_seconds"]
        if l2r_stats["wall_seconds"] > 0 else float("inf"))
    return report


def render_comparison(report: dict) -> str:
    """Aligned plain-text rendering of a comparison report."""
    lines = []
    lines.append(f"sentences: {report['sentences']}   "
                 f"mean length: {report['mean_length']:.2f}   "
                 f"beam: {report['beam_size']}")
    header = f"{'system':<10}{'UAS':>8}{'LAS':>8}{'steps':>10}{'steps/sent':>12}{'sent/s':>10}"
    lines.append(header)
    lines.append("-" * len(header))
    for name in ("l2r", "topdown"):
        s = report["systems"][name]
        lines.append(f"{name:<10}{s['uas']:>8.2f}{s['las']:>8.2f}"
                     f"{s['total_attention_steps']:>10d}"
                     f"{s['mean_steps_per_sentence']:>12.2f}"
                     f"{s['sentences_per_second']:>10.2f}")
    lines.append(f"observed step ratio (topdown/l2r): {report['observed_step_ratio']:.3f}"
                 f"   theoretical (2n-1)/n: {report['theoretical_step_ratio']:.3f}")
    lines.append(f"observed wall-clock speedup (l2r over topdown): "
                 f"{report['observed_speedup']:.2f}x")
    ref = report["reference"]
    lines.append("reference, full-scale PTB-SD (literature): "
                 f"l2r {ref['ptb_sd_l2r']['uas']:.2f}/{ref['ptb_sd_l2r']['las']:.2f}, "
                 f"topdown {ref['ptb_sd_topdown']['uas']:.2f}/{ref['ptb_sd_topdown']['las']:.2f}, "
                 f"speed {ref['ptb_sd_speed_l2r']:.2f} vs {ref['ptb_sd_speed_topdown']:.2f} sent/s")
    return "\n".join(lines)
