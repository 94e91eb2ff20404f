"""Automatic evaluation: corpus BLEU-n, ROUGE-L, pronoun P/R/F and
attention-mass diagnostics.

Token-level throughout; the evaluation set carries one reference per
candidate.  BLEU uses aggregated corpus counts with no smoothing -- an order
with zero matches yields a 0 score.  ROUGE-L is the LCS F-measure with the
recall-leaning beta of the common evaluation toolkits (beta = 1.2).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, asdict, field

from .corpus.coref import PRONOUN_LEXICON

ROUGE_BETA = 1.2


def _ngram_counts(tokens: list[str], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu_n(candidates: list[list[str]], references: list[list[str]], n: int) -> float:
    """Corpus-level BLEU-n: geometric mean of clipped modified precisions of
    orders 1..n, times the brevity penalty."""
    if not candidates:
        raise ValueError("empty candidate set")
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align one-to-one")
    if n < 1:
        raise ValueError("n must be >= 1")
    matched = [0] * n
    total = [0] * n
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for order in range(1, n + 1):
            cand_counts = _ngram_counts(cand, order)
            ref_counts = _ngram_counts(ref, order)
            matched[order - 1] += sum((cand_counts & ref_counts).values())
            total[order - 1] += max(len(cand) - order + 1, 0)
    if cand_len == 0:
        return 0.0
    # orders with no n-gram slots anywhere (every candidate shorter than the
    # order) are unmeasurable and drop out of the geometric mean; a measurable
    # order with zero matches still zeroes the score
    logs = []
    for order in range(n):
        if total[order] == 0:
            continue
        if matched[order] == 0:
            return 0.0
        logs.append(math.log(matched[order] / total[order]))
    if not logs:
        return 0.0
    log_precision = sum(logs) / len(logs)
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> float:
    """LCS-based F-measure of one candidate/reference pair."""
    if not reference:
        raise ValueError("empty reference")
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    beta_sq = ROUGE_BETA**2
    return (1 + beta_sq) * precision * recall / (recall + beta_sq * precision)


def rouge_l_corpus(candidates: list[list[str]], references: list[list[str]]) -> float:
    if not candidates:
        raise ValueError("empty candidate set")
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align one-to-one")
    return sum(rouge_l(c, r) for c, r in zip(candidates, references)) / len(candidates)


def coreference_subset(examples: list) -> list:
    """Examples whose target question has a pronoun resolved into history."""
    return [ex for ex in examples if getattr(ex, "coref", None) is not None]


def pronoun_prf(
    candidates: list[list[str]],
    references: list[list[str]],
    pronoun_lexicon: frozenset[str] | set[str] = PRONOUN_LEXICON,
) -> tuple[float, float, float]:
    """Micro-averaged multiset precision/recall/F of pronoun tokens."""
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align one-to-one")
    overlap = 0
    cand_total = 0
    ref_total = 0
    for cand, ref in zip(candidates, references):
        cand_pron = Counter(t for t in cand if t in pronoun_lexicon)
        ref_pron = Counter(t for t in ref if t in pronoun_lexicon)
        overlap += sum((cand_pron & ref_pron).values())
        cand_total += sum(cand_pron.values())
        ref_total += sum(ref_pron.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


@dataclass
class AttentionMass:
    ces_mass: float
    hes_mass: float
    counted: int
    excluded: int  # examples without any current-evidence token


def attention_mass(
    alpha_traces: list[list[list[float]]],
    ces_masks: list[list[bool]],
    hes_masks: list[list[bool]],
) -> AttentionMass:
    """Mean fraction of (timestep-averaged) passage attention falling on
    current/history evidence tokens.  Examples without current-evidence
    tokens are excluded and counted."""
    ces_vals = []
    hes_vals = []
    excluded = 0
    for trace, ces, hes in zip(alpha_traces, ces_masks, hes_masks):
        if not any(ces) or not trace:
            excluded += 1
            continue
        m = len(ces)
        mean_alpha = [0.0] * m
        for alpha in trace:
            for j in range(m):
                mean_alpha[j] += alpha[j]
        total = sum(mean_alpha)
        if total <= 0.0:
            excluded += 1
            continue
        ces_vals.append(sum(a for a, flag in zip(mean_alpha, ces) if flag) / total)
        hes_vals.append(sum(a for a, flag in zip(mean_alpha, hes) if flag) / total)
    if not ces_vals:
        return AttentionMass(math.nan, math.nan, 0, excluded)
    n = len(ces_vals)
    return AttentionMass(sum(ces_vals) / n, sum(hes_vals) / n, n, excluded)


@dataclass
class EvalReport:
    bleu1: float
    bleu2: float
    bleu3: float
    rouge_l: float
    pronoun_precision: float = 0.0
    pronoun_recall: float = 0.0
    pronoun_f: float = 0.0
    ces_mass: float = math.nan
    hes_mass: float = math.nan
    num_examples: int = 0
    num_coreference: int = 0
    num_attention: int = 0
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def has_nan(self) -> bool:
        core = [self.bleu1, self.bleu2, self.bleu3, self.rouge_l,
                self.pronoun_precision, self.pronoun_recall, self.pronoun_f]
        return any(math.isnan(v) for v in core)

    def table(self) -> str:
        rows = [
            ("BLEU-1", self.bleu1),
            ("BLEU-2", self.bleu2),
            ("BLEU-3", self.bleu3),
            ("ROUGE-L", self.rouge_l),
            ("Pronoun P", self.pronoun_precision),
            ("Pronoun R", self.pronoun_recall),
            ("Pronoun F", self.pronoun_f),
        ]
        lines = [f"{name:<12} {100 * value:6.2f}" for name, value in rows]
        if not math.isnan(self.ces_mass):
            lines.append(f"{'CES mass':<12} {self.ces_mass:6.4f}")
            lines.append(f"{'HES mass':<12} {self.hes_mass:6.4f}")
        lines.append(f"{'examples':<12} {self.num_examples:6d}")
        lines.append(f"{'coref subset':<12} {self.num_coreference:6d}")
        return "\n".join(lines)


def evaluate_generations(
    candidates: list[list[str]],
    references: list[list[str]],
    coref_flags: list[bool] | None = None,
    alpha_traces: list[list[list[float]]] | None = None,
    ces_masks: list[list[bool]] | None = None,
    hes_masks: list[list[bool]] | None = None,
) -> EvalReport:
    """Full report over aligned candidate/reference token lists.

    Pronoun P/R/F is computed on the coreference subset when ``coref_flags``
    is given (the paper-style protocol), otherwise over everything.
    """
    flags = []
    report = EvalReport(
        bleu1=bleu_n(candidates, references, 1),
        bleu2=bleu_n(candidates, references, 2),
        bleu3=bleu_n(candidates, references, 3),
        rouge_l=rouge_l_corpus(candidates, references),
        num_examples=len(candidates),
        flags=flags,
    )
    if coref_flags is not None:
        sub = [(c, r) for c, r, f in zip(candidates, references, coref_flags) if f]
        report.num_coreference = len(sub)
        pron_pairs = sub
    else:
        pron_pairs = list(zip(candidates, references))
    if pron_pairs:
        p, r, f = pronoun_prf([c for c, _ in pron_pairs], [r for _, r in pron_pairs])
        report.pronoun_precision, report.pronoun_recall, report.pronoun_f = p, r, f
        if p == 0.0 and r == 0.0:
            flags.append("no_pronoun_overlap")
    if alpha_traces is not None and ces_masks is not None and hes_masks is not None:
        mass = attention_mass(alpha_traces, ces_masks, hes_masks)
        report.ces_mass = mass.ces_mass
        report.hes_mass = mass.hes_mass
        report.num_attention = mass.counted
        if mass.excluded:
            flags.append(f"attention_excluded={mass.excluded}")
    return report
