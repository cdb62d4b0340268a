"""Text similarity metrics, rank agreement and run aggregation."""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from ._backend import kendall_counts, lcs_length


class MetricError(ValueError):
    pass


class LengthMismatch(MetricError):
    pass


class AllTied(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class Metric(str, Enum):
    EXACT_MATCH = "ExactMatch"
    BLEU = "Bleu"
    COSINE_SIM = "CosineSim"
    KENDALL_TAU = "KendallTau"


TEXT_METRICS = (Metric.EXACT_MATCH, Metric.BLEU, Metric.COSINE_SIM)


@dataclass
class MetricValue:
    metric: Metric
    value: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"metric": self.metric.value, "value": self.value, "details": self.details}


_DASH_RE = re.compile("[‐‑‒–—―−]")
_SPACE_RE = re.compile(r"[ \t\f\v ]+")
_TOKEN_RE = re.compile(r"[^\W_]+")


def canonicalize(text: str) -> str:
    """Trim lines, collapse blanks, lowercase and map dash variants to ``-``."""
    text = _DASH_RE.sub("-", text.lower())
    lines = (_SPACE_RE.sub(" ", line).strip() for line in text.splitlines())
    return "\n".join(line for line in lines if line)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; whitespace and punctuation are separators."""
    return _TOKEN_RE.findall(text.lower())


def _clip(value: float) -> float:
    return min(1.0, max(0.0, value))


# -- exact match ---------------------------------------------------------------


def exact_match_value(candidate: str, reference: str, canonical: bool = True) -> MetricValue:
    if canonical:
        candidate, reference = canonicalize(candidate), canonicalize(reference)
    total = len(candidate) + len(reference)
    if total == 0:
        return MetricValue(Metric.EXACT_MATCH, 1.0, {"indel_distance": 0, "length": 0})
    lcs = lcs_length(candidate, reference)
    distance = total - 2 * lcs
    return MetricValue(
        Metric.EXACT_MATCH,
        (total - distance) / total,
        {"indel_distance": distance, "length": total},
    )


def exact_match(candidate: str, reference: str, canonical: bool = True) -> float:
    """Normalised indel similarity ``(|a|+|b|-d) / (|a|+|b|)``."""
    return exact_match_value(candidate, reference, canonical).value


# -- BLEU --------------------------------------------------------------------------


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_value(candidate: str, reference: str, max_order: int = 4) -> MetricValue:
    cand, ref = tokenize(candidate), tokenize(reference)
    c, r = len(cand), len(ref)
    matches, totals = [], []
    for n in range(1, max_order + 1):
        cand_ngrams = _ngrams(cand, n)
        ref_ngrams = _ngrams(ref, n)
        matches.append(sum(min(k, ref_ngrams[g]) for g, k in cand_ngrams.items()))
        totals.append(max(c - n + 1, 0))
    details = {"matches": matches, "totals": totals, "cand_len": c, "ref_len": r}
    if c == 0 or matches[0] == 0:
        details.update(precisions=[0.0] * max_order, brevity_penalty=0.0 if c == 0 else 1.0)
        return MetricValue(Metric.BLEU, 0.0, details)

    precisions = []
    smooth = 1.0
    for n in range(max_order):
        if totals[n] == 0:
            # Effective order: candidates shorter than n contribute no order-n term.
            break
        if matches[n] == 0:
            smooth *= 2
            precisions.append(1.0 / (smooth * totals[n]))
        else:
            precisions.append(matches[n] / totals[n])
    log_mean = sum(math.log(p) for p in precisions) / len(precisions)
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    details.update(precisions=precisions, brevity_penalty=bp, order=len(precisions))
    return MetricValue(Metric.BLEU, _clip(bp * math.exp(log_mean)), details)


def bleu(candidate: str, reference: str) -> float:
    """Sentence BLEU-4 with exponential smoothing and brevity penalty."""
    return bleu_value(candidate, reference).value


# -- TF-IDF cosine -------------------------------------------------------------------


def cosine_value(candidate: str, reference: str) -> MetricValue:
    docs = [Counter(tokenize(candidate)), Counter(tokenize(reference))]
    if not docs[0] or not docs[1]:
        return MetricValue(Metric.COSINE_SIM, 0.0, {"empty": True, "vocabulary": 0})
    vocabulary = sorted(set(docs[0]) | set(docs[1]))
    n_docs = len(docs)
    idf = {
        term: math.log((1 + n_docs) / (1 + sum(term in d for d in docs))) + 1 for term in vocabulary
    }
    details = {"empty": False, "vocabulary": len(vocabulary)}
    if docs[0] == docs[1]:
        # Identical term counts give parallel vectors; skip the rounding noise.
        return MetricValue(Metric.COSINE_SIM, 1.0, details)
    a, b = ([doc[t] * idf[t] for t in vocabulary] for doc in docs)
    dot = math.fsum(x * y for x, y in zip(a, b))
    value = dot / math.sqrt(math.fsum(x * x for x in a) * math.fsum(y * y for y in b))
    return MetricValue(Metric.COSINE_SIM, _clip(value), details)


def cosine_tfidf(candidate: str, reference: str) -> float:
    """Cosine of the two-document TF-IDF vectors (smoothed idf, L2 norm)."""
    return cosine_value(candidate, reference).value


# -- rank agreement ----------------------------------------------------------------


def kendall_value(ratings_a, ratings_b) -> MetricValue:
    if len(ratings_a) != len(ratings_b):
        raise LengthMismatch(f"{len(ratings_a)} vs {len(ratings_b)} ratings")
    if len(ratings_a) < 2:
        raise LengthMismatch("need at least two paired ratings")
    conc, disc, tx, ty = kendall_counts(list(ratings_a), list(ratings_b))
    denominator = math.sqrt((conc + disc + tx) * (conc + disc + ty))
    if denominator == 0:
        raise AllTied("tau-b is undefined when one rater gives a single value")
    value = max(-1.0, min(1.0, (conc - disc) / denominator))
    return MetricValue(
        Metric.KENDALL_TAU,
        value,
        {"concordant": conc, "discordant": disc, "ties_a": tx, "ties_b": ty},
    )


def kendall_tau(ratings_a, ratings_b) -> float:
    """Tie-corrected Kendall tau-b."""
    return kendall_value(ratings_a, ratings_b).value


# -- aggregation -----------------------------------------------------------------------


@dataclass(frozen=True)
class Aggregate:
    median: float
    stddev: float


def aggregate(values) -> Aggregate:
    """Median and population standard deviation."""
    values = list(values)
    if not values:
        raise EmptyInput("cannot aggregate an empty list")
    return Aggregate(statistics.median(values), statistics.pstdev(values))


# -- convenience ---------------------------------------------------------------------


_TEXT_FUNCS = {
    Metric.EXACT_MATCH: exact_match_value,
    Metric.BLEU: bleu_value,
    Metric.COSINE_SIM: cosine_value,
}


def score_text(
    candidate: str, reference: str, metrics=TEXT_METRICS, per_element: bool = False
) -> dict[Metric, MetricValue]:
    """All text metrics on whole documents.

    ``per_element`` is a diagnostic mode: lines are paired in order and the
    per-line scores averaged (unpaired lines score 0).
    """
    out = {}
    for metric in metrics:
        metric = Metric(metric)
        func = _TEXT_FUNCS[metric]
        if not per_element:
            out[metric] = func(candidate, reference)
            continue
        cand_lines = canonicalize(candidate).splitlines()
        ref_lines = canonicalize(reference).splitlines()
        width = max(len(cand_lines), len(ref_lines))
        if width == 0:
            out[metric] = func("", "")
            continue
        total = sum(func(c, r).value for c, r in zip(cand_lines, ref_lines))
        out[metric] = MetricValue(metric, total / width, {"lines": width, "per_element": True})
    return out
