"""Evaluation metrics: perplexity, REP/l, Zipf coefficient, n-gram diversity.

A scorer (for perplexity) is a callable ``scorer(seq) -> per-position
probabilities``, one value per token of ``seq``. Uniform and synthetic-LM
scorers ship with the package; anything matching the callable contract
works, which is also the hook for plugging in an external model.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from decodekit.core import Vocabulary

REP_WINDOWS = (16, 32, 128)


@dataclass(frozen=True)
class SequenceCorpus:
    sequences: tuple[tuple[int, ...], ...]
    vocab: Vocabulary

    def __post_init__(self) -> None:
        if not self.sequences:
            raise ValueError("corpus must contain at least one sequence")
        seqs = tuple(tuple(int(t) for t in s) for s in self.sequences)
        n = len(self.vocab)
        for i, seq in enumerate(seqs):
            for t in seq:
                if not 0 <= t < n:
                    raise ValueError(f"sequence {i}: token id {t} outside vocabulary of {n}")
        object.__setattr__(self, "sequences", seqs)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sequences)


class UniformScorer:
    """Assigns 1/n to every position; the degenerate reference scorer."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"uniform scorer needs n >= 1, got {n}")
        self.n = n

    def __call__(self, seq):
        return [1.0 / self.n] * len(seq)


def perplexity(corpus: SequenceCorpus, scorer) -> float:
    """exp of the average negative log-likelihood, sequences concatenated."""
    total_logp = 0.0
    total_tokens = 0
    for i, seq in enumerate(corpus.sequences):
        if not seq:
            continue
        probs = list(scorer(seq))
        if len(probs) != len(seq):
            raise ValueError(
                f"scorer returned {len(probs)} probabilities for sequence {i} of length {len(seq)}"
            )
        for pos, p in enumerate(probs):
            if p <= 0.0:
                raise ValueError(f"zero likelihood at sequence {i}, position {pos}")
            if p > 1.0:
                raise ValueError(f"probability {p!r} > 1 at sequence {i}, position {pos}")
        total_logp += float(np.sum(np.log(probs)))
        total_tokens += len(seq)
    if total_tokens == 0:
        raise ValueError("perplexity undefined for an empty corpus")
    return float(np.exp(-total_logp / total_tokens))


def rep_l(seq, l: int) -> float:
    """Fraction of positions whose token already occurs in the trailing window.

    Position 0 has no predecessors and is excluded from the denominator;
    position t looks back at the preceding min(l, t) tokens.
    """
    if l < 1:
        raise ValueError(f"window l must be >= 1, got {l}")
    seq = list(seq)
    if len(seq) < 2:
        raise ValueError(f"sequence too short for rep_l: length {len(seq)} < 2")
    repeats = 0
    for t in range(1, len(seq)):
        if seq[t] in seq[max(0, t - l) : t]:
            repeats += 1
    return repeats / (len(seq) - 1)


def zipf_coefficient(corpus: SequenceCorpus, min_rank: int = 1, max_rank: int | None = None) -> float:
    """Negated OLS slope of ln(frequency) against ln(rank).

    Rank 1 is the most frequent token. No truncation by default; the
    optional rank bounds clip the fitted range at both ends.
    """
    if min_rank < 1:
        raise ValueError(f"min_rank must be >= 1, got {min_rank}")
    if max_rank is not None and max_rank < min_rank:
        raise ValueError(f"max_rank {max_rank} < min_rank {min_rank}")
    counts = Counter()
    for seq in corpus.sequences:
        counts.update(seq)
    freqs = np.array(sorted(counts.values(), reverse=True), dtype=np.float64)
    if freqs.size < 2:
        raise ValueError("degenerate frequency table: fewer than 2 distinct tokens")
    ranks = np.arange(1, freqs.size + 1, dtype=np.float64)
    lo = min_rank - 1
    hi = freqs.size if max_rank is None else min(max_rank, freqs.size)
    x = np.log(ranks[lo:hi])
    y = np.log(freqs[lo:hi])
    if x.size < 2:
        raise ValueError("degenerate frequency table: fewer than 2 ranks after truncation")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise ValueError("degenerate frequency table: zero rank variance")
    slope = float(np.dot(xc, y - y.mean())) / denom
    return -slope


def ngram_diversity(seq) -> float:
    """Mean over n in 1..4 of (unique n-grams / total n-grams)."""
    seq = tuple(seq)
    if len(seq) < 4:
        raise ValueError(f"sequence too short for n-gram diversity: length {len(seq)} < 4")
    fractions = []
    for n in range(1, 5):
        grams = [seq[i : i + n] for i in range(len(seq) - n + 1)]
        fractions.append(len(set(grams)) / len(grams))
    return sum(fractions) / 4.0


@dataclass(frozen=True)
class MetricsReport:
    ppl: float
    rep16: float
    rep32: float
    rep128: float
    zipf: float
    diversity: float
    diversity_sum: float
    sequence_count: int
    token_count: int
    ppl_delta: float | None = None
    zipf_delta: float | None = None

    def to_json_dict(self) -> dict:
        out: dict = {"ppl": self.ppl}
        if self.ppl_delta is not None:
            out["ppl_delta"] = self.ppl_delta
        out.update(rep16=self.rep16, rep32=self.rep32, rep128=self.rep128, zipf=self.zipf)
        if self.zipf_delta is not None:
            out["zipf_delta"] = self.zipf_delta
        out.update(
            diversity=self.diversity,
            diversity_sum=self.diversity_sum,
            sequence_count=self.sequence_count,
            token_count=self.token_count,
        )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        d = self.to_json_dict()
        header = ",".join(d.keys())
        row = ",".join(repr(v) if isinstance(v, float) else str(v) for v in d.values())
        return header + "\n" + row + "\n"


def _mean_over_sequences(corpus: SequenceCorpus, fn) -> float:
    values = [fn(seq) for seq in corpus.sequences]
    return sum(values) / len(values)


def report(
    generated: SequenceCorpus,
    scorer,
    reference: SequenceCorpus | None = None,
    zipf_min_rank: int = 1,
    zipf_max_rank: int | None = None,
) -> MetricsReport:
    """Compute the full metric set; deltas are included when a reference is given.

    The reference corpus is scored with the same scorer, so ppl_delta
    measures the gap between generated and reference likelihoods under one
    model, matching how deviation-from-reference is usually reported.
    """
    ppl = perplexity(generated, scorer)
    reps = {l: _mean_over_sequences(generated, lambda s: rep_l(s, l)) for l in REP_WINDOWS}
    zipf = zipf_coefficient(generated, min_rank=zipf_min_rank, max_rank=zipf_max_rank)
    diversity = _mean_over_sequences(generated, ngram_diversity)
    ppl_delta = zipf_delta = None
    if reference is not None:
        ppl_delta = abs(ppl - perplexity(reference, scorer))
        zipf_delta = abs(zipf - zipf_coefficient(reference, min_rank=zipf_min_rank, max_rank=zipf_max_rank))
    return MetricsReport(
        ppl=ppl,
        rep16=reps[16],
        rep32=reps[32],
        rep128=reps[128],
        zipf=zipf,
        diversity=diversity,
        diversity_sum=diversity * 4.0,
        sequence_count=len(generated.sequences),
        token_count=generated.token_count,
        ppl_delta=ppl_delta,
        zipf_delta=zipf_delta,
    )
