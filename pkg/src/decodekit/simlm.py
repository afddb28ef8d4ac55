"""Deterministic synthetic language model for desk-scale experiments.

Each next-token distribution is a pure function of (profile, trailing
history): a blake2b hash of the seed and the recent token ids seeds a
PCG64 stream that yields one gaussian score per vocabulary token, and the
distribution is the softmax of those scores at the profile temperature.
Because the hash only sees a bounded suffix, the model is a small-order
stochastic source: cheap, reproducible, and expressive enough to exhibit
the entropy and repetition dynamics the samplers are built to handle.

Profile kinds:

* ``peaked`` / ``flat``: plain hash-softmax; the two names exist so config
  files read clearly (peaked runs use a low base_temperature, flat a high
  one; defaults 0.3 and 10.0 in the harness).
* ``mixed``: the hash additionally picks a per-step temperature multiplier
  from {0.25, 1.0, 4.0}, so entropy swings regime to regime.
* ``loop_prone``: tokens seen in the trailing ``recency_window`` get their
  scores multiplied by ``loop_gamma`` (>= 1) before the softmax, biasing
  the source toward degenerate repetition loops.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from decodekit.core import Rng, TokenDistribution, Vocabulary, entropy
from decodekit.asts import GenerationContext

KINDS = ("peaked", "flat", "mixed", "loop_prone")

_MIXED_FACTORS = (0.25, 1.0, 4.0)


@dataclass(frozen=True)
class LmProfile:
    kind: str = "mixed"
    base_temperature: float = 1.0
    loop_gamma: float = 1.0
    recency_window: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"profile kind must be one of {KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.base_temperature) and self.base_temperature > 0.0):
            raise ValueError(f"base_temperature must be positive, got {self.base_temperature!r}")
        if not self.loop_gamma >= 1.0:
            raise ValueError(f"loop_gamma must be >= 1, got {self.loop_gamma!r}")
        if self.recency_window < 1:
            raise ValueError(f"recency_window must be >= 1, got {self.recency_window}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _context_digest(profile: LmProfile, suffix: tuple[int, ...]) -> bytes:
    payload = str(profile.seed).encode() + b"|" + b",".join(str(t).encode() for t in suffix)
    return hashlib.blake2b(payload, digest_size=16).digest()


def next_distribution(profile: LmProfile, ctx, vocab: Vocabulary) -> TokenDistribution:
    """Next-token distribution given the history in ``ctx``.

    ``ctx`` may be a GenerationContext or any sequence of token ids.
    """
    history = list(getattr(ctx, "history", ctx))
    suffix = tuple(history[-profile.recency_window :])
    digest = _context_digest(profile, suffix)
    gen = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
    scores = gen.standard_normal(len(vocab))

    temperature = profile.base_temperature
    if profile.kind == "mixed":
        temperature *= _MIXED_FACTORS[digest[8] % len(_MIXED_FACTORS)]
    if profile.kind == "loop_prone" and suffix:
        # Recency boost: multiplying a (positive) exp-score by gamma is the
        # same as adding ln(gamma) to the raw score.
        recent = np.array(sorted(set(suffix)), dtype=np.int64)
        scores = scores.copy()
        scores[recent] += math.log(profile.loop_gamma)

    z = scores / temperature
    w = np.exp(z - z.max())
    return TokenDistribution(vocab, w / w.sum())


def drive(next_fn, sampler, seed: int, max_tokens: int, prompt=(), window_w: int = 8):
    """Generic decode loop shared by synthetic and replayed models.

    ``next_fn(ctx, step)`` supplies each step's TokenDistribution.
    ``sampler`` is a step adapter: ``sampler.step(dist, ctx, rng) -> token``
    plus an ``advances_context`` flag for samplers (ASTS) that append to the
    context themselves. The prompt seeds the context but is not part of the
    returned sequence. Returns (token ids, per-step entropy trace).
    """
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    rng = Rng(seed)
    ctx = GenerationContext(window_w=window_w)
    for tid in prompt:
        ctx.append(int(tid))
    tokens: list[int] = []
    trace: list[float] = []
    for step in range(max_tokens):
        dist = next_fn(ctx, step)
        h = entropy(dist)
        token = sampler.step(dist, ctx, rng)
        if not getattr(sampler, "advances_context", False):
            ctx.append(token)
            ctx.push_entropy(h)
        tokens.append(token)
        trace.append(h)
    return tokens, trace


def generate(
    profile: LmProfile,
    sampler,
    vocab: Vocabulary,
    seed: int,
    max_tokens: int,
    prompt=(),
    window_w: int = 8,
) -> tuple[list[int], list[float]]:
    """Run the decode loop on a synthetic profile; see ``drive``."""
    return drive(
        lambda ctx, step: next_distribution(profile, ctx, vocab),
        sampler,
        seed,
        max_tokens,
        prompt=prompt,
        window_w=window_w,
    )
