"""Synthetic LM profiles and the shared decode loop."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decodekit.asts import AstsConfig, ConstantScores
from decodekit.core import Rng, default_vocabulary, entropy
from decodekit.lts import LtsConfig
from decodekit.samplers import (
    AstsSampler,
    GreedySampler,
    LtsSampler,
    MirostatSampler,
    NucleusSampler,
    TopKSampler,
)
from decodekit.simlm import KINDS, LmProfile, generate, next_distribution

VOCAB = default_vocabulary(32)


class TestProfile:
    def test_kind_whitelist(self):
        with pytest.raises(ValueError, match="kind"):
            LmProfile(kind="chaotic")

    def test_gamma_below_one_rejected(self):
        with pytest.raises(ValueError, match="loop_gamma"):
            LmProfile(kind="loop_prone", loop_gamma=0.5)

    def test_temperature_positive(self):
        with pytest.raises(ValueError, match="base_temperature"):
            LmProfile(base_temperature=0.0)

    def test_seed_range(self):
        with pytest.raises(ValueError, match="seed"):
            LmProfile(seed=-1)
        with pytest.raises(ValueError, match="seed"):
            LmProfile(seed=2**64)


class TestNextDistribution:
    def test_output_is_valid_distribution(self):
        for kind in KINDS:
            dist = next_distribution(LmProfile(kind=kind), [1, 2, 3], VOCAB)
            assert abs(float(dist.probs.sum()) - 1.0) <= 1e-9
            assert np.all(dist.probs >= 0)

    def test_deterministic_for_same_history(self):
        profile = LmProfile(kind="mixed", seed=5)
        a = next_distribution(profile, [4, 9, 2], VOCAB)
        b = next_distribution(profile, [4, 9, 2], VOCAB)
        assert a.probs.tolist() == b.probs.tolist()

    def test_different_histories_differ(self):
        profile = LmProfile(kind="mixed", seed=5)
        a = next_distribution(profile, [4, 9, 2], VOCAB)
        b = next_distribution(profile, [4, 9, 3], VOCAB)
        assert a.probs.tolist() != b.probs.tolist()

    def test_history_outside_recency_window_ignored(self):
        profile = LmProfile(kind="mixed", recency_window=4, seed=5)
        a = next_distribution(profile, [1, 2, 3, 4, 5, 6], VOCAB)
        b = next_distribution(profile, [9, 9, 3, 4, 5, 6], VOCAB)
        assert a.probs.tolist() == b.probs.tolist()

    def test_flat_has_higher_entropy_than_peaked(self):
        flat = LmProfile(kind="flat", base_temperature=10.0, seed=1)
        peaked = LmProfile(kind="peaked", base_temperature=0.3, seed=1)
        history = [3, 1, 4]
        assert entropy(next_distribution(flat, history, VOCAB)) > entropy(
            next_distribution(peaked, history, VOCAB)
        )

    def test_loop_gamma_boosts_recent_token(self):
        # After emitting token a, gamma=3 must strictly raise P(a).
        history = [7]
        base = LmProfile(kind="loop_prone", loop_gamma=1.0, seed=2)
        boosted = LmProfile(kind="loop_prone", loop_gamma=3.0, seed=2)
        p_base = next_distribution(base, history, VOCAB).prob(7)
        p_boost = next_distribution(boosted, history, VOCAB).prob(7)
        assert p_boost > p_base

    @given(st.integers(0, 2**32 - 1), st.lists(st.integers(0, 31), max_size=12))
    def test_loop_gamma_boost_holds_for_any_seed(self, seed, history):
        base = LmProfile(kind="loop_prone", loop_gamma=1.0, seed=seed)
        boosted = LmProfile(kind="loop_prone", loop_gamma=3.0, seed=seed)
        for tok in set(history[-4:]):
            p0 = next_distribution(base, history, VOCAB).prob(tok)
            p1 = next_distribution(boosted, history, VOCAB).prob(tok)
            assert p1 > p0

    def test_empty_history_supported(self):
        dist = next_distribution(LmProfile(kind="peaked"), [], VOCAB)
        assert abs(float(dist.probs.sum()) - 1.0) <= 1e-9


class TestGenerate:
    def test_max_tokens_one(self):
        tokens, trace = generate(LmProfile(), GreedySampler(), VOCAB, seed=0, max_tokens=1)
        assert len(tokens) == 1
        assert len(trace) == 1

    def test_max_tokens_validated(self):
        with pytest.raises(ValueError):
            generate(LmProfile(), GreedySampler(), VOCAB, seed=0, max_tokens=0)

    def test_greedy_is_run_invariant(self):
        profile = LmProfile(kind="peaked", seed=3)
        runs = [generate(profile, GreedySampler(), VOCAB, seed=9, max_tokens=25) for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]

    def test_full_run_determinism_across_samplers(self):
        profile = LmProfile(kind="mixed", seed=3)
        samplers = [
            GreedySampler(),
            TopKSampler(k=5),
            NucleusSampler(p=0.9),
            MirostatSampler.fresh(target_tau=3.0, eta=0.1),
            LtsSampler(LtsConfig()),
            AstsSampler(AstsConfig(), ConstantScores(), ConstantScores()),
        ]
        for make in samplers:
            a = generate(profile, _fresh(make), VOCAB, seed=11, max_tokens=20)
            b = generate(profile, _fresh(make), VOCAB, seed=11, max_tokens=20)
            assert a == b, type(make).__name__

    def test_different_seeds_differ(self):
        profile = LmProfile(kind="flat", base_temperature=10.0, seed=3)
        a, _ = generate(profile, NucleusSampler(p=0.95), VOCAB, seed=1, max_tokens=30)
        b, _ = generate(profile, NucleusSampler(p=0.95), VOCAB, seed=2, max_tokens=30)
        assert a != b

    def test_prompt_seeds_context_but_not_output(self):
        profile = LmProfile(kind="peaked", seed=3)
        tokens, _ = generate(profile, GreedySampler(), VOCAB, seed=0, max_tokens=5, prompt=(1, 2, 3))
        assert len(tokens) == 5
        # a different prompt steers the conditional distributions
        other, _ = generate(profile, GreedySampler(), VOCAB, seed=0, max_tokens=5, prompt=(4, 5, 6))
        assert tokens != other

    def test_entropy_trace_matches_replayed_distributions(self):
        profile = LmProfile(kind="mixed", seed=8)
        tokens, trace = generate(profile, GreedySampler(), VOCAB, seed=0, max_tokens=15)
        history = []
        for tok, h in zip(tokens, trace):
            dist = next_distribution(profile, history, VOCAB)
            assert h == pytest.approx(entropy(dist), abs=1e-12)
            history.append(tok)

    def test_asts_sampler_collects_breakdowns(self):
        sampler = AstsSampler(AstsConfig(), ConstantScores(), ConstantScores())
        tokens, _ = generate(LmProfile(seed=1), sampler, VOCAB, seed=4, max_tokens=8)
        assert len(sampler.breakdowns) == 8
        assert [b.chosen_id for b in sampler.breakdowns] == tokens


def _fresh(sampler):
    """Stateful samplers cannot be reused across runs; rebuild them."""
    if isinstance(sampler, MirostatSampler):
        return MirostatSampler.fresh(target_tau=3.0, eta=0.1)
    if isinstance(sampler, AstsSampler):
        return AstsSampler(AstsConfig(), ConstantScores(), ConstantScores())
    return sampler
