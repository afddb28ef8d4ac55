"""Run driver behind the CLI: config handling, generation, sweeps, reports.

The whole run is described by one JSON document. Every leaf key is
addressable by dotted path (``lts.tau_mass``, ``model.synthetic.seed``),
which is what the sweep command manipulates. Unset keys fall back to the
defaults below; validation failures name the offending field path.

Determinism contract: sequence ``i`` of a run uses seed ``seed + i``, and
sweep replication ``r`` shifts the base seed by ``r * num_sequences`` so
replications never share per-sequence seeds. Output files depend only on
(config, seed), whether sequences are generated serially or by a worker
pool. The ``DECODE_SEED`` environment variable overrides the config seed.
"""

from __future__ import annotations

import copy
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from decodekit import golden, metrics, simlm
from decodekit.asts import AstsConfig, ConstantScores, EmbeddingAlignment, GenerationContext, KeywordRelevance
from decodekit.core import TokenDistribution, Vocabulary, default_vocabulary
from decodekit.embed import EmbeddingFormatError, load_table, synthetic_table
from decodekit.lts import LtsConfig
from decodekit.metrics import SequenceCorpus, UniformScorer
from decodekit.samplers import (
    SAMPLER_NAMES,
    AstsSampler,
    GreedySampler,
    LtsSampler,
    MirostatSampler,
    NucleusSampler,
    TopKSampler,
)
from decodekit.simlm import KINDS, LmProfile, next_distribution


class ConfigError(ValueError):
    """Configuration problem; CLI exit code 2."""


class DataError(ValueError):
    """Malformed or inconsistent input data; CLI exit code 3."""


class MetricError(ValueError):
    """Valid inputs outside a metric's domain; CLI exit code 1."""


METRIC_NAMES = ("ppl", "rep16", "rep32", "rep128", "zipf", "diversity", "diversity_sum")

# base_temperature default per synthetic profile kind.
KIND_TEMPERATURES = {"peaked": 0.3, "flat": 10.0, "mixed": 1.0, "loop_prone": 1.0}

DEFAULTS: dict = {
    "seed": 0,
    "max_tokens": 64,
    "num_sequences": 1,
    "workers": 1,
    "sampler": "lts",
    "model": {
        "selector": "synthetic:mixed",
        "synthetic": {
            "base_temperature": None,  # None = per-kind default
            "loop_gamma": 1.0,
            "recency_window": 4,
            "seed": 0,
            "vocab_size": 256,
        },
    },
    "prompt": {"tokens": None, "file": None},
    "output": {"corpus": None},
    "topk": {"k": 10},
    "nucleus": {"p": 0.9},
    "mirostat": {"tau": 3.0, "eta": 0.1, "mu0": None},
    "lts": {"mode": "mass", "epsilon": 0.5, "tau_mass": 0.95},
    "asts": {
        "k1": 0.3,
        "k2": 0.3,
        "lambda1": 0.4,
        "lambda2": 0.4,
        "lambda3": 0.2,
        "mu1": 0.5,
        "mu2": 0.3,
        "mu3": 0.2,
        "temperature": 1.0,
        "window_w": 8,
        "eps_div": 1.0,
        "sigma_prior": 0.6,
        "adjust_form": "example",
        "alignment": "embedding",
        "relevance": "zero",
        "keywords": [],
    },
    "embed": {
        "table": "synthetic",
        "dim": 16,
        "seed": 0,
        "pooling": "mean",
        "decay": 0.8,
        "context_window": 0,
    },
    "zipf": {"min_rank": 1, "max_rank": None},
}


def _merge_defaults(defaults: dict, overrides: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in overrides.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            # Reject typos outright; a silently ignored "tau_mas" would make
            # a sweep look like the parameter has no effect.
            raise ConfigError(f"{here}: unknown config key")
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge_defaults(out[key], value, here)
        else:
            out[key] = copy.deepcopy(value)
    return out


def get_by_path(cfg: dict, path: str):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"{path}: no such config key")
        node = node[part]
    return node


def set_by_path(cfg: dict, path: str, value) -> None:
    parts = path.split(".")
    node = cfg
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"{path}: no such config key")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"{path}: no such config key")
    node[parts[-1]] = value


def load_config(path) -> dict:
    """Parse, merge with defaults, apply DECODE_SEED, and validate."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level config must be a JSON object")
    cfg = _merge_defaults(DEFAULTS, raw)
    env_seed = os.environ.get("DECODE_SEED")
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"DECODE_SEED must be an integer, got {env_seed!r}") from None
    validate_config(cfg)
    return cfg


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _expect_int(cfg: dict, path: str, minimum: int) -> int:
    v = get_by_path(cfg, path)
    _expect(isinstance(v, int) and not isinstance(v, bool), path, f"must be an integer, got {v!r}")
    _expect(v >= minimum, path, f"must be >= {minimum}, got {v}")
    return v


def validate_config(cfg: dict, require_output: bool = False) -> None:
    _expect(isinstance(cfg.get("seed"), int), "seed", f"must be an integer, got {cfg.get('seed')!r}")
    _expect_int(cfg, "max_tokens", 1)
    _expect_int(cfg, "num_sequences", 1)
    _expect_int(cfg, "workers", 1)
    sampler = cfg.get("sampler")
    _expect(sampler in SAMPLER_NAMES, "sampler", f"must be one of {SAMPLER_NAMES}, got {sampler!r}")

    selector = get_by_path(cfg, "model.selector")
    _expect(isinstance(selector, str), "model.selector", "must be a string")
    if selector.startswith("synthetic:"):
        kind = selector.split(":", 1)[1]
        _expect(kind in KINDS, "model.selector", f"unknown synthetic kind {kind!r}, expected one of {KINDS}")
        _expect_int(cfg, "model.synthetic.vocab_size", 1)
        _expect_int(cfg, "model.synthetic.recency_window", 1)
        try:
            _build_profile(cfg)
        except ValueError as exc:
            raise ConfigError(f"model.synthetic: {exc}") from None
    elif selector.startswith("file:"):
        path = selector.split(":", 1)[1]
        _expect(bool(path), "model.selector", "file: selector needs a path")
        _expect(os.path.isfile(path), "model.selector", f"distribution file not found: {path}")
    else:
        raise ConfigError(f"model.selector: expected 'synthetic:<kind>' or 'file:<path>', got {selector!r}")

    prompt = cfg.get("prompt") or {}
    _expect(isinstance(prompt, dict), "prompt", "must be an object")
    if prompt.get("tokens") is not None and prompt.get("file") is not None:
        raise ConfigError("prompt: give either 'tokens' or 'file', not both")
    if prompt.get("tokens") is not None:
        _expect(
            isinstance(prompt["tokens"], list) and all(isinstance(t, str) for t in prompt["tokens"]),
            "prompt.tokens",
            "must be a list of token strings",
        )
    if prompt.get("file") is not None:
        _expect(os.path.isfile(prompt["file"]), "prompt.file", f"file not found: {prompt['file']}")

    if require_output:
        out = cfg.get("output", {}).get("corpus")
        _expect(isinstance(out, str) and bool(out), "output.corpus", "output path required for generate")

    # Sampler-specific sections: constructing the config dataclasses runs
    # their own validation; their messages already carry the field path.
    try:
        _build_lts_config(cfg)
        _build_asts_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _expect_int(cfg, "topk.k", 1)
    p = get_by_path(cfg, "nucleus.p")
    _expect(isinstance(p, (int, float)) and 0 < p <= 1, "nucleus.p", f"must lie in (0, 1], got {p!r}")
    for key in ("mirostat.tau", "mirostat.eta"):
        v = get_by_path(cfg, key)
        _expect(isinstance(v, (int, float)) and math.isfinite(v), key, f"must be a finite number, got {v!r}")
    _expect(get_by_path(cfg, "mirostat.eta") >= 0, "mirostat.eta", "must be >= 0")
    mu0 = get_by_path(cfg, "mirostat.mu0")
    _expect(
        mu0 is None or (isinstance(mu0, (int, float)) and math.isfinite(mu0)),
        "mirostat.mu0",
        f"must be null or a finite number, got {mu0!r}",
    )

    alignment = get_by_path(cfg, "asts.alignment")
    _expect(alignment in ("embedding", "zero"), "asts.alignment", f"must be 'embedding' or 'zero', got {alignment!r}")
    relevance = get_by_path(cfg, "asts.relevance")
    _expect(relevance in ("zero", "keywords"), "asts.relevance", f"must be 'zero' or 'keywords', got {relevance!r}")
    if relevance == "keywords":
        kws = get_by_path(cfg, "asts.keywords")
        _expect(
            isinstance(kws, list) and kws and all(isinstance(k, str) for k in kws),
            "asts.keywords",
            "must be a nonempty list of strings when asts.relevance = 'keywords'",
        )
    pooling = get_by_path(cfg, "embed.pooling")
    _expect(pooling in ("mean", "decay"), "embed.pooling", f"must be 'mean' or 'decay', got {pooling!r}")
    _expect_int(cfg, "embed.dim", 1)
    cw = get_by_path(cfg, "embed.context_window")
    _expect(isinstance(cw, int) and cw >= 0, "embed.context_window", f"must be an integer >= 0, got {cw!r}")
    table = get_by_path(cfg, "embed.table")
    _expect(isinstance(table, str) and bool(table), "embed.table", "must be 'synthetic' or a file path")
    if sampler == "asts" and alignment == "embedding" and table != "synthetic":
        _expect(os.path.isfile(table), "embed.table", f"embedding table not found: {table}")

    _expect_int(cfg, "zipf.min_rank", 1)
    mr = get_by_path(cfg, "zipf.max_rank")
    _expect(
        mr is None or (isinstance(mr, int) and mr >= get_by_path(cfg, "zipf.min_rank")),
        "zipf.max_rank",
        "must be null or an integer >= zipf.min_rank",
    )


# --------------------------------------------------------------------------
# Builders: config dict -> runtime objects.


def _build_profile(cfg: dict) -> LmProfile:
    kind = get_by_path(cfg, "model.selector").split(":", 1)[1]
    syn = cfg["model"]["synthetic"]
    temperature = syn.get("base_temperature")
    if temperature is None:
        temperature = KIND_TEMPERATURES[kind]
    return LmProfile(
        kind=kind,
        base_temperature=temperature,
        loop_gamma=syn.get("loop_gamma", 1.0),
        recency_window=syn.get("recency_window", 4),
        seed=syn.get("seed", 0),
    )


def _build_lts_config(cfg: dict) -> LtsConfig:
    s = cfg["lts"]
    return LtsConfig(mode=s["mode"], epsilon=s["epsilon"], tau_mass=s["tau_mass"])


def _build_asts_config(cfg: dict) -> AstsConfig:
    s = cfg["asts"]
    return AstsConfig(
        k1=s["k1"],
        k2=s["k2"],
        lambda1=s["lambda1"],
        lambda2=s["lambda2"],
        lambda3=s["lambda3"],
        mu1=s["mu1"],
        mu2=s["mu2"],
        mu3=s["mu3"],
        temperature=s["temperature"],
        window_w=s["window_w"],
        eps_div=s["eps_div"],
        sigma_prior=s["sigma_prior"],
        adjust_form=s["adjust_form"],
    )


class SyntheticModel:
    def __init__(self, profile: LmProfile, vocab: Vocabulary):
        self.profile = profile
        self.vocab = vocab

    def next(self, ctx, step: int):
        return next_distribution(self.profile, ctx, self.vocab)


class ReplayModel:
    """Steps through distributions loaded from a file, cycling at the end."""

    def __init__(self, vocab: Vocabulary, rows: np.ndarray):
        self.vocab = vocab
        self.rows = rows

    def next(self, ctx, step: int):
        return TokenDistribution(self.vocab, self.rows[step % len(self.rows)])


def _load_replay_model(path: str) -> ReplayModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "tokens" not in doc or "steps" not in doc:
        raise DataError(f"{path}: distribution file needs 'tokens' and 'steps' keys")
    tokens = doc["tokens"]
    if not isinstance(tokens, list) or not tokens or not all(isinstance(t, str) for t in tokens):
        raise DataError(f"{path}: 'tokens' must be a nonempty list of strings")
    steps = doc["steps"]
    if not isinstance(steps, list) or not steps:
        raise DataError(f"{path}: 'steps' must be a nonempty list of probability rows")
    rows = []
    for i, row in enumerate(steps):
        if not isinstance(row, list) or len(row) != len(tokens):
            raise DataError(f"{path}: step {i}: expected {len(tokens)} probabilities")
        arr = np.asarray(row, dtype=np.float64)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0) or arr.sum() <= 0:
            raise DataError(f"{path}: step {i}: probabilities must be nonnegative with positive sum")
        rows.append(arr / arr.sum())  # rows are renormalised exactly
    return ReplayModel(Vocabulary.from_tokens(tokens), np.stack(rows))


def build_model(cfg: dict):
    selector = get_by_path(cfg, "model.selector")
    if selector.startswith("synthetic:"):
        vocab = default_vocabulary(get_by_path(cfg, "model.synthetic.vocab_size"))
        return SyntheticModel(_build_profile(cfg), vocab)
    return _load_replay_model(selector.split(":", 1)[1])


def _build_alignment(cfg: dict, vocab: Vocabulary):
    if get_by_path(cfg, "asts.alignment") == "zero":
        return ConstantScores(0.0)
    e = cfg["embed"]
    if e["table"] == "synthetic":
        table = synthetic_table(vocab, dim=e["dim"], seed=e["seed"])
    else:
        try:
            table = load_table(e["table"])
        except EmbeddingFormatError as exc:
            raise DataError(str(exc)) from None
        missing = table.covers(vocab)
        if missing:
            raise DataError(
                f"embed.table: {len(missing)} vocabulary tokens lack embeddings "
                f"(first missing: {missing[0]!r})"
            )
    return EmbeddingAlignment(
        table=table,
        vocab=vocab,
        pooling=e["pooling"],
        decay=e["decay"],
        context_window=e["context_window"],
    )


def _build_relevance(cfg: dict, vocab: Vocabulary):
    if get_by_path(cfg, "asts.relevance") == "keywords":
        return KeywordRelevance(vocab, tuple(get_by_path(cfg, "asts.keywords")))
    return ConstantScores(0.0)


def build_sampler(cfg: dict, vocab: Vocabulary):
    """Fresh per-sequence sampler adapter for the configured strategy."""
    name = cfg["sampler"]
    if name == "greedy":
        return GreedySampler()
    if name == "topk":
        return TopKSampler(k=get_by_path(cfg, "topk.k"))
    if name == "nucleus":
        return NucleusSampler(p=get_by_path(cfg, "nucleus.p"))
    if name == "mirostat":
        m = cfg["mirostat"]
        return MirostatSampler.fresh(target_tau=m["tau"], eta=m["eta"], mu0=m["mu0"])
    if name == "lts":
        return LtsSampler(cfg=_build_lts_config(cfg))
    if name == "asts":
        return AstsSampler(
            cfg=_build_asts_config(cfg),
            alignment=_build_alignment(cfg, vocab),
            relevance=_build_relevance(cfg, vocab),
        )
    raise ConfigError(f"sampler: unknown sampler {name!r}")


def _resolve_prompts(cfg: dict, vocab: Vocabulary) -> list[tuple[int, ...]]:
    """Prompt id tuples; sequence i uses entry i modulo the list length."""
    prompt = cfg.get("prompt") or {}
    if prompt.get("tokens") is not None:
        return [_tokens_to_ids(prompt["tokens"], vocab, "prompt.tokens")]
    if prompt.get("file") is not None:
        path = prompt["file"]
        out = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}: line {lineno}: not valid JSON: {exc}") from None
                if not isinstance(obj, dict) or not isinstance(obj.get("tokens"), list):
                    raise DataError(f"{path}: line {lineno}: expected an object with a 'tokens' list")
                out.append(_tokens_to_ids(obj["tokens"], vocab, f"{path}: line {lineno}"))
        if not out:
            raise DataError(f"{path}: prompt file contains no prompts")
        return out
    return [()]


def _tokens_to_ids(tokens, vocab: Vocabulary, where: str) -> tuple[int, ...]:
    ids = []
    for t in tokens:
        if t not in vocab.index:
            raise DataError(f"{where}: token {t!r} not in the model vocabulary")
        ids.append(vocab.index[t])
    return tuple(ids)


def run_sequence(cfg: dict, index: int) -> dict:
    """Generate sequence ``index`` of a run; pure function of (cfg, index)."""
    model = build_model(cfg)
    vocab = model.vocab
    sampler = build_sampler(cfg, vocab)
    prompts = _resolve_prompts(cfg, vocab)
    window_w = get_by_path(cfg, "asts.window_w")
    tokens, trace = simlm.drive(
        lambda ctx, step: model.next(ctx, step),
        sampler,
        seed=cfg["seed"] + index,
        max_tokens=cfg["max_tokens"],
        prompt=prompts[index % len(prompts)],
        window_w=window_w,
    )
    audit = []
    if isinstance(sampler, AstsSampler):
        audit = [
            {"sequence": index, "step": t, **b.to_json_dict()}
            for t, b in enumerate(sampler.breakdowns)
        ]
    return {
        "id": index,
        "token_ids": tokens,
        "tokens": [vocab.tokens[t] for t in tokens],
        "entropy_trace": trace,
        "audit": audit,
    }


def _sequence_job(args) -> dict:
    cfg, index = args
    return run_sequence(cfg, index)


def run_generation(cfg: dict) -> list[dict]:
    """All sequences of a run, in id order; parallel when workers > 1."""
    indices = range(cfg["num_sequences"])
    if cfg.get("workers", 1) > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            return list(pool.map(_sequence_job, [(cfg, i) for i in indices]))
    return [run_sequence(cfg, i) for i in indices]


# --------------------------------------------------------------------------
# Commands. Each returns data and lets the CLI decide about process exit.


def _open_out(path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="\n")


def cmd_generate(config_path, audit_path=None) -> list[dict]:
    cfg = load_config(config_path)
    validate_config(cfg, require_output=True)
    # Fail before generation if the sampler cannot even be built (e.g. a
    # missing or broken embedding table).
    model = build_model(cfg)
    build_sampler(cfg, model.vocab)
    _resolve_prompts(cfg, model.vocab)

    records = run_generation(cfg)
    out_path = cfg["output"]["corpus"]
    with _open_out(out_path) as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {"id": rec["id"], "tokens": rec["tokens"], "entropy_trace": rec["entropy_trace"]},
                    ensure_ascii=False,
                )
                + "\n"
            )
    if audit_path is not None:
        with _open_out(audit_path) as fh:
            for rec in records:
                for line in rec["audit"]:
                    fh.write(json.dumps(line, ensure_ascii=False) + "\n")
    return records


def _metric_value(cfg: dict, metric: str, records: list[dict], model) -> float:
    corpus = SequenceCorpus(tuple(tuple(r["token_ids"]) for r in records), model.vocab)
    try:
        if metric.startswith("rep"):
            l = int(metric[3:])
            vals = [metrics.rep_l(s, l) for s in corpus.sequences]
            return sum(vals) / len(vals)
        if metric == "diversity":
            vals = [metrics.ngram_diversity(s) for s in corpus.sequences]
            return sum(vals) / len(vals)
        if metric == "diversity_sum":
            vals = [metrics.ngram_diversity(s) for s in corpus.sequences]
            return 4.0 * sum(vals) / len(vals)
        if metric == "zipf":
            return metrics.zipf_coefficient(
                corpus,
                min_rank=get_by_path(cfg, "zipf.min_rank"),
                max_rank=get_by_path(cfg, "zipf.max_rank"),
            )
        if metric == "ppl":
            return metrics.perplexity(corpus, _model_scorer(model))
    except ValueError as exc:
        raise MetricError(str(exc)) from None
    raise ConfigError(f"metric: unknown metric {metric!r}, expected one of {METRIC_NAMES}")


def _model_scorer(model):
    """Score a sequence position-by-position under ``model`` (fresh context)."""

    def score(seq):
        ctx = GenerationContext(window_w=8)
        out = []
        for step, t in enumerate(seq):
            out.append(model.next(ctx, step).prob(int(t)))
            ctx.append(int(t))
        return out

    return score


@dataclass(frozen=True)
class SweepRow:
    value: object
    mean: float
    std: float


def cmd_sweep(config_path, param: str, values, metric: str, reps: int, out_path) -> list[SweepRow]:
    """One CSV row per swept value: (param_value, metric_mean, metric_std).

    ``param`` may be a comma-separated list of dotted paths; every path is
    set to the same value, which is how a symmetric band sweep (asts.k1 and
    asts.k2 moving together) stays a one-parameter sweep.
    """
    base = load_config(config_path)
    paths = [p.strip() for p in str(param).split(",") if p.strip()]
    if not paths:
        raise ConfigError("param: at least one dotted config path required")
    if len(values) < 2:
        raise ConfigError(f"values: a sweep needs at least 2 values, got {len(values)}")
    if metric not in METRIC_NAMES:
        raise ConfigError(f"metric: unknown metric {metric!r}, expected one of {METRIC_NAMES}")
    if reps < 1:
        raise ConfigError(f"reps: must be >= 1, got {reps}")
    for path in paths:
        get_by_path(base, path)  # fail fast on typos

    rows: list[SweepRow] = []
    for value in values:
        cfg = copy.deepcopy(base)
        for path in paths:
            set_by_path(cfg, path, value)
        validate_config(cfg)
        model = build_model(cfg)
        samples = []
        for r in range(reps):
            run_cfg = copy.deepcopy(cfg)
            run_cfg["seed"] = cfg["seed"] + r * cfg["num_sequences"]
            records = run_generation(run_cfg)
            samples.append(_metric_value(cfg, metric, records, model))
        arr = np.asarray(samples, dtype=np.float64)
        rows.append(SweepRow(value=value, mean=float(arr.mean()), std=float(arr.std())))

    with _open_out(out_path) as fh:
        fh.write("param_value,metric_mean,metric_std\n")
        for row in rows:
            fh.write(f"{_csv_cell(row.value)},{_csv_cell(row.mean)},{_csv_cell(row.std)}\n")
    return rows


def _csv_cell(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _load_corpus_tokens(path, fmt: str) -> list[list[str]]:
    sequences: list[list[str]] = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"corpus file not found: {path}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if fmt == "text":
                sequences.append(line.split())
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: not valid JSON: {exc}") from None
            if not isinstance(obj, dict) or not isinstance(obj.get("tokens"), list):
                raise DataError(f"{path}: line {lineno}: expected an object with a 'tokens' list")
            toks = obj["tokens"]
            if not all(isinstance(t, str) for t in toks):
                raise DataError(f"{path}: line {lineno}: tokens must all be strings")
            sequences.append(list(toks))
    if not sequences:
        raise DataError(f"{path}: corpus contains no sequences")
    return sequences


def cmd_metrics(
    generated_path,
    reference_path=None,
    out_path=None,
    csv_path=None,
    config_path=None,
    fmt: str = "jsonl",
):
    """Metric report for a generated corpus, optionally against a reference.

    Without a config, sequences are scored by a uniform scorer over the
    observed vocabulary (a degenerate but dependency-free perplexity).
    With ``--config``, the configured model scores both corpora, which is
    how generator-vs-independent-model perplexity comparisons are run.
    """
    if fmt not in ("jsonl", "text"):
        raise ConfigError(f"format: must be 'jsonl' or 'text', got {fmt!r}")
    gen_tokens = _load_corpus_tokens(generated_path, fmt)
    ref_tokens = _load_corpus_tokens(reference_path, fmt) if reference_path else None

    zipf_min, zipf_max = 1, None
    if config_path is not None:
        cfg = load_config(config_path)
        model = build_model(cfg)
        vocab = model.vocab
        scorer = _model_scorer(model)
        zipf_min = get_by_path(cfg, "zipf.min_rank")
        zipf_max = get_by_path(cfg, "zipf.max_rank")
    else:
        seen = sorted({t for seq in gen_tokens for t in seq} | {t for seq in (ref_tokens or []) for t in seq})
        vocab = Vocabulary.from_tokens(seen)
        scorer = UniformScorer(len(vocab))

    def to_corpus(seqs, where):
        ids = tuple(_tokens_to_ids(s, vocab, where) for s in seqs)
        return SequenceCorpus(ids, vocab)

    generated = to_corpus(gen_tokens, str(generated_path))
    reference = to_corpus(ref_tokens, str(reference_path)) if ref_tokens is not None else None
    try:
        rep = metrics.report(generated, scorer, reference, zipf_min_rank=zipf_min, zipf_max_rank=zipf_max)
    except ValueError as exc:
        raise MetricError(str(exc)) from None
    if out_path is not None:
        with _open_out(out_path) as fh:
            fh.write(rep.to_json())
    if csv_path is not None:
        with _open_out(csv_path) as fh:
            fh.write(rep.to_csv())
    return rep


def cmd_golden(print_fn=print) -> int:
    """Run the built-in reference checks; exit code 4 on any failure."""
    checks = golden.run_golden_checks()
    for check in checks:
        print_fn(check.line())
    failed = [c for c in checks if not c.passed]
    print_fn(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 4 if failed else 0
