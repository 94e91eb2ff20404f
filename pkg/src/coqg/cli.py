"""Command-line entry points.

Commands: preprocess, train, generate, evaluate, analyze-flow, demo.
Configuration comes from a flat ``key = value`` text file (--config) whose
keys mirror the ModelConfig / TrainingConfig field names; individual values
can be overridden on the command line with --set key=value.  The environment
variable COQG_DATA_DIR provides the default data root.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from pathlib import Path

from .analysis import flow_heatmap, flow_summary, heatmap_csv
from .corpus.coqa import CorpusError, is_filtered_turn, load_coqa
from .corpus.coref import CorefFileProvider, HeuristicCorefProvider, annotate_coreference
from .corpus.examples import (
    DEFAULT_HISTORY_TURNS,
    DEFAULT_NUM_CHUNKS,
    build_examples,
)
from .corpus.io import read_examples_jsonl, read_jsonl, write_atomic_text, write_examples_jsonl, write_json, write_jsonl
from .corpus.splits import split_dataset
from .corpus.types import ProcessedExample
from .corpus.vocab import Vocabulary, build_vocabulary
from .decoding import DEFAULT_BEAM_SIZE, DEFAULT_MAX_LEN, beam_search
from .metrics import evaluate_generations
from .model.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .model.config import ModelConfig
from .model.indexing import index_example
from .model.network import QuestionGenerator
from .training.loop import TrainingConfig, train, write_training_log

MODEL_KEYS = {
    "word_dim", "answer_pos_dim", "turn_dim", "chunk_dim", "hidden_dim", "num_chunks",
    "max_turn", "coref_attention_weight", "coref_output_weight", "flow_evidence_weight",
    "flow_history_penalty", "flow_per_step", "dropout", "seed",
}
TRAIN_KEYS = {"epochs", "batch_size", "learning_rate", "grad_clip", "optimizer", "nll_stop"}
PIPELINE_KEYS = {"history_turns", "min_frequency", "beam_size", "max_len", "block_unigrams"}


def coerce_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_file(path: str | Path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = coerce_value(value)
    return values


def gather_config(args) -> dict:
    values = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        values[key.strip()] = coerce_value(value)
    if getattr(args, "seed", None) is not None:
        values["seed"] = args.seed
    unknown = set(values) - MODEL_KEYS - TRAIN_KEYS - PIPELINE_KEYS
    if unknown:
        raise SystemExit(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def data_root() -> Path:
    return Path(os.environ.get("COQG_DATA_DIR", "."))


def _resolve(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() or p.exists() else data_root() / path


# ----------------------------------------------------------------------
# preprocess
# ----------------------------------------------------------------------

def cmd_preprocess(args) -> int:
    cfg = gather_config(args)
    seed = int(cfg.get("seed", 0))
    n_history = int(cfg.get("history_turns", DEFAULT_HISTORY_TURNS))
    num_chunks = int(cfg.get("num_chunks", DEFAULT_NUM_CHUNKS))
    min_freq = int(cfg.get("min_frequency", 1))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    conversations = load_coqa(_resolve(args.data))
    provider = CorefFileProvider(args.coref_file) if args.coref_file else HeuristicCorefProvider()

    total_turns = sum(len(c.turns) for c in conversations)
    filtered_turns = sum(1 for c in conversations for t in c.turns if is_filtered_turn(t))

    dropped = Counter()
    span_f1_sum = 0.0
    weak = 0
    annotated = 0
    splits = dict(zip(("train", "validation", "test"), split_dataset(conversations, seed=seed)))
    split_examples: dict[str, list[ProcessedExample]] = {}
    for name, convs in splits.items():
        examples = []
        for conv in convs:
            for ex in build_examples(conv, n_history=n_history, num_chunks=num_chunks):
                ex.coref = annotate_coreference(conv, ex, provider, dropped)
                annotated += ex.coref is not None
                span_f1_sum += ex.span_f1
                weak += ex.weak_alignment
                examples.append(ex)
        split_examples[name] = examples
        write_examples_jsonl(out_dir / f"{name}.jsonl", examples)

    vocab = build_vocabulary(split_examples["train"], min_frequency=min_freq)
    vocab.save(out_dir / "vocab.json")

    num_examples = sum(len(v) for v in split_examples.values())
    report = {
        "conversations": len(conversations),
        "split_sizes": {k: len(v) for k, v in split_examples.items()},
        "total_turns": total_turns,
        "filtered_turns": filtered_turns,
        "filtered_percent": 100.0 * filtered_turns / total_turns if total_turns else 0.0,
        "examples": num_examples,
        "mean_span_f1": span_f1_sum / num_examples if num_examples else 0.0,
        "weak_alignments": weak,
        "coref_coverage": annotated / num_examples if num_examples else 0.0,
        "coref_dropped": dict(dropped),
        "vocabulary_size": len(vocab),
        "seed": seed,
        "history_turns": n_history,
        "num_chunks": num_chunks,
        "min_frequency": min_freq,
    }
    write_json(out_dir / "report.json", report)
    print(f"wrote {num_examples} examples to {out_dir} "
          f"(filtered {report['filtered_percent']:.1f}% of turns, vocab {len(vocab)})")
    return 0


# ----------------------------------------------------------------------
# train
# ----------------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = gather_config(args)
    if args.no_coref_loss:
        cfg["coref_attention_weight"] = 0.0
        cfg["coref_output_weight"] = 0.0
    if args.no_flow_loss:
        cfg["flow_evidence_weight"] = 0.0
        cfg["flow_history_penalty"] = 0.0

    data_dir = _resolve(args.data)
    vocab = Vocabulary.load(data_dir / "vocab.json")
    model_cfg = ModelConfig.from_dict({**cfg, "vocab_size": len(vocab)})
    train_cfg = TrainingConfig(**{k: v for k, v in cfg.items() if k in TRAIN_KEYS})

    train_examples = [
        index_example(ex, vocab, max_turn=model_cfg.max_turn)
        for ex in read_examples_jsonl(data_dir / "train.jsonl")
    ]
    val_path = data_dir / "validation.jsonl"
    val_examples = (
        [index_example(ex, vocab, max_turn=model_cfg.max_turn) for ex in read_examples_jsonl(val_path)]
        if val_path.exists()
        else []
    )
    if not train_examples:
        raise SystemExit(f"no training examples under {data_dir}")

    model = QuestionGenerator(model_cfg)
    result = train(model, train_examples, val_examples, train_cfg)

    out = Path(args.out)
    save_checkpoint(out, model, vocab)
    write_training_log(out.with_suffix(".log.csv"), result.log)
    status = "diverged; saved last good parameters" if result.diverged else "done"
    print(f"{status}: {len(result.log)} epochs, best val NLL {result.best_val_nll:.4f} -> {out}")
    return 2 if result.diverged else 0


# ----------------------------------------------------------------------
# generate
# ----------------------------------------------------------------------

def _top_sources(att, example, vocab) -> dict:
    import torch

    weights = torch.cat([att.alpha, att.beta])
    if weights.numel() == 0:
        return {"token": None, "weight": 0.0, "p_gen": float(att.p_gen)}
    pos = int(weights.argmax())
    src_tokens = example.passage_ext_ids + example.history_ext_ids
    token = example.extended_token(src_tokens[pos], vocab)
    return {"token": token, "weight": float(weights[pos]), "p_gen": float(att.p_gen)}


def cmd_generate(args) -> int:
    cfg = gather_config(args)
    beam_size = int(cfg.get("beam_size", args.beam_size))
    max_len = int(cfg.get("max_len", args.max_len))
    block = bool(cfg.get("block_unigrams", not args.no_block))

    model, vocab = load_checkpoint(_resolve(args.checkpoint))
    examples = read_examples_jsonl(_resolve(args.data))
    rows = []
    for ex in examples:
        indexed = index_example(ex, vocab, max_turn=model.config.max_turn)
        result = beam_search(
            model, vocab, indexed, beam_size=beam_size, max_len=max_len, block_unigrams=block
        )
        row = {
            "conversation_id": ex.conversation_id,
            "turn_id": ex.turn_number,
            "question": " ".join(result.tokens),
            "tokens": result.tokens,
            "score": result.score,
            "finished": result.finished,
            "top_sources": [_top_sources(att, indexed, vocab) for att in result.attention],
        }
        if args.trace:
            row["alpha_trace"] = [[float(v) for v in att.alpha] for att in result.attention]
            row["beta_trace"] = [[float(v) for v in att.beta] for att in result.attention]
        rows.append(row)
    write_jsonl(args.out, rows)
    print(f"generated {len(rows)} questions -> {args.out}")
    return 0


# ----------------------------------------------------------------------
# evaluate
# ----------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    generations = read_jsonl(_resolve(args.generations))
    gold = {(ex.conversation_id, ex.turn_number): ex for ex in read_examples_jsonl(_resolve(args.gold))}
    candidates = []
    references = []
    coref_flags = []
    traces = []
    ces_masks = []
    hes_masks = []
    have_traces = all("alpha_trace" in row for row in generations) and generations
    missing = 0
    for row in generations:
        key = (str(row["conversation_id"]), int(row["turn_id"]))
        ex = gold.get(key)
        if ex is None:
            missing += 1
            continue
        candidates.append(list(row["tokens"]))
        references.append(list(ex.target_question))
        coref_flags.append(ex.coref is not None)
        if have_traces:
            traces.append(row["alpha_trace"])
            ces_masks.append(ex.evidence_token_mask("CES"))
            hes_masks.append(ex.evidence_token_mask("HES"))
    if not candidates:
        raise SystemExit("no generation rows matched the gold examples")
    report = evaluate_generations(
        candidates,
        references,
        coref_flags=coref_flags,
        alpha_traces=traces if have_traces else None,
        ces_masks=ces_masks if have_traces else None,
        hes_masks=hes_masks if have_traces else None,
    )
    if missing:
        report.flags.append(f"unmatched_generations={missing}")
    if args.out:
        write_json(args.out, report.to_dict())
    print(report.table())
    if report.has_nan():
        print("error: report contains NaN metrics", file=sys.stderr)
        return 1
    return 0


# ----------------------------------------------------------------------
# analyze-flow
# ----------------------------------------------------------------------

def cmd_analyze_flow(args) -> int:
    conversations = load_coqa(_resolve(args.data))
    heatmap = flow_heatmap(conversations, num_chunks=args.chunks)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_atomic_text(out_dir / "flow_heatmap.csv", heatmap_csv(heatmap))
    summary = flow_summary(heatmap)
    write_json(out_dir / "flow_summary.json", summary)
    print(f"spearman(turn chunk, mean passage chunk) = {summary['spearman_rho']:.3f}")
    return 0


# ----------------------------------------------------------------------
# demo
# ----------------------------------------------------------------------

def cmd_demo(args) -> int:
    model, vocab = load_checkpoint(_resolve(args.checkpoint))
    run_demo(model, vocab, sys.stdin, sys.stdout, beam_size=args.beam_size, max_len=args.max_len)
    return 0


def run_demo(model, vocab, inp, out, beam_size=DEFAULT_BEAM_SIZE, max_len=DEFAULT_MAX_LEN):
    """Interactive loop: paste a passage, repeatedly highlight answer spans by
    inclusive token range; each generated question extends the history.
    Returns the accumulated (question tokens, answer tokens) turns."""
    from .corpus.examples import assign_chunks, label_evidence, render_history_turn
    from .corpus.tokenizer import sentence_token_ranges, split_sentences, tokenize_with_offsets
    from .corpus.types import Turn, bio_tags_for_span

    def say(text):
        out.write(text + "\n")
        out.flush()

    def ask(prompt):
        out.write(prompt)
        out.flush()
        line = inp.readline()
        return line.strip() if line else None

    say("Paste a passage (one line), then highlight answer spans as 'start end'"
        " (inclusive token indices). Commands: tokens, quit.")
    passage = ask("passage> ")
    if not passage:
        return []
    offsets = tokenize_with_offsets(passage)
    tokens = [t for t, _, _ in offsets]
    if not tokens:
        say("empty passage")
        return []
    sent_ranges = sentence_token_ranges(split_sentences(passage), offsets)
    chunk_ids = assign_chunks(len(tokens), model.config.num_chunks)
    turns: list[tuple[list[str], list[str]]] = []
    past_spans: list[tuple[int, int]] = []

    while True:
        line = ask("span> ")
        if line is None or line.lower() in ("quit", "exit", "q"):
            say("bye")
            return turns
        if line.lower() == "tokens":
            say(" ".join(f"{i}:{t}" for i, t in enumerate(tokens)))
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
            say("expected: start end")
            continue
        start, end = int(parts[0]), int(parts[1])
        if not (0 <= start <= end < len(tokens)):
            say(f"span out of range; passage has {len(tokens)} tokens")
            continue
        answer_tokens = tokens[start : end + 1]
        turn_number = len(turns) + 1
        history_pairs = turns[-DEFAULT_HISTORY_TURNS:]
        history = [
            render_history_turn(Turn(0, " ".join(q), " ".join(a), None))
            for q, a in history_pairs
        ]
        evidence = label_evidence(sent_ranges, (start, end), past_spans)
        example = ProcessedExample(
            conversation_id="demo",
            turn_number=turn_number,
            passage_tokens=tokens,
            sentence_boundaries=sent_ranges,
            answer_span=(start, end),
            bio_tags=bio_tags_for_span(len(tokens), (start, end)),
            chunk_ids=chunk_ids,
            history=history,
            target_question=[],
            evidence=evidence,
        )
        indexed = index_example(example, vocab, max_turn=model.config.max_turn)
        result = beam_search(model, vocab, indexed, beam_size=beam_size, max_len=max_len)
        say(f"Q{turn_number}: {' '.join(result.tokens)}")
        turns.append((result.tokens, answer_tokens))
        past_spans.append((start, end))


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coqg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a single config value (repeatable)")

    p = sub.add_parser("preprocess", help="CoQA JSON -> annotated JSONL splits + vocabulary")
    common(p)
    p.add_argument("data", help="CoQA-format JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--coref-file", help="precomputed coreference annotations (JSONL)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model on preprocessed data")
    common(p)
    p.add_argument("data", help="directory produced by preprocess")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--no-coref-loss", action="store_true", help="zero both coreference loss weights")
    p.add_argument("--no-flow-loss", action="store_true", help="zero both flow loss weights")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="beam-search questions for every example")
    common(p)
    p.add_argument("checkpoint")
    p.add_argument("data", help="examples JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--beam-size", type=int, default=DEFAULT_BEAM_SIZE)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--no-block", action="store_true", help="disable unigram repetition blocking")
    p.add_argument("--trace", action="store_true", help="emit full attention traces")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score generations against gold examples")
    common(p)
    p.add_argument("generations", help="JSONL from generate")
    p.add_argument("gold", help="examples JSONL with gold questions")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze-flow", help="turn-chunk vs passage-chunk rationale heatmap")
    common(p)
    p.add_argument("data", help="CoQA-format JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--chunks", type=int, default=DEFAULT_NUM_CHUNKS)
    p.set_defaults(func=cmd_analyze_flow)

    p = sub.add_parser("demo", help="interactive question generation")
    common(p)
    p.add_argument("checkpoint")
    p.add_argument("--beam-size", type=int, default=DEFAULT_BEAM_SIZE)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
