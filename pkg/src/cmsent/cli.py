"""Command-line surface: embed-train, align, merge, train, eval, synth, pipeline."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import align as align_mod
from . import synth as synth_mod
from .data import load_dataset, save_dataset
from .embeddings import l2_normalize, load_embeddings, save_embeddings
from .neural import load_model
from .pipeline import (
    build_embedding,
    load_config,
    read_corpus,
    run_pipeline,
    write_corpus,
    write_manifest,
    write_metrics_report,
)
from .subword.ngrams import NGramConfig
from .subword.skipgram import (
    SkipgramConfig,
    load_subword_space,
    save_subword_space,
    train_skipgram,
)
from .trainer import predict

logger = logging.getLogger(__name__)


def _add_embed_train(sub):
    p = sub.add_parser("embed-train", help="train subword skip-gram embeddings")
    p.add_argument("--corpus", action="append", required=True, help="one sentence per line; repeatable")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--subsample-t", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--buckets", type=int, default=2_000_000)
    p.add_argument("--oov-reduce", choices=("sum", "mean"), default="sum")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_embed_train)


def cmd_embed_train(args) -> int:
    corpus = []
    for path in args.corpus:
        corpus.extend(read_corpus(path))
    if not corpus:
        print("error: all corpora are empty", file=sys.stderr)
        return 1
    cfg = SkipgramConfig(
        dim=args.dim, window=args.window, negatives=args.negatives, epochs=args.epochs,
        initial_lr=args.lr, min_count=args.min_count, subsample_t=args.subsample_t,
        seed=args.seed, oov_reduce=args.oov_reduce,
    )
    ngrams = NGramConfig(n_min=args.n_min, n_max=args.n_max, buckets=args.buckets)
    space = train_skipgram(corpus, cfg, ngrams)
    os.makedirs(args.out, exist_ok=True)
    write_manifest(args.out, "embed-train", args.corpus, vars(args) | {"func": None},
                   force=args.force)
    save_subword_space(space, args.out)
    print(f"vocabulary size: {len(space.base)}")
    print(f"dimensions: {space.dim}")
    return 0


def _add_align(sub):
    p = sub.add_parser("align", help="align two embedding spaces and merge them")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--method", choices=("procrustes", "adversarial"), required=True)
    p.add_argument("--dict", dest="dictionary", help="TSV bilingual dictionary (procrustes)")
    p.add_argument("--refine-iters", type=int, default=0)
    p.add_argument("--steps", type=int, default=10_000, help="adversarial steps")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_align)


def cmd_align(args) -> int:
    if args.method == "procrustes" and not args.dictionary:
        print("error: --method procrustes requires --dict", file=sys.stderr)
        return 1
    src = l2_normalize(load_embeddings(args.src))
    tgt = l2_normalize(load_embeddings(args.tgt))
    if args.method == "procrustes":
        dictionary = align_mod.load_dictionary(args.dictionary)
        linear_map = align_mod.procrustes(src, tgt, dictionary)
    else:
        cfg = align_mod.AdversarialConfig(steps=args.steps, seed=args.seed)
        linear_map = align_mod.adversarial_align(src, tgt, cfg)
    if args.refine_iters > 0:
        linear_map = align_mod.refine(src, tgt, linear_map, iterations=args.refine_iters)
    os.makedirs(args.out, exist_ok=True)
    inputs = [args.src, args.tgt] + ([args.dictionary] if args.dictionary else [])
    write_manifest(args.out, "align", inputs, vars(args) | {"func": None}, force=args.force)
    align_mod.save_map(linear_map, os.path.join(args.out, "map.vec"))
    from .embeddings import EmbeddingSpace

    mapped = EmbeddingSpace(src.vocab, linear_map.apply(src.matrix), name="mapped")
    merged = align_mod.merge_spaces(mapped, tgt)
    save_embeddings(merged, os.path.join(args.out, "merged.vec"))
    print(f"merged vocabulary: {len(merged)} tokens, dim {merged.dim}")
    return 0


def _add_merge(sub):
    p = sub.add_parser("merge", help="merge two aligned spaces (average common tokens)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True, help="output .vec file")
    p.set_defaults(func=cmd_merge)


def cmd_merge(args) -> int:
    a = load_embeddings(args.a)
    b = load_embeddings(args.b)
    merged = align_mod.merge_spaces(a, b)
    save_embeddings(merged, args.out)
    print(f"merged vocabulary: {len(merged)} tokens, dim {merged.dim}")
    return 0


def _add_train(sub):
    p = sub.add_parser("train", help="run a curriculum training experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override output.dir")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_train)


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    directory = args.out or None
    from .pipeline import output_dir

    directory = directory or output_dir(cfg)
    os.makedirs(directory, exist_ok=True)
    write_manifest(directory, "train", [args.config], cfg, force=args.force)
    report = run_pipeline(cfg, directory=directory, force=args.force)
    print(f"macro F1: {report['macro_f1']:.4f}")
    return 0


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate a saved model on a TSV dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--embedding", required=True,
                   help=".vec file or a subword space directory")
    p.add_argument("--origin", default="cm")
    p.add_argument("--out", help="report path prefix (default: stdout only)")
    p.set_defaults(func=cmd_eval)


def _load_any_embedding(path):
    if os.path.isdir(path):
        return load_subword_space(path)
    return load_embeddings(path)


def cmd_eval(args) -> int:
    model = load_model(args.model)
    embedding = _load_any_embedding(args.embedding)
    if embedding.dim != model.input_dim:
        print(
            f"error: embedding dim {embedding.dim} incompatible with model "
            f"input dim {model.input_dim}",
            file=sys.stderr,
        )
        return 1
    examples = load_dataset(args.dataset, origin=args.origin)
    if not examples:
        print("error: empty dataset", file=sys.stderr)
        return 1
    preds = predict(model, examples, embedding)
    gold = [ex.label for ex in examples]
    if args.out:
        report = write_metrics_report(gold, preds, args.out)
    else:
        from .metrics import confusion, f1_report, format_report

        cm = confusion(gold, preds)
        report = f1_report(cm)
        print(format_report(cm, report))
    print(json.dumps({"macro_f1": report["macro_f1"], "weighted_f1": report["weighted_f1"]},
                     sort_keys=True))
    return 0


def _add_synth(sub):
    p = sub.add_parser("synth", help="generate synthetic bilingual/code-mixed data")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--vocab-size", type=int, default=150)
    p.add_argument("--n-sentences", type=int, default=2000)
    p.add_argument("--min-len", type=int, default=5)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--switch-prob", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_synth)


def cmd_synth(args) -> int:
    cfg = synth_mod.SynthConfig(
        vocab_size=args.vocab_size,
        sentence_length=(args.min_len, args.max_len),
        n_sentences=args.n_sentences,
        switch_prob=args.switch_prob,
        seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    write_manifest(args.out, "synth", [], vars(args) | {"func": None}, force=args.force)
    mono = synth_mod.gen_mono_corpus(cfg)
    lexicon = synth_mod.build_cipher_lexicon(cfg.full_vocab, seed=cfg.seed)
    ciphered = synth_mod.cipher_corpus(mono, lexicon)
    cm = synth_mod.gen_codemixed(mono, lexicon, cfg.switch_prob, seed=cfg.seed + 1)
    save_dataset(mono, os.path.join(args.out, "mono.tsv"))
    save_dataset(cm, os.path.join(args.out, "codemixed.tsv"))
    write_corpus([ex.tokens for ex in mono], os.path.join(args.out, "mono_corpus.txt"))
    write_corpus([ex.tokens for ex in ciphered], os.path.join(args.out, "cipher_corpus.txt"))
    align_mod.save_dictionary(
        align_mod.BilingualDictionary(synth_mod.ground_truth_dictionary(lexicon)),
        os.path.join(args.out, "dictionary.tsv"),
    )
    print(f"wrote {len(mono)} sentences, vocabulary {len(lexicon)} tokens, to {args.out}")
    return 0


def _add_pipeline(sub):
    p = sub.add_parser("pipeline", help="composite pipelines")
    inner = p.add_subparsers(dest="pipeline_command", required=True)
    run = inner.add_parser("run", help="embed -> align -> train -> eval from one config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="override output.dir")
    run.add_argument("--force", action="store_true")
    run.set_defaults(func=cmd_pipeline_run)


def cmd_pipeline_run(args) -> int:
    cfg = load_config(args.config)
    from .pipeline import output_dir

    directory = args.out or output_dir(cfg)
    os.makedirs(directory, exist_ok=True)
    write_manifest(directory, "pipeline run", [args.config], cfg, force=args.force)
    report = run_pipeline(cfg, directory=directory, force=args.force)
    print(f"macro F1: {report['macro_f1']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmsent",
        description="Cross-lingual embeddings and curriculum training for "
        "code-mixed sentiment classification",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_embed_train(sub)
    _add_align(sub)
    _add_merge(sub)
    _add_train(sub)
    _add_eval(sub)
    _add_synth(sub)
    _add_pipeline(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
