"""Command-line interface.

Exit codes: 0 on success, 1 on usage errors, 2 on data or validation
errors.  Every run emits a manifest (command, resolved arguments, input
digests, seed, version, duration); it is written next to the primary
output file, to ``--manifest`` when given, or as one JSON line on stderr
when the command writes only to stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .bpe import BpeSegmenter
from .errors import GecxError
from .lm import ArpaLanguageModel, NGramLanguageModel, project_to_classes
from .metrics.gleu import GleuConfig, gleu_evaluate
from .metrics.human import human_leave_one_out, human_ratio, leave_one_out_m2
from .metrics.m2 import m2_evaluate, parse_m2
from .nbest import LinearModel, linear_rescore, parse_nbest, write_nbest
from .pipeline import build_annotators, load_pipeline, pipeline_run
from .spelling import Lexicon, spell_correct
from .tokenization import Truecaser, load_word_classes, tokenize
from .tuning import (
    DEFAULT_LM_GRID,
    GleuTuningMetric,
    M2TuningMetric,
    grid_search_lm_weight,
    mert_tune,
    mira_tune,
)

DEFAULT_SEED = 42
SEED_ENV_VAR = "GECX_SEED"


class UsageError(Exception):
    """Malformed invocation; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class _Result:
    """What a command touched, for the run manifest."""

    inputs: list[str] = field(default_factory=list)
    out: str | None = None


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().splitlines()
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def _read_corpus(path: str) -> list[list[str]]:
    return [line.split() for line in _read_lines(path)]


def _write_lines(path: str | None, lines) -> None:
    text = "".join(line + "\n" for line in lines)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _sentences(corpus) -> list[str]:
    return [" ".join(tokens) for tokens in corpus]


# -- commands ----------------------------------------------------------------


def _cmd_tokenize(args) -> _Result:
    lines = _read_lines(args.infile)
    _write_lines(args.out, (" ".join(tokenize(line)) for line in lines))
    inputs = [] if args.infile == "-" else [args.infile]
    return _Result(inputs=inputs, out=args.out)


def _cmd_truecase_train(args) -> _Result:
    model = Truecaser().fit(_read_corpus(args.infile))
    model.to_file(args.out)
    return _Result(inputs=[args.infile], out=args.out)


def _cmd_truecase_apply(args) -> _Result:
    model = Truecaser.from_file(args.model)
    corpus = _read_corpus(args.infile)
    _write_lines(args.out, _sentences(model.transform(corpus)))
    return _Result(inputs=[args.model, args.infile], out=args.out)


def _cmd_bpe_learn(args) -> _Result:
    model = BpeSegmenter(num_merges=args.merges).fit(_read_corpus(args.infile))
    model.to_file(args.out)
    return _Result(inputs=[args.infile], out=args.out)


def _cmd_bpe_apply(args) -> _Result:
    model = BpeSegmenter.from_file(args.model)
    corpus = _read_corpus(args.infile)
    _write_lines(args.out, _sentences(model.transform(corpus)))
    return _Result(inputs=[args.model, args.infile], out=args.out)


def _cmd_lm_train(args) -> _Result:
    corpus = _read_corpus(args.infile)
    inputs = [args.infile]
    if args.classes:
        classes = load_word_classes(args.classes)
        corpus = [project_to_classes(s, classes) for s in corpus]
        inputs.append(args.classes)
    model = NGramLanguageModel(order=args.order, discount=args.discount).fit(corpus)
    model.save_arpa(args.out)
    return _Result(inputs=inputs, out=args.out)


def _cmd_lm_score(args) -> _Result:
    model = ArpaLanguageModel.from_file(args.model)
    lines = []
    for sentence in _read_corpus(args.infile):
        score = model.logprob(sentence)
        lines.append(f"{score.logprob!r}\t{score.n_scored}\t{score.normalized!r}")
    _write_lines(args.out, lines)
    return _Result(inputs=[args.model, args.infile], out=args.out)


def _cmd_lm_ppl(args) -> _Result:
    model = ArpaLanguageModel.from_file(args.model)
    value = model.perplexity(_read_corpus(args.infile))
    _write_lines(args.out, [f"perplexity\t{value!r}"])
    return _Result(inputs=[args.model, args.infile], out=args.out)


def _cmd_m2_score(args) -> _Result:
    gold = parse_m2(args.gold)
    hypotheses = _read_corpus(args.hyp)
    report = m2_evaluate(
        gold, hypotheses, max_unchanged=args.max_unchanged, beta=args.beta
    )
    beta_text = f"{report.beta:g}"
    lines = [
        f"tp\t{report.tp}",
        f"fp\t{report.fp}",
        f"fn\t{report.fn}",
        f"precision\t{report.precision:.4f}",
        f"recall\t{report.recall:.4f}",
        f"f_{beta_text}\t{report.f_score:.4f}",
    ]
    _write_lines(args.out, lines)
    if args.per_sentence:
        rows = ["sentence\ttp\tfp\tfn\tannotator"]
        rows += [
            f"{i}\t{o.tp}\t{o.fp}\t{o.fn}\t{o.annotator}"
            for i, o in enumerate(report.per_sentence)
        ]
        _write_lines(args.per_sentence, rows)
    return _Result(inputs=[args.gold, args.hyp], out=args.out)


def _cmd_gleu_score(args) -> _Result:
    sources = _read_corpus(args.src)
    hypotheses = _read_corpus(args.hyp)
    reference_files = [_read_corpus(path) for path in args.ref]
    for path, corpus in zip(args.ref, reference_files):
        if len(corpus) != len(sources):
            raise GecxError(
                f"{path}: {len(corpus)} sentences, expected {len(sources)}"
            )
    references = [
        [corpus[i] for corpus in reference_files] for i in range(len(sources))
    ]
    config = GleuConfig(
        max_n=args.max_n, iterations=args.iterations, seed=_resolve_seed(args.seed)
    )
    score = gleu_evaluate(sources, references, hypotheses, config)
    _write_lines(args.out, [f"gleu\t{score!r}"])
    return _Result(inputs=[args.src, args.hyp, *args.ref], out=args.out)


def _cmd_nbest_annotate(args) -> _Result:
    nbests = parse_nbest(args.nbest)
    sources = _read_corpus(args.src)
    with open(args.annotators, encoding="utf-8") as fh:
        try:
            specs = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GecxError(f"{args.annotators}: invalid JSON: {exc}") from None
    if not isinstance(specs, list):
        raise GecxError(f"{args.annotators}: expected a JSON array of annotators")
    annotators = build_annotators(
        specs, base_dir=os.path.dirname(os.path.abspath(args.annotators))
    )
    from .nbest import annotate_features

    annotated = annotate_features(nbests, sources, annotators)
    write_nbest(annotated, args.out)
    return _Result(inputs=[args.nbest, args.src, args.annotators], out=args.out)


def _cmd_nbest_rescore(args) -> _Result:
    nbests = parse_nbest(args.nbest)
    model = LinearModel.from_file(args.weights)
    _write_lines(
        args.out, (" ".join(linear_rescore(nb, model).tokens) for nb in nbests)
    )
    if args.nbest_out:
        from .nbest import rescore_nbest

        write_nbest([rescore_nbest(nb, model) for nb in nbests], args.nbest_out)
    return _Result(inputs=[args.nbest, args.weights], out=args.out)


def _metric_inputs(args) -> list[str]:
    if args.metric == "m2":
        return [args.gold]
    return [args.src, *args.ref]


def _build_metric(args):
    if args.metric == "m2":
        if not args.gold:
            raise UsageError("--gold is required with --metric m2")
        return M2TuningMetric(
            parse_m2(args.gold),
            max_unchanged=args.max_unchanged,
            beta=args.beta,
        )
    if not args.src or not args.ref:
        raise UsageError("--src and --ref are required with --metric gleu")
    sources = _read_corpus(args.src)
    reference_files = [_read_corpus(path) for path in args.ref]
    references = [
        [corpus[i] for corpus in reference_files] for i in range(len(sources))
    ]
    return GleuTuningMetric(sources, references, max_n=args.max_n)


def _cmd_tune_mert(args) -> _Result:
    nbests = parse_nbest(args.nbest)
    metric = _build_metric(args)
    if args.init:
        init = LinearModel.from_file(args.init)
    else:
        names = sorted({n for nb in nbests for h in nb.hypotheses for n in h.features})
        init = LinearModel({n: 0.0 for n in names})
    model = mert_tune(
        nbests,
        metric,
        init,
        n_random_directions=args.n_directions,
        seed=_resolve_seed(args.seed),
        max_iterations=args.max_iterations,
    )
    model.to_file(args.out)
    inputs = [args.nbest, *_metric_inputs(args)]
    if args.init:
        inputs.append(args.init)
    return _Result(inputs=inputs, out=args.out)


def _cmd_tune_mira(args) -> _Result:
    nbests = parse_nbest(args.nbest)
    metric = _build_metric(args)
    if args.init:
        init = LinearModel.from_file(args.init)
    else:
        names = sorted({n for nb in nbests for h in nb.hypotheses for n in h.features})
        init = LinearModel({n: 0.0 for n in names})
    model = mira_tune(
        nbests,
        metric,
        init,
        C=args.C,
        epochs=args.epochs,
        seed=_resolve_seed(args.seed),
    )
    model.to_file(args.out)
    inputs = [args.nbest, *_metric_inputs(args)]
    if args.init:
        inputs.append(args.init)
    return _Result(inputs=inputs, out=args.out)


def _cmd_tune_grid(args) -> _Result:
    nbests = parse_nbest(args.nbest)
    metric = _build_metric(args)
    base = LinearModel.from_file(args.weights) if args.weights else LinearModel({})
    grid = DEFAULT_LM_GRID
    if args.grid:
        try:
            grid = tuple(float(v) for v in args.grid.split(","))
        except ValueError:
            raise UsageError(f"--grid must be comma-separated floats: {args.grid!r}")
    chosen = grid_search_lm_weight(nbests, metric, base, args.feature, grid)
    print(f"weight\t{chosen!r}")
    out = None
    if args.out:
        weights = dict(base.weights)
        weights[args.feature] = chosen
        LinearModel(weights).to_file(args.out)
        out = args.out
    inputs = [args.nbest, *_metric_inputs(args)]
    if args.weights:
        inputs.append(args.weights)
    return _Result(inputs=inputs, out=out)


def _cmd_pipeline_run(args) -> _Result:
    stages = load_pipeline(args.config)
    corpus = _read_corpus(args.infile)
    result = pipeline_run(stages, corpus)
    _write_lines(args.out, _sentences(result.corrected))
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
        for trace in result.traces:
            path = os.path.join(
                args.trace_dir, f"stage_{trace.stage_index:02d}_{trace.kind}.txt"
            )
            _write_lines(path, _sentences(trace.outputs))
    return _Result(inputs=[args.config, args.infile], out=args.out)


def _cmd_spell_run(args) -> _Result:
    lexicon = Lexicon.from_file(args.lexicon)
    bpe = BpeSegmenter.from_file(args.bpe)
    char_lm = ArpaLanguageModel.from_file(args.char_lm)
    word_lm = ArpaLanguageModel.from_file(args.word_lm)
    corrected = [
        spell_correct(
            sentence,
            lexicon,
            bpe,
            char_lm,
            word_lm,
            lambda_char=args.lambda_char,
            lambda_lm=args.lambda_lm,
            tau=args.tau,
        )
        for sentence in _read_corpus(args.infile)
    ]
    _write_lines(args.out, _sentences(corrected))
    return _Result(
        inputs=[args.infile, args.lexicon, args.bpe, args.char_lm, args.word_lm],
        out=args.out,
    )


def _cmd_human_compare(args) -> _Result:
    inputs = []
    if (args.gold is None) == (args.scores is None):
        raise UsageError("exactly one of --gold or --scores is required")
    if args.gold:
        scores = leave_one_out_m2(
            parse_m2(args.gold), max_unchanged=args.max_unchanged, beta=args.beta
        )
        inputs.append(args.gold)
    else:
        try:
            scores = [float(v) for v in args.scores.split(",")]
        except ValueError:
            raise UsageError(f"--scores must be comma-separated floats: {args.scores!r}")
    mean, sd = human_leave_one_out(scores)
    lines = [f"annotator{i}\t{score!r}" for i, score in enumerate(scores)]
    lines.append(f"mean\t{mean!r}")
    lines.append(f"sd\t{sd!r}")
    if args.system_score is not None:
        lines.append(f"ratio\t{human_ratio(args.system_score, mean)!r}")
    _write_lines(args.out, lines)
    return _Result(inputs=inputs, out=args.out)


# -- parser ------------------------------------------------------------------


def _add_io(parser, infile=True, out_default=None, out_required=False):
    if infile:
        parser.add_argument("--in", dest="infile", default="-", help="input file or -")
    if out_required:
        parser.add_argument("--out", required=True, help="output file")
    else:
        parser.add_argument("--out", default=out_default, help="output file or -")


def build_parser() -> _Parser:
    parser = _Parser(prog="gecx", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gecx {__version__}")
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"random seed (default {DEFAULT_SEED}, env {SEED_ENV_VAR} overrides)",
    )
    parser.add_argument(
        "--jobs", type=int, default=1, help="worker process budget (>= 1)"
    )
    parser.add_argument("--manifest", default=None, help="explicit manifest path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="split raw lines into tokens")
    _add_io(p)
    p.set_defaults(func=_cmd_tokenize)

    truecase = sub.add_parser("truecase", help="train or apply a truecaser")
    tsub = truecase.add_subparsers(dest="subcommand", required=True)
    p = tsub.add_parser("train")
    _add_io(p, out_required=True)
    p.set_defaults(func=_cmd_truecase_train)
    p = tsub.add_parser("apply")
    p.add_argument("--model", required=True)
    _add_io(p)
    p.set_defaults(func=_cmd_truecase_apply)

    bpe = sub.add_parser("bpe", help="learn or apply byte-pair encoding")
    bsub = bpe.add_subparsers(dest="subcommand", required=True)
    p = bsub.add_parser("learn")
    p.add_argument("--merges", type=int, required=True)
    _add_io(p, out_required=True)
    p.set_defaults(func=_cmd_bpe_learn)
    p = bsub.add_parser("apply")
    p.add_argument("--model", required=True)
    _add_io(p)
    p.set_defaults(func=_cmd_bpe_apply)

    lm = sub.add_parser("lm", help="train and query n-gram language models")
    lsub = lm.add_subparsers(dest="subcommand", required=True)
    p = lsub.add_parser("train")
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--discount", type=float, default=0.75)
    p.add_argument("--classes", default=None, help="word-class map for a class LM")
    _add_io(p, out_required=True)
    p.set_defaults(func=_cmd_lm_train)
    p = lsub.add_parser("score")
    p.add_argument("--model", required=True)
    _add_io(p)
    p.set_defaults(func=_cmd_lm_score)
    p = lsub.add_parser("ppl")
    p.add_argument("--model", required=True)
    _add_io(p)
    p.set_defaults(func=_cmd_lm_ppl)

    m2 = sub.add_parser("m2", help="MaxMatch scoring")
    msub = m2.add_subparsers(dest="subcommand", required=True)
    p = msub.add_parser("score")
    p.add_argument("--gold", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--max-unchanged", type=int, default=2)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--per-sentence", default=None, help="per-sentence TSV path")
    _add_io(p, infile=False)
    p.set_defaults(func=_cmd_m2_score)

    gleu = sub.add_parser("gleu", help="GLEU scoring")
    gsub = gleu.add_subparsers(dest="subcommand", required=True)
    p = gsub.add_parser("score")
    p.add_argument("--src", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", action="append", required=True)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--max-n", type=int, default=4)
    _add_io(p, infile=False)
    p.set_defaults(func=_cmd_gleu_score)

    nbest = sub.add_parser("nbest", help="annotate or rescore n-best lists")
    nsub = nbest.add_subparsers(dest="subcommand", required=True)
    p = nsub.add_parser("annotate")
    p.add_argument("--nbest", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--annotators", required=True, help="JSON annotator config")
    _add_io(p, infile=False, out_required=True)
    p.set_defaults(func=_cmd_nbest_annotate)
    p = nsub.add_parser("rescore")
    p.add_argument("--nbest", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--nbest-out", default=None, help="also write the re-ranked lists")
    _add_io(p, infile=False)
    p.set_defaults(func=_cmd_nbest_rescore)

    def _metric_args(p):
        p.add_argument("--metric", choices=("m2", "gleu"), required=True)
        p.add_argument("--gold", default=None, help="gold M2 file (metric m2)")
        p.add_argument("--src", default=None, help="source corpus (metric gleu)")
        p.add_argument("--ref", action="append", default=None, help="reference corpus")
        p.add_argument("--max-unchanged", type=int, default=2)
        p.add_argument("--beta", type=float, default=0.5)
        p.add_argument("--max-n", type=int, default=4)

    tune = sub.add_parser("tune", help="tune rescoring weights")
    usub = tune.add_subparsers(dest="subcommand", required=True)
    p = usub.add_parser("mert")
    p.add_argument("--nbest", required=True)
    p.add_argument("--init", default=None, help="initial weights file")
    p.add_argument("--n-directions", type=int, default=8)
    p.add_argument("--max-iterations", type=int, default=100)
    _metric_args(p)
    _add_io(p, infile=False, out_required=True)
    p.set_defaults(func=_cmd_tune_mert)
    p = usub.add_parser("mira")
    p.add_argument("--nbest", required=True)
    p.add_argument("--init", default=None)
    p.add_argument("--C", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=10)
    _metric_args(p)
    _add_io(p, infile=False, out_required=True)
    p.set_defaults(func=_cmd_tune_mira)
    p = usub.add_parser("grid")
    p.add_argument("--nbest", required=True)
    p.add_argument("--weights", default=None, help="base weights file")
    p.add_argument("--feature", required=True, help="feature whose weight to search")
    p.add_argument("--grid", default=None, help="comma-separated grid values")
    _metric_args(p)
    _add_io(p, infile=False)
    p.set_defaults(func=_cmd_tune_grid)

    pipeline = sub.add_parser("pipeline", help="run a staged correction pipeline")
    psub = pipeline.add_subparsers(dest="subcommand", required=True)
    p = psub.add_parser("run")
    p.add_argument("--config", required=True, help="JSON pipeline config")
    p.add_argument("--trace-dir", default=None, help="write per-stage outputs here")
    _add_io(p)
    p.set_defaults(func=_cmd_pipeline_run)

    spell = sub.add_parser("spell", help="noisy-channel spell checking")
    ssub = spell.add_subparsers(dest="subcommand", required=True)
    p = ssub.add_parser("run")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--bpe", required=True)
    p.add_argument("--char-lm", required=True)
    p.add_argument("--word-lm", required=True)
    p.add_argument("--lambda-char", type=float, default=1.0)
    p.add_argument("--lambda-lm", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    _add_io(p)
    p.set_defaults(func=_cmd_spell_run)

    human = sub.add_parser("human", help="compare against human annotators")
    hsub = human.add_subparsers(dest="subcommand", required=True)
    p = hsub.add_parser("compare")
    p.add_argument("--gold", default=None, help="multi-annotator gold M2 file")
    p.add_argument("--scores", default=None, help="comma-separated annotator scores")
    p.add_argument("--system-score", type=float, default=None)
    p.add_argument("--max-unchanged", type=int, default=2)
    p.add_argument("--beta", type=float, default=0.5)
    _add_io(p, infile=False)
    p.set_defaults(func=_cmd_human_compare)

    return parser


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(args, result: _Result, duration: float) -> None:
    arguments = {
        k: v for k, v in vars(args).items() if k not in ("func",) and v is not None
    }
    manifest = {
        "command": " ".join(
            p for p in (args.command, getattr(args, "subcommand", None)) if p
        ),
        "arguments": arguments,
        "inputs": {path: _sha256(path) for path in result.inputs if path != "-"},
        "seed": _resolve_seed(getattr(args, "seed", None)),
        "version": __version__,
        "duration_seconds": duration,
    }
    target = args.manifest
    if target is None and result.out not in (None, "-"):
        target = f"{result.out}.manifest.json"
    if target:
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        print(json.dumps(manifest, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
        args.seed = _resolve_seed(args.seed)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    start = time.monotonic()
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (GecxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_manifest(args, result, duration=time.monotonic() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
