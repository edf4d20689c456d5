"""Command line interface: ``keyharm <subcommand> ...``.

Exit status is 0 on success, 1 for invalid input (schema, grammar, range
errors) and 2 for I/O failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .corpus import CorpusError, CorpusManifest, dumps_leadsheet, load_corpus, load_leadsheet
from .experiment import (
    METRIC_COLUMNS,
    ExperimentConfig,
    evaluate_corpus,
    format_table,
    run_experiment,
    stats,
    write_results,
)
from .harmonizer import KEY_POLICIES, NGramModel, SamplerConfig, harmonize_sequence
from .midi import export_midi
from .representation import REPRESENTATIONS, TokenSequence, decode, encode, transpose_to_c
from .theory import DegreePolicy

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _corpus(args) -> list:
    if args.manifest:
        return load_corpus(CorpusManifest.load(args.manifest), getattr(args, "split", None))
    return [load_leadsheet(p) for p in args.files]


def cmd_encode(args):
    ls = load_leadsheet(args.input)
    _write(encode(ls, args.representation, DegreePolicy.seeded(args.seed)).to_text(), args.output)


def cmd_decode(args):
    text = Path(args.input).read_text(encoding="utf-8")
    rep = None if args.representation == "auto" else args.representation
    _write(dumps_leadsheet(decode(TokenSequence.from_text(text, rep))), args.output)


def cmd_transpose(args):
    _write(dumps_leadsheet(transpose_to_c(load_leadsheet(args.input))), args.output)


def cmd_train(args):
    labeled = load_corpus(CorpusManifest.load(args.manifest), args.split)
    unlabeled = load_corpus(CorpusManifest.load(args.unlabeled)) if args.unlabeled else []
    enc = lambda ls, i: encode(ls, args.representation, DegreePolicy.seeded(args.seed + i))
    model = NGramModel(args.order, args.representation, args.mix).fit(
        [enc(ls, i) for i, ls in enumerate(labeled)],
        [enc(ls.replace(emotion="none"), i) for i, ls in enumerate(unlabeled)],
    )
    model.save(args.output)
    print(f"trained {args.representation} order-{args.order} model on {len(labeled)} labeled / "
          f"{len(unlabeled)} unlabeled clips -> {args.output}", file=sys.stderr)


def cmd_harmonize(args):
    ls = load_leadsheet(args.input)
    model = NGramModel.load(args.model)
    sampler = SamplerConfig(args.temperature, args.top_p, args.seed)
    ts = harmonize_sequence(ls, args.emotion, args.key_policy, model, sampler,
                            degree_policy=DegreePolicy.seeded(args.seed))
    if args.tokens:
        Path(args.tokens).write_text(ts.to_text(), encoding="utf-8")
    _write(dumps_leadsheet(decode(ts)), args.output)


def cmd_evaluate(args):
    generated = [load_leadsheet(p) for p in args.files]
    real = load_corpus(CorpusManifest.load(args.real)) if args.real else None
    report = evaluate_corpus(generated, real)
    columns = METRIC_COLUMNS + (("qd", "pd") if real else ())
    _write(format_table([{"method": "generated", **report["summary"]}], columns), None)
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def cmd_stats(args):
    _write(json.dumps(stats(_corpus(args), args.seed), indent=2) + "\n", args.output)


def cmd_export_midi(args):
    export_midi(load_leadsheet(args.input), args.output)


def cmd_run_experiment(args):
    config = ExperimentConfig.load(args.config)
    if args.output_dir:
        config.output_dir = str(Path(args.output_dir).resolve())
    if args.repeats is not None:
        config.repeats = args.repeats
    out_dir = config.output_dir
    config.output_dir = None
    result = run_experiment(config)
    if out_dir:
        write_results(result, config.resolve(out_dir))
    sys.stdout.write(format_table(result["table2"], METRIC_COLUMNS))
    sys.stdout.write("\n")
    sys.stdout.write(format_table(result["table3"], ("qd", "pd")))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="keyharm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="lead sheet JSON -> token text")
    p.add_argument("input")
    p.add_argument("-r", "--representation", choices=REPRESENTATIONS, default="functional")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="token text -> lead sheet JSON")
    p.add_argument("input")
    p.add_argument("-r", "--representation", choices=("auto",) + REPRESENTATIONS, default="auto")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("transpose", help="transpose a lead sheet to C major / c minor")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_transpose)

    p = sub.add_parser("train", help="train an n-gram model from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=("train", "validation"), default="train")
    p.add_argument("--unlabeled", help="manifest of clips without emotion labels")
    p.add_argument("-r", "--representation", choices=REPRESENTATIONS, default="functional")
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--mix", type=float, default=0.7, help="weight of the labeled corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("harmonize", help="generate chords for a melody")
    p.add_argument("input")
    p.add_argument("--model", required=True)
    p.add_argument("--emotion", choices=("positive", "negative"), required=True)
    p.add_argument("--key-policy", choices=KEY_POLICIES, default="rule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--temperature", type=float, default=1.1)
    p.add_argument("--top-p", type=float, default=0.99)
    p.add_argument("--tokens", help="also write the generated token sequence here")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_harmonize)

    p = sub.add_parser("evaluate", help="objective metrics of generated lead sheets")
    p.add_argument("files", nargs="+")
    p.add_argument("--real", help="manifest of real clips for QD/PD")
    p.add_argument("--json", help="write per-clip values here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("files", nargs="*")
    p.add_argument("--manifest")
    p.add_argument("--split", choices=("train", "validation"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export-midi", help="write a lead sheet as a MIDI file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_export_midi)

    p = sub.add_parser("run-experiment", help="run the evaluation grid from a JSON/TOML config")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.add_argument("--repeats", type=int)
    p.set_defaults(func=cmd_run_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
