"""Command-line entry point: generate / baseline / evaluate / grid.

Every subcommand is deterministic given its flags; randomness only ever
comes from --seed.  Exit codes: 0 success, 1 input or validation error,
2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import default_lexicon_path, default_registry_path
from .baseline import (
    BaselineError,
    closed_book_config,
    restricted_config,
    run_files,
)
from .corpus import (
    CorpusError,
    ExperimentPlan,
    GenerationReport,
    generate_test_quadrants,
    generate_train_dev,
    quadrant_name,
    write_examples,
)
from .lexicon import LexiconError, load_lexicon
from .metrics import MetricsError, evaluate_files
from .registry import RegistryError, load_registry, split_folds
from .templates import ParseAmbiguityError

DEFAULT_K_CHOICES = (1, 2, 4, 8, 16)
GRID_METRICS = (
    "accuracy",
    "majority_accuracy",
    "bleu",
    "hallucination_rate",
    "indicator_precision",
    "indicator_recall",
)

_INPUT_ERRORS = (
    LexiconError,
    RegistryError,
    CorpusError,
    MetricsError,
    BaselineError,
    FileNotFoundError,
    ValueError,
)


class CliError(ValueError):
    pass


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    converters = {"seed": int, "k": int, "fold": int}
    for key, value in _load_config_file(args.config).items():
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        if isinstance(getattr(args, key, None), bool):
            continue
        convert = converters.get(key, str)
        setattr(args, key, convert(value))


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [name for name in names if getattr(args, name, None) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise CliError(f"missing required flag(s): {flags}")


def _load_inputs(args: argparse.Namespace):
    lexicon = load_lexicon(args.lexicon or default_lexicon_path())
    registry = load_registry(args.registry or default_registry_path(), lexicon)
    return lexicon, registry


def _check_k(k: int, allow_any: bool) -> None:
    if k < 1:
        raise CliError("--k must be >= 1")
    if not allow_any and k not in DEFAULT_K_CHOICES:
        allowed = ", ".join(str(v) for v in DEFAULT_K_CHOICES)
        raise CliError(f"--k {k} not in {{{allowed}}}; pass --allow-any-k to override")


def _generate_into(out_dir: Path, plan: ExperimentPlan, registry, lexicon) -> GenerationReport:
    out_dir.mkdir(parents=True, exist_ok=True)
    train, dev, report = generate_train_dev(plan, registry, lexicon)
    quadrants, test_report = generate_test_quadrants(plan, registry, lexicon)
    report.merge(test_report)
    write_examples(train, out_dir / "train.jsonl")
    write_examples(dev, out_dir / "dev.jsonl")
    for name, examples in quadrants.items():
        write_examples(examples, out_dir / f"test_{name}.jsonl")
    (out_dir / "generation_report.json").write_text(
        report.to_json() + "\n", encoding="utf-8"
    )
    return report


def cmd_generate(args: argparse.Namespace) -> int:
    _require(args, "out", "seed", "k", "fold")
    _check_k(args.k, args.allow_any_k)
    lexicon, registry = _load_inputs(args)
    plan = ExperimentPlan(
        fold_split=split_folds(registry, args.seed),
        held_out_fold=args.fold,
        k=args.k,
        master_seed=args.seed,
    )
    report = _generate_into(Path(args.out), plan, registry, lexicon)
    for key, value in sorted(report.counts.items()):
        print(f"{key}: {value}")
    if report.exhaustion:
        print(f"exhaustion warnings: {len(report.exhaustion)} (see generation_report.json)")
    return 0


def _baseline_config(args: argparse.Namespace, registry):
    fallback = {
        "abstain": "abstain_non_entailment",
        "majority": "majority_entailment",
    }[args.fallback]
    if args.scope == "closed-book":
        return closed_book_config(registry, fallback=fallback)
    _require(args, "seed", "fold")
    split = split_folds(registry, args.seed)
    return restricted_config(registry, split.training_ids(args.fold), fallback=fallback)


def cmd_baseline(args: argparse.Namespace) -> int:
    _require(args, "input", "out")
    lexicon, registry = _load_inputs(args)
    config = _baseline_config(args, registry)
    out_path = Path(args.out)
    log_path = args.fallback_log or out_path.with_suffix(".fallbacks.jsonl")
    predictions, fallback_ids = run_files(
        args.input, config, registry, lexicon, out_path, log_path
    )
    print(f"predictions: {len(predictions)}")
    print(f"fallbacks: {len(fallback_ids)}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    _require(args, "predictions", "gold")
    lexicon = load_lexicon(args.lexicon or default_lexicon_path())
    report = evaluate_files(args.predictions, args.gold, lexicon)
    print(report.format_table())
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    if report.unmatched_predictions:
        listed = ", ".join(report.unmatched_predictions[:10])
        print(f"unmatched predictions: {len(report.unmatched_predictions)} ({listed})",
              file=sys.stderr)
        if args.strict:
            return 1
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    _require(args, "out", "seed", "fold")
    k_values = [int(v) for v in args.k_grid.split(",") if v.strip()]
    if not k_values:
        raise CliError("--k-grid must list at least one k")
    for k in k_values:
        _check_k(k, args.allow_any_k)
    lexicon, registry = _load_inputs(args)
    split = split_folds(registry, args.seed)
    out_root = Path(args.out)
    rows: list[tuple[int, str, str, float | None]] = []
    for k in k_values:
        plan = ExperimentPlan(
            fold_split=split, held_out_fold=args.fold, k=k, master_seed=args.seed
        )
        k_dir = out_root / f"k={k}"
        _generate_into(k_dir, plan, registry, lexicon)
        config = _baseline_config(args, registry)
        for vocab_condition, template_condition in (
            ("ind", "ind"), ("ood", "ind"), ("ind", "ood"), ("ood", "ood"),
        ):
            name = quadrant_name(vocab_condition, template_condition)
            gold = k_dir / f"test_{name}.jsonl"
            predictions_path = k_dir / f"baseline_{name}.jsonl"
            run_files(
                gold, config, registry, lexicon, predictions_path,
                k_dir / f"baseline_{name}.fallbacks.jsonl",
            )
            report = evaluate_files(predictions_path, gold, lexicon)
            (k_dir / f"eval_{name}.json").write_text(
                report.to_json() + "\n", encoding="utf-8"
            )
            data = report.overall.to_dict()
            for metric in GRID_METRICS:
                rows.append((k, name, metric, data[metric]))
        print(f"k={k} done")
    rows.sort(key=lambda row: (row[0], row[1], row[2]))
    with (out_root / "grid.csv").open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "quadrant", "metric", "value"])
        for k, name, metric, value in rows:
            writer.writerow([k, name, metric, "" if value is None else f"{value:.6f}"])
    print(f"wrote {out_root / 'grid.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nliexp",
        description="Generate templated NLI corpora with explanations and evaluate them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, data=True):
        p.add_argument("--config", help="key = value config file; flags override it")
        if data:
            p.add_argument("--lexicon", help="lexicon file (default: packaged)")
            p.add_argument("--registry", help="template file (default: packaged)")

    p = sub.add_parser("generate", help="write train/dev and the four test quadrants")
    common(p)
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="master seed (required; no clock default)")
    p.add_argument("--k", type=int, help="training examples per template")
    p.add_argument("--fold", type=int, choices=range(5), help="held-out fold")
    p.add_argument("--allow-any-k", action="store_true",
                   help="accept k outside {1,2,4,8,16}")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("baseline", help="run the rule-based explain-then-predict system")
    common(p)
    p.add_argument("--input", help="examples JSONL to predict on")
    p.add_argument("--out", help="predictions JSONL to write")
    p.add_argument("--fallback-log", help="fallback example-id log (JSONL)")
    p.add_argument("--scope", choices=("restricted", "closed-book"), default="restricted")
    p.add_argument("--fallback", choices=("abstain", "majority"), default="abstain")
    p.add_argument("--seed", type=int, help="seed used for the fold split")
    p.add_argument("--fold", type=int, choices=range(5), help="held-out fold")
    p.set_defaults(handler=cmd_baseline)

    p = sub.add_parser("evaluate", help="score a predictions file against gold examples")
    common(p, data=False)
    p.add_argument("--lexicon", help="lexicon file (default: packaged)")
    p.add_argument("--predictions", help="predictions JSONL")
    p.add_argument("--gold", help="gold examples JSONL")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--strict", action="store_true",
                   help="exit nonzero when predictions fail to join")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("grid", help="generate + baseline + evaluate over a k grid")
    common(p)
    p.add_argument("--out", help="output directory root")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--fold", type=int, choices=range(5), help="held-out fold")
    p.add_argument("--k-grid", default="1,2,4,8,16", help="comma-separated k values")
    p.add_argument("--scope", choices=("restricted", "closed-book"), default="restricted")
    p.add_argument("--fallback", choices=("abstain", "majority"), default="abstain")
    p.add_argument("--allow-any-k", action="store_true")
    p.set_defaults(handler=cmd_grid)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.handler(args)
    except ParseAmbiguityError as err:
        # Registry validation should have made this unreachable.
        print(f"internal error: {err}", file=sys.stderr)
        return 2
    except (CliError, *_INPUT_ERRORS) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # internal invariant violation
        print(f"internal error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
