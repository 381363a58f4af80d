"""Command-line interface.

Subcommands:

* ``train``        — run one SGD experiment, write per-iteration traces
* ``eval``         — score a saved model on freshly generated samples
* ``gradcheck``    — finite-difference audit of the analytic gradients
* ``matched``      — run a template bank over a signal file
* ``shapes``       — closed-form size/parameter walk of a layer table
* ``param-budget`` — direct vs width-1-factored weight-count comparison

Exit codes: 0 success, 1 check failure (gradcheck over tolerance),
2 usage or configuration error (message names the offending field).
"""

import argparse
import os
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

from .data import generate_epoch, generate_sample, data_streams
from .errors import ConfigError, SigcnnError
from .gradcheck import audit
from .matched_filter import TemplateBank, detect_feature
from .model_io import (
    dumps_json,
    load_model,
    read_signal_csv,
    read_templates_csv,
    save_model,
    write_csv,
    write_json,
    write_text,
)
from .network import evaluate, forward, train, train_streams
from .presets import PRESET_NAMES, PipelineConfig, build_network, load_config, pipeline_to_dict, preset
from .shapes import alexnet_walkthrough, param_budget, walk_layer_table

GRADCHECK_TOLERANCE = 1e-6
LIVE_PREACT_FLOOR = 1e-4  # reject audit draws with near-kink or dead units


@dataclass(frozen=True)
class RunReport:
    """Everything one experiment run reports back."""

    config: dict
    final_train_loss: float
    epoch_mean_losses: list
    epoch_mean_p_target: list
    clamp_events: int
    parameter_count: int
    shapes: list
    test_count: int
    test_accuracy: float
    test_correct: int
    test_ties: int
    artifacts: list


def _add_config_options(sub, with_train_overrides=True):
    sub.add_argument("--preset", help=f"built-in pipeline name: {', '.join(PRESET_NAMES)}")
    sub.add_argument("--config", help="pipeline JSON file (overrides --preset)")
    sub.add_argument("--seed", type=int, help="override both the training and data seeds")
    if with_train_overrides:
        sub.add_argument("--epochs", type=int, help="override train.epochs")
        sub.add_argument("--lr", type=float, help="override train.lr_weights")
        sub.add_argument("--lr-bias", type=float, help="override train.lr_bias")
        sub.add_argument("--keep-prob", type=float, help="override train.keep_prob")


def _resolve_config(args) -> PipelineConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("one of --preset or --config is required")
    overrides = {}
    for flag, field_name in (
        ("seed", "seed"),
        ("epochs", "epochs"),
        ("lr", "lr_weights"),
        ("lr_bias", "lr_bias"),
        ("keep_prob", "keep_prob"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field_name] = value
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    if getattr(args, "seed", None) is not None:
        cfg = PipelineConfig(cfg.name, cfg.arch, cfg.train, replace(cfg.data, seed=args.seed))
    return cfg


def _test_set(cfg: PipelineConfig, count: int):
    if count < 1:
        raise ConfigError(f"empty test set (count={count})")
    _, test_rng = data_streams(cfg.data.seed)
    return generate_epoch(cfg.data, count, test_rng)


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    init_rng, dropout_rng = train_streams(cfg.train.seed)
    train_rng, _ = data_streams(cfg.data.seed)
    net = build_network(cfg, init_rng)
    dataset = generate_epoch(cfg.data, cfg.train.realizations_per_epoch, train_rng)
    log = train(net, dataset, cfg.train, dropout_rng)
    accuracy, correct, ties = evaluate(net, _test_set(cfg, args.test_count))

    write_csv(
        os.path.join(out_dir, "probs.csv"),
        ["iteration", "P_target", "P_other"],
        [[i + 1, pt, po] for i, (pt, po) in enumerate(zip(log.p_target, log.p_other))],
    )
    n_weights = log.weight_rows[0].size
    write_csv(
        os.path.join(out_dir, "weights.csv"),
        ["iteration"] + [f"w{j}" for j in range(n_weights)],
        [[i + 1, *row] for i, row in enumerate(log.weight_rows)],
    )
    save_model(os.path.join(out_dir, "model.json"), net)
    artifacts = ["model.json", "probs.csv", "weights.csv", "summary.json"]
    if args.gnuplot:
        write_text(os.path.join(out_dir, "plot.gp"), _probs_plot_script())
        artifacts.append("plot.gp")
    report = RunReport(
        config=pipeline_to_dict(cfg),
        final_train_loss=log.losses[-1],
        epoch_mean_losses=log.epoch_mean_losses(),
        epoch_mean_p_target=log.epoch_mean_p_target(),
        clamp_events=log.clamp_events,
        parameter_count=net.param_count(),
        shapes=net.shape_walk(),
        test_count=args.test_count,
        test_accuracy=accuracy,
        test_correct=correct,
        test_ties=ties,
        artifacts=sorted(artifacts),
    )
    write_json(os.path.join(out_dir, "summary.json"), asdict(report))
    print(f"{cfg.name}: {log.iterations} iterations, final loss {log.losses[-1]:.6g}")
    print(f"test accuracy {accuracy:.2f} ({correct}/{args.test_count}, ties {ties})")
    print(f"parameters {net.param_count()}; wrote {', '.join(sorted(artifacts))} to {out_dir}")
    return 0


def _probs_plot_script() -> str:
    return (
        "# class probabilities per training iteration (run: gnuplot plot.gp)\n"
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,540\n"
        "set output 'probs.png'\n"
        "set xlabel 'iteration'\n"
        "set ylabel 'probability'\n"
        "set yrange [0:1]\n"
        "plot 'probs.csv' using 1:2 with points pt 1 ps 0.4 title 'P(target)', \\\n"
        "     'probs.csv' using 1:3 with points pt 7 ps 0.2 title 'P(other)'\n"
    )


def cmd_eval(args) -> int:
    net = load_model(args.model)
    cfg = _resolve_config(args)
    accuracy, correct, ties = evaluate(net, _test_set(cfg, args.count))
    print(
        dumps_json(
            {
                "model": os.path.basename(args.model),
                "test_count": args.count,
                "accuracy": accuracy,
                "correct": correct,
                "ties": ties,
                "parameter_count": net.param_count(),
            }
        )
    )
    return 0


def _has_live_activations(net, x) -> bool:
    """True when no pre-activation sits on (or numerically at) a kink."""
    _, tape = forward(net, x)
    mins = [float(np.min(np.abs(tr.pre_act))) for tr in tape.conv]
    mins += [float(np.min(np.abs(tr.pre_act))) for tr in tape.dense]
    return min(mins) > LIVE_PREACT_FLOOR


def draw_audit_cases(cfg: PipelineConfig, trials: int, rng) -> list:
    """(net, x, t) draws with fresh weights and a fresh sample per trial.

    Draws whose activations sit within LIVE_PREACT_FLOOR of a rectifier
    kink are redrawn: a finite-difference probe across the kink measures a
    different piecewise function, not the gradient.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    cases = []
    attempts = 0
    while len(cases) < trials:
        attempts += 1
        if attempts > 50 * trials:
            raise ConfigError("could not draw enough kink-free audit cases")
        net = build_network(cfg, rng)
        x, t, _ = generate_sample(cfg.data, rng)
        if _has_live_activations(net, x):
            cases.append((net, x, t))
    return cases


def cmd_gradcheck(args) -> int:
    cfg = _resolve_config(args)
    rng = np.random.default_rng(cfg.train.seed)
    cases = draw_audit_cases(cfg, args.trials, rng)
    max_rel, worst, reports = audit(cases, args.h)
    checked = sum(len(r.checks) for r in reports)
    excluded = sum(r.excluded for r in reports)
    print(f"checked {checked} parameters over {args.trials} cases ({excluded} kink-adjacent excluded)")
    print(f"max relative error {max_rel:.3e} (tolerance {GRADCHECK_TOLERANCE:.0e})")
    if max_rel > GRADCHECK_TOLERANCE:
        print(f"FAIL: worst at {worst}")
        return 1
    print("PASS")
    return 0


def cmd_matched(args) -> int:
    x = read_signal_csv(args.signal)
    names, templates = read_templates_csv(args.templates)
    bank = TemplateBank(templates)
    report = detect_feature(bank, x)
    for name, resp in zip(names, report.per_template):
        print(f"{name}: peak {resp.peak_value:.6g} at index {resp.peak_index}")
    print(f"winner: {names[report.winner]}")
    os.makedirs(args.out_dir, exist_ok=True)
    rows_needed = max(r.response.size for r in report.per_template)
    rows = [
        [
            (report.per_template[c].response[i] if i < report.per_template[c].response.size else "")
            for c in range(len(names))
        ]
        for i in range(rows_needed)
    ]
    out_path = os.path.join(args.out_dir, "responses.csv")
    write_csv(out_path, names, rows)
    print(f"wrote {out_path}")
    return 0


def _load_layer_table(path):
    import json

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"layer table not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"layer table is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ConfigError("layer table root must be a JSON object")
    for key in ("input", "channels", "layers"):
        if key not in doc:
            raise ConfigError(f"missing field {key}")
    return doc["input"], doc["channels"], doc["layers"]


def cmd_shapes(args) -> int:
    if args.table:
        rows = walk_layer_table(*_load_layer_table(args.table))
    else:
        rows = alexnet_walkthrough()
    label_w = max(len(r.label) for r in rows)
    for r in rows:
        note = ""
        if r.matches_declared is False:
            declared = "x".join(str(s) for s in r.declared)
            note = f"  MISMATCH: declared {declared}, formula gives " + "x".join(
                str(s) for s in r.out_size
            )
        elif r.matches_declared is True:
            note = "  ok"
        params = f"  params {r.params}" if r.op != "input" else ""
        print(f"{r.label:<{label_w}}  {r.size_text()}{params}{note}")
    print(f"total params {sum(r.params for r in rows)}")
    return 0


def cmd_param_budget(args) -> int:
    report = param_budget(args.channels, args.filters, args.taps)
    print(f"direct:   {report.direct} weights ({report.taps}-tap filters on {report.channels} channels, {report.filters} outputs)")
    print(f"factored: {report.factored} weights (width-1 collapse, then {report.taps}-tap filters)")
    if report.beneficial:
        print(f"saving:   {report.ratio:.3g}x fewer weights")
    else:
        print("factorization not beneficial")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigcnn",
        description="1-D correlation-network toolkit: training, auditing, and size arithmetic.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_train = subs.add_parser("train", help="run one experiment and write trace files")
    _add_config_options(p_train)
    p_train.add_argument("--out-dir", default="sigcnn-run", help="directory for output files")
    p_train.add_argument("--test-count", type=int, default=100, help="held-out samples to score")
    p_train.add_argument("--gnuplot", action="store_true", help="also write plot.gp")
    p_train.set_defaults(func=cmd_train)

    p_eval = subs.add_parser("eval", help="score a saved model on fresh samples")
    p_eval.add_argument("--model", required=True, help="model JSON written by train")
    _add_config_options(p_eval)
    p_eval.add_argument("--count", type=int, default=100, help="number of test samples")
    p_eval.set_defaults(func=cmd_eval)

    p_grad = subs.add_parser("gradcheck", help="finite-difference gradient audit")
    _add_config_options(p_grad)
    p_grad.add_argument("--trials", type=int, default=20, help="random (net, sample) draws")
    p_grad.add_argument("--h", type=float, default=1e-6, help="central-difference step")
    p_grad.set_defaults(func=cmd_gradcheck)

    p_match = subs.add_parser("matched", help="run a template bank over a signal")
    p_match.add_argument("signal", help="single-column CSV with the signal")
    p_match.add_argument("templates", help="CSV with one named column per template")
    p_match.add_argument("--out-dir", default=".", help="directory for responses.csv")
    p_match.set_defaults(func=cmd_matched)

    p_shapes = subs.add_parser("shapes", help="size/parameter walk of a layer table")
    p_shapes.add_argument(
        "table",
        nargs="?",
        help="JSON layer table {input, channels, layers}; default: built-in walkthrough",
    )
    p_shapes.set_defaults(func=cmd_shapes)

    p_budget = subs.add_parser("param-budget", help="direct vs width-1-factored weights")
    p_budget.add_argument("--channels", type=int, required=True, help="input channels")
    p_budget.add_argument("--filters", type=int, required=True, help="output filters")
    p_budget.add_argument("--taps", type=int, required=True, help="filter width")
    p_budget.set_defaults(func=cmd_param_budget)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse has already printed usage/help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SigcnnError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
