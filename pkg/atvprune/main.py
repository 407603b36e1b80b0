"""
Main entry point of the ATVPrune command line.
"""

import sys
import signal
import argparse
from typing import Any, Dict, List, Optional
from atvprune.errors import AtvError
from atvprune.evalgen import SweepKind, SynthSpec
from atvprune.saliency import SaliencySignal
from atvprune.calibration import PoolKind
from atvprune.probe import PROBE_POOLS, PROBE_SPARSITIES
from atvprune.pruner import ComparisonGroup, Propagation, SparsityPattern
from atvprune.utils import error_panel, extract_command_config, load_config, log, set_quiet
from .commands import (
    run_config_from,
    run_drift_stats,
    run_gen_synth,
    run_probe_mot,
    run_prune,
    run_schema,
    run_sweep,
)

interrupt_counter = 0


def signal_handler(sig, frame):
    """Handle SIGINT (Ctrl+C) signals"""
    global interrupt_counter
    interrupt_counter += 1

    if interrupt_counter >= 3:
        log("Received 3 interrupts. Aborting.", level="CRITICAL")
        sys.exit(130)
    else:
        log(f"Press Ctrl+C {3 - interrupt_counter} more times to abort.", level="WARNING")
        return


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=str,
        default="config.yaml",
        help="YAML file with run defaults",
    )
    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Only print warnings and errors",
    )


def _add_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", type=str, required=True, help="Input checkpoint")
    parser.add_argument("--calib", type=str, required=True, help="Calibration JSONL file")


def build_parser() -> argparse.ArgumentParser:
    """
    Build the command line parser.

    Returns:
        Parser with one subcommand per workflow
    """
    parser = argparse.ArgumentParser(
        prog="atvprune",
        description="Modality-aware activation pruning of toy multimodal transformers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prune = sub.add_parser("prune", help="Prune a checkpoint")
    _add_inputs(prune)
    prune.add_argument("--alpha", type=float, help="Visual budget coefficient")
    target = prune.add_mutually_exclusive_group()
    target.add_argument("--sparsity", type=float, help="Unstructured sparsity in [0, 1]")
    target.add_argument("--pattern", type=str, help="Semi-structured pattern N:M, e.g. 2:4")
    prune.add_argument("--signal", choices=[s.value for s in SaliencySignal])
    prune.add_argument("--policy", choices=[p.value for p in PoolKind])
    prune.add_argument("--group", choices=[g.value for g in ComparisonGroup])
    prune.add_argument("--propagation", choices=[p.value for p in Propagation])
    prune.add_argument("--text-keep-ratio", type=float, help="Fraction of text tokens kept")
    prune.add_argument("--seed", type=int, help="Seed of the random selection baseline")
    prune.add_argument("--threads", type=int, help="Worker threads")
    prune.add_argument("--out", type=str, required=True, help="Pruned checkpoint to write")
    prune.add_argument("--report", type=str, required=True, help="Report JSON to write")
    prune.add_argument("--no-progress", action="store_true", help="Hide the progress bar")
    _add_common(prune)

    probe = sub.add_parser("probe-mot", help="Pathway x pool sensitivity grid")
    _add_inputs(probe)
    probe.add_argument(
        "--sparsity",
        type=float,
        nargs="+",
        default=list(PROBE_SPARSITIES),
        help="Sparsity levels of the grid",
    )
    probe.add_argument("--grid", type=str, required=True, help="Sensitivity CSV to write")
    probe.add_argument("--iou", type=str, required=True, help="Per-layer IoU CSV to write")
    probe.add_argument("--report", type=str, help="Optional JSON summary with IoU histograms")
    probe.add_argument(
        "--iou-pools",
        nargs=2,
        choices=[p.value for p in PROBE_POOLS],
        default=[PoolKind.TEXT_ONLY.value, PoolKind.VISUAL_ONLY.value],
        help="The two pools whose masks are compared",
    )
    probe.add_argument("--group", choices=[g.value for g in ComparisonGroup])
    probe.add_argument("--propagation", choices=[p.value for p in Propagation])
    probe.add_argument("--threads", type=int, help="Worker threads")
    _add_common(probe)

    drift = sub.add_parser("drift-stats", help="Per-block saliency and budget table")
    _add_inputs(drift)
    drift.add_argument("--alpha", type=float, help="Visual budget coefficient")
    drift.add_argument("--signal", choices=[s.value for s in SaliencySignal])
    drift.add_argument("--seed", type=int, help="Seed of the random signal")
    drift.add_argument("--out", type=str, required=True, help="CSV to write")
    _add_common(drift)

    sweep = sub.add_parser("sweep", help="Budget, text-retention and selection ablations")
    _add_inputs(sweep)
    sweep.add_argument(
        "--kind",
        nargs="+",
        choices=[k.value for k in SweepKind],
        help="Sweeps to run, all of them when omitted",
    )
    sweep.add_argument(
        "--target",
        nargs="+",
        help="Sparsity levels or N:M patterns, e.g. 0.5 2:4",
    )
    sweep.add_argument("--alpha", type=float, help="Budget coefficient of the ratio and selection sweeps")
    sweep.add_argument("--group", choices=[g.value for g in ComparisonGroup])
    sweep.add_argument("--propagation", choices=[p.value for p in Propagation])
    sweep.add_argument("--seed", type=int, help="Seed of the random selection row")
    sweep.add_argument("--threads", type=int, help="Worker threads")
    sweep.add_argument("--out", type=str, required=True, help="CSV to write")
    _add_common(sweep)

    synth = sub.add_parser("gen-synth", help="Write synthetic calibration data and a toy model")
    synth.add_argument("--seed", type=int, help="Generator seed")
    synth.add_argument("--samples", type=int, help="Number of samples")
    synth.add_argument("--d-model", type=int, help="Embedding width")
    synth.add_argument("--n-visual", type=int, help="Visual tokens per sample")
    synth.add_argument("--n-text", type=int, help="Text tokens per sample")
    synth.add_argument("--separation", type=float, help="Distance between modality means")
    synth.add_argument(
        "--visual-channels", type=int, help="Leading channels that carry visual tokens, 0 for all"
    )
    synth.add_argument("--n-blocks", type=int, help="Blocks of the toy model")
    synth.add_argument("--n-heads", type=int, help="Attention heads of the toy model")
    synth.add_argument("--d-ffn", type=int, help="FFN width, 4 x d_model when omitted")
    synth.add_argument("--out", type=str, required=True, help="Output directory")
    _add_common(synth)

    schema = sub.add_parser("schema", help="Print the JSON schema of prune reports")
    schema.add_argument("--out", type=str, help="Write the schema to a file instead")

    return parser


def _section(args: argparse.Namespace, command: str) -> Dict[str, Any]:
    return extract_command_config(command, load_config(args.config))


def dispatch(args: argparse.Namespace) -> None:
    """Run the workflow selected on the command line."""
    if getattr(args, "quiet", False):
        set_quiet(True)

    if args.command == "prune":
        config = run_config_from(
            _section(args, "prune"),
            {
                "alpha": args.alpha,
                "sparsity": args.sparsity,
                "pattern": args.pattern,
                "signal": args.signal,
                "policy": args.policy,
                "comparison_group": args.group,
                "propagation": args.propagation,
                "text_keep_ratio": args.text_keep_ratio,
                "seed": args.seed,
                "threads": args.threads,
            },
        )
        run_prune(
            args.model,
            args.calib,
            args.out,
            args.report,
            config,
            show_progress=not (args.no_progress or args.quiet),
        )
    elif args.command == "probe-mot":
        config = run_config_from(
            _section(args, "probe_mot"),
            {
                "comparison_group": args.group,
                "propagation": args.propagation,
                "threads": args.threads,
            },
        )
        run_probe_mot(
            args.model,
            args.calib,
            args.grid,
            args.iou,
            args.report,
            sparsities=args.sparsity,
            iou_pools=tuple(args.iou_pools),
            config=config,
        )
    elif args.command == "drift-stats":
        config = run_config_from(
            _section(args, "drift_stats"),
            {"alpha": args.alpha, "signal": args.signal, "seed": args.seed},
        )
        run_drift_stats(args.model, args.calib, args.out, config)
    elif args.command == "sweep":
        section = _section(args, "sweep")
        config = run_config_from(
            section,
            {
                "alpha": args.alpha,
                "comparison_group": args.group,
                "propagation": args.propagation,
                "seed": args.seed,
                "threads": args.threads,
            },
        )
        kinds = args.kind or section.get("kinds") or [k.value for k in SweepKind]
        targets = args.target or section.get("targets")
        patterns = [SparsityPattern.from_target(t) for t in targets] if targets else None
        run_sweep(args.model, args.calib, args.out, kinds=kinds, patterns=patterns, config=config)
    elif args.command == "gen-synth":
        section = _section(args, "gen_synth")
        options = {
            "seed": args.seed,
            "n_samples": args.samples,
            "d_model": args.d_model,
            "n_visual": args.n_visual,
            "n_text": args.n_text,
            "separation": args.separation,
            "visual_channels": args.visual_channels,
        }
        spec_fields = set(SynthSpec.__dataclass_fields__)
        values = {k: v for k, v in section.items() if k in spec_fields}
        values.update({k: v for k, v in options.items() if v is not None})
        model = {
            "n_blocks": args.n_blocks or section.get("n_blocks", 8),
            "n_heads": args.n_heads or section.get("n_heads", 4),
            "d_ffn": args.d_ffn or section.get("d_ffn", 0),
        }
        run_gen_synth(SynthSpec(**values), args.out, **model)
    elif args.command == "schema":
        run_schema(args.out)


def entry(argv: Optional[List[str]] = None) -> None:
    """
    Main entry point for the CLI.
    """
    # Set up the signal handler
    signal.signal(signal.SIGINT, signal_handler)

    args = build_parser().parse_args(argv)
    try:
        dispatch(args)
    except AtvError as e:
        error_panel(e.message, title=f"{type(e).__name__} [{e.code}]")
        sys.exit(e.exit_code)
