"""
Workflows behind the CLI subcommands. Each function reads its inputs,
runs one job inside a RunContext and writes its outputs.
"""

import os
import json
from dataclasses import fields
from typing import Any, Dict, List, Optional, Sequence, Tuple
from atvprune.context import RunContext
from atvprune.execution import RunConfig
from atvprune.utils import log
from atvprune.calibration import PoolKind
from atvprune.pruner import PruneReport, SparsityPattern, run_atv_pipeline
from atvprune.model import TokenSequence, ToyTransformer
from atvprune.errors import CalibFormatError, StorageError, ValidationError
from atvprune.evalgen import (
    DriftRow,
    SweepKind,
    SweepSetup,
    SynthSpec,
    default_patterns,
    drift_report,
    generate_model,
    generate_samples,
    split_dataset,
    sweep_rows,
)
from atvprune.probe import PROBE_SPARSITIES, ProbeResult, sensitivity_grid
from atvprune.checker import CalibSchemaChecker, CheckerPipeline, CheckpointHeaderChecker
from atvprune.storage import (
    read_calib,
    read_checkpoint,
    report_schema,
    write_calib,
    write_checkpoint,
    write_csv,
    write_json,
)

GRID_COLUMNS = ("sparsity", "pathway", "pool", "retention", "error_text", "error_visual", "error_all")
IOU_COLUMNS = ("sparsity", "pathway", "pool_a", "pool_b", "layer", "iou")
DRIFT_COLUMNS = ("block", "s_bar", "mean_k", "total_selected")
SWEEP_COLUMNS = (
    "pattern",
    "sweep",
    "label",
    "value",
    "status",
    "retention",
    "error_text",
    "error_visual",
    "error_all",
    "mean_selected",
    "total_selected",
    "error_code",
)
CALIB_FILE = "calib.jsonl"
MODEL_FILE = "model.atvc"


def run_config_from(section: Dict[str, Any], overrides: Dict[str, Any]) -> RunConfig:
    """
    Build a RunConfig from a config.yaml section and CLI overrides.

    CLI values win; giving ``pattern`` clears a configured ``sparsity`` and
    the other way round.
    """
    known = {f.name for f in fields(RunConfig)}
    data = {k: v for k, v in section.items() if k in known}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "pattern" in overrides:
        data["sparsity"] = None
    if "sparsity" in overrides:
        data["pattern"] = None
    data.update(overrides)
    return RunConfig.from_dict(data)


def load_inputs(model_path: str, calib_path: str) -> Tuple[ToyTransformer, List[TokenSequence]]:
    """
    Check and load a checkpoint and a calibration file.

    Raises:
        StorageError: If the checkpoint is malformed or unreadable
        CalibFormatError: With every line-numbered calibration schema issue
    """
    issues = CheckerPipeline().add_checker(CheckpointHeaderChecker()).run(model_path)
    if issues:
        first = issues[0]
        raise StorageError(first.get("code", "bad-header"), f"{model_path}: {first['message']}")
    model = read_checkpoint(model_path)

    issues = CheckerPipeline().add_checker(CalibSchemaChecker(model.config.d_model)).run(calib_path)
    if issues:
        if any(issue.get("code") == "io" for issue in issues):
            raise StorageError("io", f"{calib_path}: {issues[0]['message']}")
        raise CalibFormatError(issues, calib_path)
    dataset = read_calib(calib_path, model.config.d_model)
    log(
        f"Loaded {model.config.n_blocks}-block model (d_model={model.config.d_model}) "
        f"and {len(dataset)} calibration samples"
    )
    return model, dataset


def _split_heldout(dataset: List[TokenSequence]) -> Tuple[List[TokenSequence], List[TokenSequence]]:
    calib, heldout = split_dataset(dataset)
    if not heldout:
        log("Too few samples for a held-out split, evaluating on calibration data", "WARNING")
        heldout = calib
    return calib, heldout


def run_prune(
    model_path: str,
    calib_path: str,
    out: str,
    report_path: str,
    config: RunConfig,
    show_progress: bool = False,
) -> PruneReport:
    """
    Prune a checkpoint and write the pruned checkpoint and its report.

    Args:
        model_path: Dense checkpoint
        calib_path: Calibration JSONL
        out: Pruned checkpoint to write
        report_path: Report JSON to write
        config: Run configuration
        show_progress: Show a per-block progress bar

    Returns:
        The run report
    """
    with RunContext("prune", log_flags=True) as context:
        model, dataset = load_inputs(model_path, calib_path)
        pattern = config.sparsity_pattern()
        log(f"Pruning to {pattern} with the {config.policy} pool")
        outcome = run_atv_pipeline(
            model,
            dataset,
            config.pool_policy(),
            pattern,
            config.comparison_group,
            config.propagation,
            seed=config.seed,
            threads=config.effective_threads(),
            show_progress=show_progress,
        )
        report = outcome.report.model_copy(
            update={
                "config": {**config.to_dict(), "policy_detail": outcome.report.config["policy"]},
                "elapsed_seconds": context.elapsed(),
            }
        )
        write_checkpoint(out, outcome.model)
        write_json(report_path, report)
    log(
        f"Global sparsity {report.global_sparsity:.4f}, checkpoint written to {out}",
        level="SUCCESS",
    )
    return report


def run_probe_mot(
    model_path: str,
    calib_path: str,
    grid_path: str,
    iou_path: str,
    report_path: Optional[str] = None,
    sparsities: Sequence[float] = PROBE_SPARSITIES,
    iou_pools: Tuple[str, str] = (PoolKind.TEXT_ONLY.value, PoolKind.VISUAL_ONLY.value),
    config: Optional[RunConfig] = None,
) -> ProbeResult:
    """
    Run the pathway x pool sensitivity grid.

    The calibration file is split by sample index: the first 80% calibrate,
    the rest is held out for the retention proxy.
    """
    config = config or RunConfig()
    with RunContext("probe-mot", log_flags=True) as context:
        model, dataset = load_inputs(model_path, calib_path)
        calib, heldout = _split_heldout(dataset)
        result = sensitivity_grid(
            model,
            calib,
            heldout,
            sparsities=sparsities,
            iou_pools=tuple(PoolKind(p) for p in iou_pools),
            group=config.comparison_group,
            propagation=config.propagation,
            threads=config.effective_threads(),
        )
        write_csv(grid_path, [cell.to_dict() for cell in result.cells], GRID_COLUMNS)
        write_csv(iou_path, result.iou_rows(), IOU_COLUMNS)
        if report_path:
            write_json(
                report_path,
                {
                    "config": config.to_dict(),
                    "sparsities": list(sparsities),
                    "grid": [cell.to_dict() for cell in result.cells],
                    "iou": [summary.model_dump(mode="json") for summary in result.iou],
                    "flags": context.flags.to_dict(),
                },
            )
    log(f"Sensitivity grid written to {grid_path}, IoU table to {iou_path}", level="SUCCESS")
    return result


def run_drift_stats(
    model_path: str, calib_path: str, out: str, config: Optional[RunConfig] = None
) -> List[DriftRow]:
    """Per-block saliency mean and budget statistics as CSV."""
    config = config or RunConfig()
    with RunContext("drift-stats", log_flags=True):
        model, dataset = load_inputs(model_path, calib_path)
        rows = drift_report(model, dataset, config.alpha, config.signal, config.seed)
        write_csv(out, [row.to_dict() for row in rows], DRIFT_COLUMNS)
    log(f"Drift statistics of {len(rows)} blocks written to {out}", level="SUCCESS")
    return rows


def run_sweep(
    model_path: str,
    calib_path: str,
    out: str,
    kinds: Sequence[str] = tuple(kind.value for kind in SweepKind),
    patterns: Optional[Sequence[SparsityPattern]] = None,
    config: Optional[RunConfig] = None,
) -> List[Dict[str, Any]]:
    """
    Run ablation sweeps at every target sparsity and write one CSV row per run.

    Args:
        model_path: Dense checkpoint
        calib_path: Calibration JSONL, split 80/20 into calibration and held-out
        out: CSV to write
        kinds: Sweeps to run, in order
        patterns: Target sparsities; the reference levels and N:M patterns when omitted
        config: Budget coefficient, comparison group, propagation, seed and threads

    Returns:
        The written rows
    """
    config = config or RunConfig()
    try:
        kinds = [SweepKind(kind) for kind in kinds]
    except ValueError as e:
        raise ValidationError("config", str(e)) from e
    patterns = list(patterns or default_patterns())
    rows: List[Dict[str, Any]] = []
    with RunContext("sweep", log_flags=True):
        model, dataset = load_inputs(model_path, calib_path)
        calib, heldout = _split_heldout(dataset)
        for pattern in patterns:
            setup = SweepSetup(
                model=model,
                calib=calib,
                heldout=heldout,
                pattern=pattern,
                group=config.comparison_group,
                propagation=config.propagation,
                seed=config.seed,
                threads=config.effective_threads(),
            )
            for kind in kinds:
                log(f"Running the {kind.value} sweep at {pattern}")
                for row in sweep_rows(setup, kind, config.alpha):
                    rows.append({"pattern": str(pattern), "sweep": kind.value, **row.to_dict()})
        failed = sum(row["status"] == "failed" for row in rows)
        if failed:
            log(f"{failed} sweep rows had an empty calibration pool", "WARNING")
        write_csv(out, rows, SWEEP_COLUMNS)
    log(f"{len(rows)} sweep rows written to {out}", level="SUCCESS")
    return rows


def run_gen_synth(
    spec: SynthSpec, out: str, n_blocks: int = 8, n_heads: int = 4, d_ffn: int = 0
) -> Tuple[str, str]:
    """
    Write a synthetic calibration file and a random toy checkpoint.

    Returns:
        Paths of (calibration JSONL, checkpoint)
    """
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as e:
        raise StorageError("io", f"cannot create {out}: {e}") from e
    calib_path = os.path.join(out, CALIB_FILE)
    model_path = os.path.join(out, MODEL_FILE)
    with RunContext("gen-synth"):
        write_calib(calib_path, generate_samples(spec))
        write_checkpoint(model_path, generate_model(spec, n_blocks, n_heads, d_ffn))
    log(f"Wrote {spec.n_samples} samples to {calib_path} and a model to {model_path}", level="SUCCESS")
    return calib_path, model_path


def run_schema(out: Optional[str] = None) -> Dict[str, Any]:
    """Print or write the JSON schema of prune reports."""
    schema = report_schema()
    if out:
        write_json(out, schema)
    else:
        print(json.dumps(schema, indent=2))
    return schema
