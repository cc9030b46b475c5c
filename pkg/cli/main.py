#!/usr/bin/env python3

import functools
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.progress import track
from rich.table import Table

from core.component_factory import ComponentFactory
from core.datamodel import SPLITS, SampleRecord
from core.exceptions import ConfigError, SeqfillError
from core.logging_config import configure_logging
from core.run_config import RunConfig, load_run_config
from gapsim.gaps import MaskPool, simulate_gaps
from gapsim.synthetic import build_blob_mask_pool, generate_synthetic_scene
from inference.imputation import impute_sequence, imputed_record
from metrics.evaluation import EvalReport, evaluate, write_report
from models.checkpoint import checkpoint_id, load_checkpoint
from models.network import build_model
from providers.filesystem_sample_store import (
    FileSystemSampleStore,
    load_mask_pool,
    save_mask_pool,
)
from providers.yaml_config_provider import save_config
from training.dataset import GapSimulatedDataset, stable_hash
from training.trainer import Trainer, load_train_state
from visualization.panels import attention_panels, comparison_chart, sequence_strip

logger = logging.getLogger(__name__)

BLOB_POOL_DIR = "blob_mask_pool"


class SeqfillCLI:
    """Command implementations operating on one validated RunConfig."""

    def __init__(self, config: RunConfig, console: Optional[Console] = None):
        self.config = config
        self.console = console or Console()
        ComponentFactory.auto_register_implementations()

    # -- helpers ---------------------------------------------------------

    def _open_split(self, kind: str, split: str) -> FileSystemSampleStore:
        path = self.config.data.split_dir(kind, split)
        FileSystemSampleStore.load_manifest(path)
        return FileSystemSampleStore({"path": str(path), "split": split})

    def _new_split(self, kind: str, split: str) -> FileSystemSampleStore:
        path = self.config.data.split_dir(kind, split)
        if (path / "manifest.json").exists():
            logger.info(f"Overwriting {kind} split at {path}")
            (path / "manifest.json").unlink()
        return FileSystemSampleStore({"path": str(path), "split": split})

    def _available_splits(self, kind: str) -> List[str]:
        return [s for s in SPLITS if (self.config.data.split_dir(kind, s) / "manifest.json").exists()]

    def mask_pool(self, height: int, width: int) -> MaskPool:
        """The configured mask pool, or a blob pool generated once and cached."""
        gaps = self.config.gaps
        if gaps.mask_pool:
            return load_mask_pool(gaps.mask_pool)
        path = Path(self.config.data.root) / BLOB_POOL_DIR
        if (path / "meta.json").exists():
            pool = load_mask_pool(path)
            if pool.spatial_size == (height, width) and len(pool) == gaps.blob_pool_size:
                return pool
        rng = np.random.default_rng([gaps.seed, stable_hash(BLOB_POOL_DIR)])
        pool = build_blob_mask_pool(gaps.blob_pool_size, height, width, tuple(gaps.blob_coverage), rng)
        save_mask_pool(pool, path)
        logger.info(f"Generated {len(pool)} blob masks at {path}")
        return pool

    def _check_channels(self, record: SampleRecord) -> None:
        model = self.config.model
        if record.num_channels != model.input_channels:
            raise ConfigError(
                f"Data has {record.num_channels} channels, model.input_channels is {model.input_channels}",
                {"field": "model.input_channels"},
            )
        if len(record.reconstruct_channels) != model.output_channels:
            raise ConfigError(
                f"Data has {len(record.reconstruct_channels)} reconstruct channels, "
                f"model.output_channels is {model.output_channels}",
                {"field": "model.output_channels"},
            )

    def _write_config(self, out_dir: Path) -> Path:
        return save_config(self.config.model_dump(mode="json"), out_dir / "config.yaml")

    # -- commands --------------------------------------------------------

    def synth(self) -> Dict[str, int]:
        """Generate a clean synthetic dataset with train/val/test splits."""
        synth = self.config.synth
        params = synth.scene_params()
        counts = synth.split_counts()
        for split, count in counts.items():
            store = self._new_split("clean", split)
            for index in track(range(count), description=f"synth {split}", console=self.console):
                sample_id = f"{split}_{index:05d}"
                rng = np.random.default_rng([synth.seed, stable_hash(sample_id)])
                store.add_sample(generate_synthetic_scene(params, rng, sample_id))
            store.write_manifest()
        self.console.print(f"Wrote {synth.num_samples} synthetic samples to {self.config.data.root}")
        return counts

    def simulate(self) -> Dict[str, int]:
        """Imprint simulated gaps on every clean split and record the pairing."""
        counts = {}
        for split in self._available_splits("clean"):
            clean = self._open_split("clean", split)
            if not len(clean):
                continue
            manifest = clean.manifest()
            pool = self.mask_pool(manifest.height, manifest.width)
            masked_store = self._new_split("masked", split)
            pairs = {}
            for record in track(clean.iter_samples(), total=len(clean), description=f"simulate {split}",
                                console=self.console):
                rng = np.random.default_rng([self.config.gaps.seed, stable_hash(record.sample_id)])
                masked, gaps = simulate_gaps(record, self.config.gaps, pool, rng)
                gap_frames = [int(t) for t in np.flatnonzero(gaps.any(axis=(1, 2, 3)))]
                masked = masked.with_metadata(source=record.sample_id, gap_frames=gap_frames)
                masked_store.add_sample(masked)
                pairs[record.sample_id] = {
                    "clean": str(clean.root / record.sample_id),
                    "gap_frames": gap_frames,
                }
            masked_store.write_manifest()
            masked_store.write_pairing(pairs)
            counts[split] = len(pairs)
        if not counts:
            raise ConfigError(
                f"No clean splits under {self.config.data.root}", {"field": "data.root"}
            )
        self.console.print(f"Simulated gaps for {sum(counts.values())} samples")
        return counts

    def train(self, resume: bool = False) -> Path:
        """Train the network on the clean train split, validating on val."""
        cfg = self.config
        train_records = list(self._open_split("clean", "train").iter_samples())
        val_records = list(self._open_split("clean", "val").iter_samples())
        if not train_records or not val_records:
            raise ConfigError("Training needs non-empty train and val splits", {"field": "data.root"})
        self._check_channels(train_records[0])

        height, width = train_records[0].spatial_size
        pool = self.mask_pool(height, width)
        window = cfg.train.window_length
        train_set = GapSimulatedDataset(
            train_records, cfg.gaps, pool, window, "train", cfg.train.seed, cfg.train.augment
        )
        val_set = GapSimulatedDataset(val_records, cfg.gaps, pool, window, "eval", cfg.train.seed, False)

        out_dir = cfg.output.dir
        self._write_config(out_dir)
        trainer = Trainer(build_model(cfg.model, seed=cfg.train.seed), cfg.train)
        state_path = out_dir / "train_state.pt"
        if resume and state_path.exists():
            load_train_state(state_path, trainer)

        result = trainer.fit(
            train_set,
            val_set,
            cfg.output.checkpoint_path,
            log_path=out_dir / "train_log.csv",
            state_path=state_path,
        )
        self.console.print(
            f"Best validation loss {result.state.best_val_loss:.5f} at epoch "
            f"{result.state.best_epoch}; checkpoint {result.checkpoint_path}"
        )
        return cfg.output.checkpoint_path

    def impute(self, checkpoint: Path) -> int:
        """Impute the configured masked split and export attention panels."""
        cfg = self.config
        split = cfg.inference.split
        imputer = ComponentFactory.create_imputer(
            {
                "type": "model",
                "checkpoint": str(checkpoint),
                "window_length": cfg.window_length,
                "device": "cpu" if cfg.train.device == "auto" else cfg.train.device,
            }
        )
        masked = self._open_split("masked", split)
        imputed_store = self._new_split("imputed", split)
        provenance = {"checkpoint": str(checkpoint), "checkpoint_id": checkpoint_id(checkpoint)}
        exported = 0
        for record in track(masked.iter_samples(), total=len(masked), description=f"impute {split}",
                            console=self.console):
            imputer.validate_input(record)
            result = imputer.impute(record)
            imputed_store.add_sample(imputed_record(record, result, provenance))
            if cfg.inference.export_attention and exported < cfg.inference.max_attention_exports:
                attention_panels(
                    result.attention[0],
                    record.spatial_size,
                    cfg.output.dir / "attention" / record.sample_id,
                    prefix="window0",
                    days=record.days[: result.attention[0].shape[1]].tolist(),
                )
                exported += 1
        imputed_store.write_manifest()
        self.console.print(f"Imputed {len(masked)} samples of split {split}")
        return len(masked)

    def evaluate(self, methods: Sequence[str], checkpoint: Optional[Path]) -> EvalReport:
        """Score the requested methods on the masked splits against the clean references."""
        cfg = self.config
        imputer_configs: List[Dict[str, Any]] = []
        for method in methods:
            entry: Dict[str, Any] = {"type": method}
            if method == "model":
                entry.update({"checkpoint": str(checkpoint), "window_length": cfg.window_length})
            imputer_configs.append(entry)
        registry = ComponentFactory.create_imputer_registry(imputer_configs)

        rows = []
        for split in cfg.evaluation.splits:
            masked_store = self._open_split("masked", split)
            clean_store = self._open_split("clean", split)
            pairing = masked_store.read_pairing()
            for record in track(masked_store.iter_samples(), total=len(masked_store),
                                description=f"evaluate {split}", console=self.console):
                source = record.metadata.get("source", record.sample_id)
                if source not in pairing:
                    raise ConfigError(f"Sample {record.sample_id} has no pairing entry", {"sample_id": source})
                reference = clean_store.load_sample(source)
                for imputer in registry.get_all_imputers():
                    imputer.validate_input(record)
                    result = imputer.impute(record)
                    rows.append(evaluate(result.values, record, reference, method=imputer.name, split=split))

        report = EvalReport.from_rows(rows)
        out_dir = cfg.output.dir / "evaluation"
        write_report(report, out_dir)
        if cfg.evaluation.plot:
            comparison_chart(report.summary, out_dir / "mae_by_method.png", metric="mae")
        self._print_summary(report)
        return report

    def export_attention(
        self, checkpoint: Path, sample_id: str, query_frames: Sequence[int], split: str
    ) -> List[Path]:
        """Write one attention panel per head for every window of a sample."""
        record = self._open_split("masked", split).load_sample(sample_id)
        model, _ = load_checkpoint(checkpoint)
        result = impute_sequence(model, record, self.config.window_length)
        out_dir = self.config.output.dir / "attention" / sample_id
        paths = []
        for index, (start, end) in enumerate(result.metadata["window_plan"]["windows"]):
            rows = [q - start for q in query_frames if start <= q < end] if query_frames else None
            if query_frames and not rows:
                continue
            paths += attention_panels(
                result.attention[index],
                record.spatial_size,
                out_dir,
                prefix=f"window{index}",
                query_frames=rows,
                days=record.days[start:end].tolist(),
            )
        strip_rows = [("input", record.reconstruct_images()), ("imputed", result.values)]
        reference = self._clean_reference(record, split)
        if reference is not None:
            strip_rows.append(("reference", reference.reconstruct_images()))
        strip = sequence_strip(strip_rows, out_dir / "sequence.png", days=record.days.tolist())
        self.console.print(f"Wrote {len(paths)} attention panel(s) and {strip.name} to {out_dir}")
        return paths

    def _clean_reference(self, record: SampleRecord, split: str) -> Optional[SampleRecord]:
        source = record.metadata.get("source", record.sample_id)
        clean_dir = self.config.data.split_dir("clean", split)
        if not (clean_dir / "manifest.json").exists():
            return None
        if source not in FileSystemSampleStore.load_manifest(clean_dir).sample_ids:
            return None
        return self._open_split("clean", split).load_sample(source)

    def _print_summary(self, report: EvalReport) -> None:
        table = Table(title="Imputation accuracy")
        columns = ["method", "split", "mae", "rmse", "sam", "psnr", "ssim", "mae_valid", "ssim_valid", "sequences"]
        for column in columns:
            table.add_column(column, justify="left" if column in ("method", "split") else "right")
        for _, row in report.summary.iterrows():
            table.add_row(*[
                str(row[c]) if c in ("method", "split", "sequences") else f"{row[c]:.4f}" for c in columns
            ])
        self.console.print(table)


def handle_errors(command: Callable) -> Callable:
    """Turn toolkit and validation errors into a clean exit code 1."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SeqfillError as e:
            raise click.ClickException(str(e)) from e
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors()
            )
            raise click.ClickException(f"Invalid configuration: {problems}") from e

    return wrapper


def common_options(command: Callable) -> Callable:
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML config file"),
        click.option("--seed", type=int, default=None, help="Seed for every random draw"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory"),
        click.option("--data-root", type=click.Path(file_okay=False), default=None, help="Dataset root"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_cli(ctx: click.Context, config_path, seed, out, data_root, **sections) -> SeqfillCLI:
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["seed"] = seed
    if out is not None:
        overrides.setdefault("output", {})["dir"] = out
    if data_root is not None:
        overrides.setdefault("data", {})["root"] = data_root
    for section, values in sections.items():
        values = {k: v for k, v in values.items() if v is not None}
        if values:
            overrides.setdefault(section, {}).update(values)

    config = load_run_config(config_path, overrides)
    configure_logging(config.logging.model_dump(mode="json"), console=ctx.obj.get("console"))
    return SeqfillCLI(config, console=ctx.obj.get("console"))


@click.group()
@click.pass_context
def cli(ctx):
    """seqfill - gap filling for satellite image time series."""
    load_dotenv()
    ctx.ensure_object(dict)


@cli.command()
@common_options
@click.option("--num-samples", type=int, default=None, help="Number of scenes to generate")
@click.pass_context
@handle_errors
def synth(ctx, config_path, seed, out, data_root, num_samples):
    """Generate a clean synthetic dataset."""
    app = build_cli(ctx, config_path, seed, out, data_root, synth={"num_samples": num_samples})
    app.synth()


@cli.command()
@common_options
@click.pass_context
@handle_errors
def simulate(ctx, config_path, seed, out, data_root):
    """Imprint simulated gaps on the clean dataset."""
    app = build_cli(ctx, config_path, seed, out, data_root)
    app.simulate()


@cli.command()
@common_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Checkpoint to write")
@click.option("--max-epochs", type=int, default=None, help="Override train.max_epochs")
@click.option("--resume", is_flag=True, help="Continue from the saved training state")
@click.pass_context
@handle_errors
def train(ctx, config_path, seed, out, data_root, checkpoint, max_epochs, resume):
    """Train the network on the clean train split."""
    app = build_cli(
        ctx, config_path, seed, out, data_root,
        train={"max_epochs": max_epochs}, output={"checkpoint": checkpoint},
    )
    app.train(resume=resume)


@cli.command()
@common_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Trained checkpoint")
@click.option("--split", type=click.Choice(SPLITS), default=None, help="Split to impute")
@click.pass_context
@handle_errors
def impute(ctx, config_path, seed, out, data_root, checkpoint, split):
    """Impute a masked split with a trained checkpoint."""
    app = build_cli(
        ctx, config_path, seed, out, data_root,
        output={"checkpoint": checkpoint}, inference={"split": split},
    )
    app.impute(app.config.output.checkpoint_path)


@cli.command("evaluate")
@common_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Trained checkpoint")
@click.option("--methods", default=None, help="Comma-separated subset of last,closest,linear,model")
@click.pass_context
@handle_errors
def evaluate_command(ctx, config_path, seed, out, data_root, checkpoint, methods):
    """Compare imputation methods on the masked splits."""
    evaluation = {"methods": [m.strip() for m in methods.split(",") if m.strip()]} if methods else {}
    app = build_cli(
        ctx, config_path, seed, out, data_root,
        output={"checkpoint": checkpoint}, evaluation=evaluation,
    )
    app.evaluate(app.config.evaluation.methods, app.config.output.checkpoint_path)


@cli.command("export-attention")
@common_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Trained checkpoint")
@click.option("--sample-id", required=True, help="Masked sample to explain")
@click.option("--query-frame", "query_frames", type=int, multiple=True, help="Query frame(s) to draw")
@click.option("--split", type=click.Choice(SPLITS), default=None, help="Split holding the sample")
@click.pass_context
@handle_errors
def export_attention(ctx, config_path, seed, out, data_root, checkpoint, sample_id, query_frames, split):
    """Export per-head attention panels of one sample."""
    app = build_cli(
        ctx, config_path, seed, out, data_root,
        output={"checkpoint": checkpoint}, inference={"split": split},
    )
    app.export_attention(
        app.config.output.checkpoint_path, sample_id, list(query_frames), app.config.inference.split
    )


def main():
    cli(obj={})


if __name__ == "__main__":
    main()
