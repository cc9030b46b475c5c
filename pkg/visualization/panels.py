"""Static figures: attention panels, reconstruction strips and method comparisons."""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import torch  # noqa: E402

from models.skips import upsample_attention  # noqa: E402

logger = logging.getLogger(__name__)

ATTENTION_CMAP = "inferno"
DISPLAY_BANDS = (2, 1, 0)


def upsampled_attention(attention: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    """Bilinearly upsample a (G, T, T, h, w) attention volume to (G, T, T, H, W)."""
    volume = torch.from_numpy(np.ascontiguousarray(attention, dtype=np.float32))[None]
    return upsample_attention(volume, size)[0].numpy()


def attention_panels(
    attention: np.ndarray,
    size: Tuple[int, int],
    out_dir: Union[str, Path],
    prefix: str = "attention",
    query_frames: Optional[Sequence[int]] = None,
    days: Optional[Sequence[int]] = None,
) -> List[Path]:
    """
    Write one panel per attention head.

    Rows are query frames and columns key frames; every cell shows the
    upsampled mask with a fixed black-to-yellow color scale on [0, 1].

    Args:
        attention: (G, T, T, h, w) attention of one sequence
        size: Output resolution (H, W)
        out_dir: Target directory
        prefix: File name prefix
        query_frames: Rows to draw; all frames by default
        days: Acquisition days used as axis labels

    Returns:
        Paths of the written PNG files, one per head
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    masks = upsampled_attention(attention, size)
    heads, length = masks.shape[0], masks.shape[1]
    rows = list(range(length)) if query_frames is None else [int(q) for q in query_frames]
    labels = [str(d) for d in days] if days is not None else [str(t) for t in range(length)]
    # padded windows carry more frames than acquisitions
    labels += ["pad"] * (length - len(labels))

    paths = []
    for head in range(heads):
        fig, axes = plt.subplots(
            len(rows), length, figsize=(1.2 * length, 1.2 * len(rows)), squeeze=False
        )
        for r, query in enumerate(rows):
            for key in range(length):
                ax = axes[r, key]
                ax.imshow(masks[head, query, key], cmap=ATTENTION_CMAP, vmin=0.0, vmax=1.0)
                ax.set_xticks([])
                ax.set_yticks([])
                if r == 0:
                    ax.set_title(labels[key], fontsize=7)
                if key == 0:
                    ax.set_ylabel(labels[query], fontsize=7)
        fig.suptitle(f"Head {head}")
        fig.tight_layout()
        path = out_dir / f"{prefix}_head{head}.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        paths.append(path)
    logger.debug(f"Wrote {len(paths)} attention panel(s) to {out_dir}")
    return paths


def _display(images: np.ndarray) -> np.ndarray:
    """(C, H, W) reflectance to an (H, W, 3) or (H, W) displayable image."""
    if images.shape[0] >= 3:
        return np.clip(np.moveaxis(images[list(DISPLAY_BANDS)], 0, -1), 0.0, 1.0)
    return np.clip(images[0], 0.0, 1.0)


def sequence_strip(
    rows: Sequence[Tuple[str, np.ndarray]],
    path: Union[str, Path],
    days: Optional[Sequence[int]] = None,
) -> Path:
    """
    Plot aligned sequences (input, imputation, reference, ...) as rows of frames.

    Args:
        rows: (title, (T, C, H, W) volume) pairs
        path: PNG file to write
        days: Column labels
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    length = rows[0][1].shape[0]
    fig, axes = plt.subplots(len(rows), length, figsize=(1.4 * length, 1.5 * len(rows)), squeeze=False)
    for r, (title, volume) in enumerate(rows):
        for t in range(length):
            ax = axes[r, t]
            ax.imshow(_display(volume[t]), cmap="gray", vmin=0.0, vmax=1.0)
            ax.set_xticks([])
            ax.set_yticks([])
            if t == 0:
                ax.set_ylabel(title, fontsize=8)
            if r == 0 and days is not None:
                ax.set_title(str(days[t]), fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def comparison_chart(
    summary: pd.DataFrame, path: Union[str, Path], metric: str = "mae"
) -> Path:
    """Bar chart of one summary metric per method, grouped by split."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = summary.pivot_table(index="method", columns="split", values=metric, sort=False)
    fig, ax = plt.subplots(figsize=(6, 4))
    table.plot.bar(ax=ax, rot=0)
    ax.set_ylabel(metric.upper())
    ax.set_xlabel("")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
