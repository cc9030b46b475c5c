"""Binary checkpoint format for network weights.

Layout::

    bytes 0-7     magic b"SEQFILL\\0"
    bytes 8-11    uint32 little-endian length N of the header
    bytes 12-     N bytes UTF-8 JSON header
    then          parameter blobs, float32 little-endian, row-major,
                  concatenated in header order

The header holds ``format_version``, ``config`` (the ModelConfig fields),
``parameters`` (name, shape, offset and nbytes relative to the first blob),
``sha256`` of the blob section and a free-form ``extra`` mapping.
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import torch

from core.exceptions import ChecksumError, HeaderError, MissingPayloadError, ShapeMismatchError

from .config import ModelConfig
from .network import TemporalAttentionUNet

logger = logging.getLogger(__name__)

MAGIC = b"SEQFILL\x00"
FORMAT_VERSION = 1
BLOB_DTYPE = np.dtype("<f4")


def save_checkpoint(
    model: TemporalAttentionUNet,
    path: Union[str, Path],
    extra: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    Write the model's weights and configuration.

    Args:
        model: Network to save
        path: Target file
        extra: JSON-serializable metadata (epoch, validation loss, ...)

    Returns:
        Path of the written checkpoint
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    table = []
    blobs = []
    offset = 0
    for name, tensor in model.state_dict().items():
        array = np.ascontiguousarray(tensor.detach().cpu().numpy(), dtype=BLOB_DTYPE)
        blob = array.tobytes()
        table.append({"name": name, "shape": list(array.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    data = b"".join(blobs)

    header = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "config": model.config.model_dump(),
            "parameters": table,
            "sha256": hashlib.sha256(data).hexdigest(),
            "extra": dict(extra or {}),
        },
        sort_keys=True,
    ).encode("utf-8")

    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(data)
    logger.info(f"Saved checkpoint with {len(table)} tensors to {path}")
    return path


def read_checkpoint_header(path: Union[str, Path]) -> Tuple[Dict[str, Any], bytes]:
    """
    Read and check a checkpoint file.

    Returns:
        Parsed header and the blob section

    Raises:
        MissingPayloadError: File absent
        HeaderError: Bad magic, truncated or unreadable header
        ChecksumError: Blob section differs from the recorded checksum
    """
    path = Path(path)
    if not path.is_file():
        raise MissingPayloadError(f"Checkpoint not found: {path}", {"path": str(path)})
    content = path.read_bytes()
    if content[: len(MAGIC)] != MAGIC:
        raise HeaderError(f"Not a checkpoint file: {path}", {"path": str(path)})
    start = len(MAGIC) + 4
    if len(content) < start:
        raise HeaderError(f"Truncated checkpoint header: {path}", {"path": str(path)})
    (header_length,) = struct.unpack("<I", content[len(MAGIC) : start])
    try:
        header = json.loads(content[start : start + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise HeaderError(f"Unreadable checkpoint header: {path}", {"error": e}) from e
    if header.get("format_version") != FORMAT_VERSION:
        raise HeaderError(
            f"Unsupported checkpoint format version {header.get('format_version')}",
            {"path": str(path)},
        )
    data = content[start + header_length :]
    if hashlib.sha256(data).hexdigest() != header.get("sha256"):
        raise ChecksumError(f"Checkpoint blobs fail the checksum: {path}", {"path": str(path)})
    return header, data


def load_checkpoint(
    path: Union[str, Path], device: Union[str, torch.device] = "cpu"
) -> Tuple[TemporalAttentionUNet, Dict[str, Any]]:
    """
    Rebuild a network from a checkpoint.

    Returns:
        The network (eval mode) and the ``extra`` mapping

    Raises:
        ShapeMismatchError: A blob disagrees with its declared shape or with
            the network built from the stored configuration
        HeaderError: A parameter holds non-finite values
    """
    header, data = read_checkpoint_header(path)
    config = ModelConfig(**header["config"])
    model = TemporalAttentionUNet(config)
    expected = model.state_dict()

    state: Dict[str, torch.Tensor] = {}
    for entry in header["parameters"]:
        name, shape = entry["name"], tuple(entry["shape"])
        blob = data[entry["offset"] : entry["offset"] + entry["nbytes"]]
        if len(blob) != int(np.prod(shape)) * BLOB_DTYPE.itemsize or len(blob) != entry["nbytes"]:
            raise ShapeMismatchError(f"Blob of {name} does not match shape {list(shape)}", {"path": str(path)})
        if name not in expected or tuple(expected[name].shape) != shape:
            raise ShapeMismatchError(f"Unexpected parameter {name} of shape {list(shape)}", {"path": str(path)})
        array = np.frombuffer(blob, dtype=BLOB_DTYPE).reshape(shape)
        if not np.all(np.isfinite(array)):
            raise HeaderError(f"Parameter {name} holds non-finite values", {"path": str(path)})
        state[name] = torch.from_numpy(array.astype(np.float32))

    missing = sorted(set(expected) - set(state))
    if missing:
        raise ShapeMismatchError(f"Checkpoint lacks parameters: {', '.join(missing)}", {"path": str(path)})
    model.load_state_dict(state)
    model.to(device)
    model.eval()
    return model, header.get("extra", {})


def checkpoint_id(path: Union[str, Path]) -> str:
    """Short content hash identifying a checkpoint in provenance records."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]
