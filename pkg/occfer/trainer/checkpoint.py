import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import torch

from occfer.api.errors import CheckpointCorruptedError, CheckpointVersionError
from occfer.models.descriptors import ArchitectureDescriptor
from occfer.models.network import FaceExpressionNet

CHECKPOINT_MAGIC = b"OCCFERCK"
CHECKPOINT_FORMAT_VERSION = 1

# magic | version (u32) | header length (u64) | sha256 of header + payload
_PREAMBLE = struct.Struct("<8sIQ32s")


@dataclass
class Checkpoint:
    """
    Everything needed to restore a trained model and to trace where it came from.

    Args:
        model_state: the model state dict (parameters and the channel-mean buffer).
        descriptor: the serialized `ArchitectureDescriptor`.
        preprocessing: the preprocessing constants (occlusion mode, flip, target size, channel means).
        provenance: the stage name and, for stage 2, the parent checkpoint name and hash.
        epoch: the number of completed epochs.
        history: one metrics dictionary per completed epoch.
        config_snapshot: the operative gin config of the run.
        format_version: the container format version.
    """

    model_state: Dict[str, torch.Tensor]
    descriptor: Dict[str, Any]
    preprocessing: Dict[str, Any] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)
    epoch: int = 0
    history: List[Dict[str, Any]] = field(default_factory=list)
    config_snapshot: str = ""
    format_version: int = CHECKPOINT_FORMAT_VERSION

    def build_model(self) -> FaceExpressionNet:
        model = FaceExpressionNet(ArchitectureDescriptor.from_dict(self.descriptor))
        model.load_state_dict(self.model_state)
        return model


def _tensor_to_bytes(tensor: torch.Tensor) -> bytes:
    flat = tensor.detach().cpu().contiguous().reshape(-1)
    if flat.numel() == 0:
        return b""
    return flat.view(torch.uint8).numpy().tobytes()


def _tensor_from_bytes(buffer: bytes, dtype_name: str, shape: List[int]) -> torch.Tensor:
    dtype = getattr(torch, dtype_name)
    if len(buffer) == 0:
        return torch.empty(shape, dtype=dtype)
    raw = torch.from_numpy(np.frombuffer(buffer, dtype=np.uint8).copy())
    return raw.view(dtype).reshape(shape)


def save_checkpoint(checkpoint: Checkpoint, path: str | Path):
    """
    Write the checkpoint as a self-describing container: a fixed preamble, a JSON header with the metadata and the
    tensor table, and the raw tensor bytes. Saving the same checkpoint twice gives identical files.
    """
    tensors, chunks, offset = [], [], 0
    for name, tensor in checkpoint.model_state.items():
        data = _tensor_to_bytes(tensor)
        tensors.append(
            {
                "name": name,
                "dtype": str(tensor.dtype).removeprefix("torch."),
                "shape": list(tensor.shape),
                "offset": offset,
                "nbytes": len(data),
            }
        )
        chunks.append(data)
        offset += len(data)
    header = {
        "tensors": tensors,
        "descriptor": checkpoint.descriptor,
        "preprocessing": checkpoint.preprocessing,
        "provenance": checkpoint.provenance,
        "epoch": checkpoint.epoch,
        "history": checkpoint.history,
        "config_snapshot": checkpoint.config_snapshot,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(chunks)
    digest = hashlib.sha256(header_bytes + payload).digest()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    with open(tmp_path, "wb") as f:
        f.write(
            _PREAMBLE.pack(CHECKPOINT_MAGIC, checkpoint.format_version, len(header_bytes), digest)
        )
        f.write(header_bytes)
        f.write(payload)
    tmp_path.replace(path)


def is_checkpoint_file(path: str | Path) -> bool:
    path = Path(path)
    if not path.is_file():
        return False
    with open(path, "rb") as f:
        return f.read(len(CHECKPOINT_MAGIC)) == CHECKPOINT_MAGIC


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Read a checkpoint written by `save_checkpoint`. Nothing is returned unless the whole file passes the checksum.

    Raises:
        CheckpointVersionError: the file was written with another format version.
        CheckpointCorruptedError: the file is truncated, not a checkpoint, or fails the checksum.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _PREAMBLE.size:
        raise CheckpointCorruptedError(f"{path}: file too short to be a checkpoint")
    magic, version, header_length, digest = _PREAMBLE.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointCorruptedError(f"{path}: not a checkpoint file")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version}, expected {CHECKPOINT_FORMAT_VERSION}"
        )
    body = blob[_PREAMBLE.size :]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointCorruptedError(f"{path}: checksum mismatch (truncated or modified file)")
    if header_length > len(body):
        raise CheckpointCorruptedError(f"{path}: header length exceeds file size")
    header = json.loads(body[:header_length].decode("utf-8"))
    payload = body[header_length:]
    model_state = {}
    for entry in header["tensors"]:
        start, end = entry["offset"], entry["offset"] + entry["nbytes"]
        if end > len(payload):
            raise CheckpointCorruptedError(f"{path}: tensor {entry['name']} exceeds the payload")
        model_state[entry["name"]] = _tensor_from_bytes(
            payload[start:end], entry["dtype"], entry["shape"]
        )
    return Checkpoint(
        model_state=model_state,
        descriptor=header["descriptor"],
        preprocessing=header["preprocessing"],
        provenance=header["provenance"],
        epoch=header["epoch"],
        history=header["history"],
        config_snapshot=header["config_snapshot"],
        format_version=version,
    )


def checkpoint_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
