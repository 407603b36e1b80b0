"""
Single-file binary checkpoint of a toy backbone.

Layout::

    b"ATVC" | version u32 LE | header_len u64 LE | header (UTF-8 JSON) | payload

The header holds the model config and a tensor table ``{name, shape, dtype,
offset}``. Offsets count bytes from the start of the payload; tensors are
little-endian float32, contiguous, in table order.
"""

import json
import struct
import numpy as np
from typing import Any, Dict, List, Tuple
from atvprune.errors import StorageError
from atvprune.model import ModelConfig, ToyTransformer, TransformerBlock, PRUNABLE_LAYERS

MAGIC = b"ATVC"
VERSION = 1
PREFIX = struct.Struct("<4sIQ")
DTYPE = "f32"
_LE_F32 = np.dtype("<f4")
BLOCK_TENSORS = PRUNABLE_LAYERS + ("norm1", "norm2")


def _tensor_names(config: ModelConfig) -> List[str]:
    return [f"blocks.{b}.{name}" for b in range(config.n_blocks) for name in BLOCK_TENSORS]


def _expected_shapes(config: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    d, f = config.d_model, config.d_ffn
    per_block = {
        "w_q": (d, d),
        "w_k": (d, d),
        "w_v": (d, d),
        "w_o": (d, d),
        "w_up": (f, d),
        "w_down": (d, f),
        "norm1": (d,),
        "norm2": (d,),
    }
    return {
        f"blocks.{b}.{name}": per_block[name]
        for b in range(config.n_blocks)
        for name in BLOCK_TENSORS
    }


def encode_checkpoint(model: ToyTransformer) -> bytes:
    """Serialize a model into checkpoint bytes."""
    table = []
    chunks = []
    offset = 0
    for b, block in enumerate(model.blocks):
        for name in BLOCK_TENSORS:
            data = np.ascontiguousarray(getattr(block, name), dtype=_LE_F32).tobytes()
            table.append(
                {
                    "name": f"blocks.{b}.{name}",
                    "shape": list(getattr(block, name).shape),
                    "dtype": DTYPE,
                    "offset": offset,
                }
            )
            chunks.append(data)
            offset += len(data)
    header = json.dumps(
        {"config": model.config.to_dict(), "tensors": table},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    return PREFIX.pack(MAGIC, VERSION, len(header)) + header + b"".join(chunks)


def decode_header(data: bytes) -> Tuple[Dict[str, Any], int]:
    """
    Parse and validate the prefix and header.

    Returns:
        Tuple of (header dict, byte index where the payload starts)

    Raises:
        StorageError: "bad-magic", "bad-version" or "bad-header"
    """
    if len(data) < PREFIX.size:
        raise StorageError("bad-magic", "file is shorter than the checkpoint prefix")
    magic, version, header_len = PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise StorageError("bad-magic", f"expected {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise StorageError("bad-version", f"unsupported checkpoint version {version}")
    start = PREFIX.size + header_len
    if start > len(data):
        raise StorageError("truncated-payload", "header runs past the end of the file")
    try:
        header = json.loads(data[PREFIX.size : start].decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
        tensors = header["tensors"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise StorageError("bad-header", f"unreadable header: {e}") from e

    shapes = _expected_shapes(config)
    if not isinstance(tensors, list) or not all(isinstance(entry, dict) for entry in tensors):
        raise StorageError("bad-header", "tensor table must be a list of objects")
    names = [entry.get("name") for entry in tensors]
    if names != _tensor_names(config):
        raise StorageError("bad-header", "tensor table does not match the model config")
    previous = -1
    for entry in tensors:
        name = entry["name"]
        if entry.get("dtype") != DTYPE:
            raise StorageError("bad-header", f"{name}: dtype must be {DTYPE!r}")
        shape = entry.get("shape")
        if (
            not isinstance(shape, list)
            or not all(type(dim) is int for dim in shape)
            or tuple(shape) != shapes[name]
        ):
            raise StorageError("bad-header", f"{name}: unexpected shape {shape}")
        offset = entry.get("offset")
        if isinstance(offset, bool) or not isinstance(offset, int) or offset <= previous:
            raise StorageError("bad-header", f"{name}: offsets must be strictly increasing")
        previous = offset
    return header, start


def decode_checkpoint(data: bytes) -> ToyTransformer:
    """
    Rebuild a model from checkpoint bytes.

    Raises:
        StorageError: On any format violation, including "truncated-payload"
            when a tensor extends past the end of the file
    """
    header, start = decode_header(data)
    config = ModelConfig.from_dict(header["config"])
    payload = memoryview(data)[start:]
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * _LE_F32.itemsize
        end = entry["offset"] + nbytes
        if end > len(payload):
            raise StorageError(
                "truncated-payload", f"{entry['name']} ends at byte {end}, payload has {len(payload)}"
            )
        array = np.frombuffer(payload[entry["offset"] : end], dtype=_LE_F32)
        array = array.astype(np.float32).reshape(shape)
        array.setflags(write=False)
        tensors[entry["name"]] = array

    blocks = [
        TransformerBlock(**{name: tensors[f"blocks.{b}.{name}"] for name in BLOCK_TENSORS})
        for b in range(config.n_blocks)
    ]
    return ToyTransformer(config, tuple(blocks))


def write_checkpoint(path: str, model: ToyTransformer) -> None:
    try:
        with open(path, "wb") as f:
            f.write(encode_checkpoint(model))
    except OSError as e:
        raise StorageError("io", f"cannot write {path}: {e}") from e


def read_checkpoint(path: str) -> ToyTransformer:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise StorageError("io", f"cannot read {path}: {e}") from e
    return decode_checkpoint(data)
