#!/usr/bin/env python3

"""
Checkpoint Service - Byte-stable single-file model archives

A checkpoint is an uncompressed zip archive with fixed timestamps holding:
  VERSION          format version tag
  config.json      the TrainConfig (sorted keys)
  manifest.json    per tensor: name, dtype, shape, offset and size in weights.bin
  weights.bin      raw little-endian tensor bytes in manifest order
  history.json     per-epoch training loss
  checksum.sha256  SHA-256 of every other entry
"""

import hashlib
import io
import json
import os
import zipfile
from collections import OrderedDict
from typing import Dict, List, Tuple

import numpy as np
import torch

from .exceptions import CheckpointIOError, CorruptCheckpointError, InvalidConfigError, OutputError, VersionMismatchError
from .logger import Logger
from .models.train_models import Checkpoint, TrainConfig
from .report_service import atomic_path

log = Logger('checkpoint')


FORMAT_VERSION = 1

VERSION_ENTRY = 'VERSION'
CONFIG_ENTRY = 'config.json'
MANIFEST_ENTRY = 'manifest.json'
WEIGHTS_ENTRY = 'weights.bin'
HISTORY_ENTRY = 'history.json'
CHECKSUM_ENTRY = 'checksum.sha256'

PAYLOAD_ENTRIES = (VERSION_ENTRY, CONFIG_ENTRY, MANIFEST_ENTRY, WEIGHTS_ENTRY, HISTORY_ENTRY)

_FIXED_DATE = (1980, 1, 1, 0, 0, 0)


def _json_bytes(data) -> bytes:
    return (json.dumps(data, sort_keys=True, indent=2) + '\n').encode('utf-8')


def _pack_weights(weights: Dict[str, torch.Tensor]) -> Tuple[List[dict], bytes]:
    manifest = []
    buffer = io.BytesIO()
    for name, tensor in weights.items():
        array = tensor.detach().cpu().contiguous().numpy()
        array = array.astype(array.dtype.newbyteorder('<'), copy=False)
        raw = array.tobytes(order='C')
        manifest.append({
            'name': name,
            'dtype': array.dtype.str,
            'shape': list(array.shape),
            'offset': buffer.tell(),
            'nbytes': len(raw),
        })
        buffer.write(raw)
    return manifest, buffer.getvalue()


def _unpack_weights(manifest: List[dict], blob: bytes) -> Dict[str, torch.Tensor]:
    weights = OrderedDict()
    for entry in manifest:
        start, size = int(entry['offset']), int(entry['nbytes'])
        if start < 0 or start + size > len(blob):
            raise CorruptCheckpointError(f"Tensor {entry['name']} lies outside the weights blob")
        dtype = np.dtype(entry['dtype'])
        array = np.frombuffer(blob[start:start + size], dtype=dtype).reshape(entry['shape'])
        weights[entry['name']] = torch.from_numpy(array.astype(dtype.newbyteorder('='), copy=True))
    return weights


def _checksums(entries: Dict[str, bytes]) -> bytes:
    lines = [f"{hashlib.sha256(entries[name]).hexdigest()}  {name}\n" for name in PAYLOAD_ENTRIES]
    return ''.join(lines).encode('utf-8')


def checkpoint_bytes(ckpt: Checkpoint) -> bytes:
    """Serialize a checkpoint to the archive bytes save_checkpoint writes"""
    manifest, blob = _pack_weights(ckpt.weights)
    entries = {
        VERSION_ENTRY: f"{ckpt.format_version}\n".encode('utf-8'),
        CONFIG_ENTRY: _json_bytes(ckpt.config.to_dict()),
        MANIFEST_ENTRY: _json_bytes(manifest),
        WEIGHTS_ENTRY: blob,
        HISTORY_ENTRY: _json_bytes([float(v) for v in ckpt.history]),
    }
    entries[CHECKSUM_ENTRY] = _checksums(entries)

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, 'w', compression=zipfile.ZIP_STORED) as archive:
        for name in PAYLOAD_ENTRIES + (CHECKSUM_ENTRY,):
            info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
            info.compress_type = zipfile.ZIP_STORED
            info.external_attr = 0o644 << 16
            archive.writestr(info, entries[name])
    return buffer.getvalue()


def save_checkpoint(ckpt: Checkpoint, path: str):
    """
    Write a checkpoint atomically.

    Raises:
        CheckpointIOError: the file cannot be written
    """
    data = checkpoint_bytes(ckpt)
    try:
        with atomic_path(path) as temp_path:
            with open(temp_path, 'wb') as f:
                f.write(data)
    except OutputError as e:
        raise CheckpointIOError(f"Cannot write checkpoint {path}: {e}") from e
    log.log_info(f"Saved checkpoint {path} ({len(data)} bytes, {len(ckpt.history)} epochs)")


def load_checkpoint(path: str) -> Checkpoint:
    """
    Read and verify a checkpoint.

    Raises:
        CheckpointIOError: the file does not exist or cannot be read
        VersionMismatchError: the archive has a different format version
        CorruptCheckpointError: truncated archive, missing entry or checksum mismatch
    """
    if not os.path.isfile(path):
        raise CheckpointIOError(f"Checkpoint not found: {path}")
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise CheckpointIOError(f"Cannot read checkpoint {path}: {e}") from e

    try:
        with zipfile.ZipFile(io.BytesIO(data)) as archive:
            names = set(archive.namelist())
            if VERSION_ENTRY not in names:
                raise CorruptCheckpointError(f"Checkpoint {path} has no {VERSION_ENTRY} entry")
            version_text = archive.read(VERSION_ENTRY).decode('utf-8').strip()
            try:
                version = int(version_text)
            except ValueError as e:
                raise CorruptCheckpointError(f"Checkpoint {path} has an unreadable version '{version_text}'") from e
            if version != FORMAT_VERSION:
                raise VersionMismatchError(
                    f"Checkpoint {path} has format version {version}, this build reads version {FORMAT_VERSION}"
                )
            missing = [n for n in PAYLOAD_ENTRIES + (CHECKSUM_ENTRY,) if n not in names]
            if missing:
                raise CorruptCheckpointError(f"Checkpoint {path} lacks entries {missing}")
            entries = {name: archive.read(name) for name in PAYLOAD_ENTRIES + (CHECKSUM_ENTRY,)}
    except (zipfile.BadZipFile, EOFError, ValueError) as e:
        raise CorruptCheckpointError(f"Checkpoint {path} is not a readable archive: {e}") from e

    if _checksums(entries) != entries[CHECKSUM_ENTRY]:
        raise CorruptCheckpointError(f"Checkpoint {path} failed checksum verification")

    try:
        config = TrainConfig.from_dict(json.loads(entries[CONFIG_ENTRY]))
        manifest = json.loads(entries[MANIFEST_ENTRY])
        history = [float(v) for v in json.loads(entries[HISTORY_ENTRY])]
    except (json.JSONDecodeError, InvalidConfigError, TypeError, KeyError) as e:
        raise CorruptCheckpointError(f"Checkpoint {path} has unreadable metadata: {e}") from e
    weights = _unpack_weights(manifest, entries[WEIGHTS_ENTRY])

    log.log_debug(f"Loaded checkpoint {path}: {config.tag}, {len(weights)} tensors")
    return Checkpoint(weights=weights, config=config, history=history, format_version=version)
