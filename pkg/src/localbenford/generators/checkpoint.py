"""Binary checkpoints of generator states.

Layout (little-endian)::

    magic    4s   b"LBCK"
    version  u16
    F        u16  fractional bits of the emitted values (128)
    base     u32
    hash     16s  digest of the canonical spec text
    index    u64  next index the restored state will emit
    err      24s  error bound, 192-bit unsigned
    count    u32  number of registers
    regs     count * 24s, each a 192-bit unsigned
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ..errors import InvalidInput
from ..fixed_frac import FRAC_BITS
from .specs import spec_hash

MAGIC = b"LBCK"
VERSION = 1
SNAPSHOT_EVERY = 1 << 20
_HEADER = struct.Struct("<4sHHI16sQ24sI")
_WORD = 24


@dataclass(frozen=True)
class Checkpoint:
    spec_hash: bytes
    base: int
    index: int
    err: int
    registers: tuple

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, FRAC_BITS, self.base, self.spec_hash, self.index,
                            self.err.to_bytes(_WORD, "little"), len(self.registers))
        return head + b"".join(r.to_bytes(_WORD, "little") for r in self.registers)

    @classmethod
    def from_bytes(cls, data: bytes) -> Checkpoint:
        if len(data) < _HEADER.size:
            raise InvalidInput("checkpoint file is truncated")
        magic, version, frac_bits, base, digest, index, err, count = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise InvalidInput("not a checkpoint file (bad magic)")
        if version != VERSION or frac_bits != FRAC_BITS:
            raise InvalidInput(f"unsupported checkpoint version {version} / F = {frac_bits}")
        body = data[_HEADER.size:]
        if len(body) != count * _WORD:
            raise InvalidInput("checkpoint register block has the wrong length")
        regs = tuple(int.from_bytes(body[i * _WORD:(i + 1) * _WORD], "little") for i in range(count))
        return cls(digest, base, index, int.from_bytes(err, "little"), regs)

    @classmethod
    def of(cls, state) -> Checkpoint:
        return cls(spec_hash(state.spec), state.base, state.index, state.err, tuple(state.registers()))

    def restore_into(self, state) -> None:
        if spec_hash(state.spec) != self.spec_hash or state.base != self.base:
            raise InvalidInput("checkpoint belongs to a different sequence or base")
        state.load_registers(list(self.registers), self.index, self.err)


def checkpoint_path(directory, spec, base: int, index: int) -> Path:
    return Path(directory) / f"{spec_hash(spec).hex()}_b{base}_{index:015d}.lbck"


def write_checkpoint(state, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = checkpoint_path(directory, state.spec, state.base, state.index)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    with os.fdopen(fd, "wb") as fh:
        fh.write(Checkpoint.of(state).to_bytes())
    os.replace(tmp, path)
    return path


def read_checkpoint(path) -> Checkpoint:
    return Checkpoint.from_bytes(Path(path).read_bytes())


def checkpoint_indices(directory, spec, base: int) -> dict:
    """``{index: path}`` of the snapshots stored for ``(spec, base)``."""
    directory = Path(directory)
    if not directory.is_dir():
        return {}
    prefix = f"{spec_hash(spec).hex()}_b{base}_"
    return {int(path.stem[len(prefix):]): path for path in directory.glob(prefix + "*.lbck")}


def latest_checkpoint(directory, spec, base: int, n0: int) -> Checkpoint | None:
    """Newest checkpoint for ``(spec, base)`` with index <= n0."""
    found = [i for i in checkpoint_indices(directory, spec, base) if i <= n0]
    if not found:
        return None
    return read_checkpoint(checkpoint_path(directory, spec, base, max(found)))


class CheckpointWriter:
    """Writes a snapshot whenever the state passes a multiple of ``every``."""

    def __init__(self, directory, every: int = SNAPSHOT_EVERY):
        self.directory = directory
        self.every = every

    def __call__(self, state) -> None:
        if self.directory is not None and (state.index - 1) % self.every == 0 and state.index > 1:
            write_checkpoint(state, self.directory)
