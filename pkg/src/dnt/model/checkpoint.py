"""Binary checkpoint format.

Layout (all integers little-endian uint32)::

    b"DNT1"
    len(metadata) metadata            # canonical JSON of ModelConfig, UTF-8
    count                             # number of tensors that follow
    per tensor: len(name) name ndim dim_0 .. dim_{ndim-1} float32 payload

Tensors appear in declaration order: parameters, then batchnorm running
statistics.
"""

import struct

import numpy as np

from ..errors import DntError
from .config import ModelConfig
from .network import DntModel

MAGIC = b"DNT1"


class CheckpointError(DntError, OSError):
    pass


def _u32(v):
    return struct.pack("<I", v)


def dumps(model):
    meta = model.config.to_json().encode("utf-8")
    tensors = model.state_tensors()
    parts = [MAGIC, _u32(len(meta)), meta, _u32(len(tensors))]
    for t in tensors:
        name = t.name.encode("utf-8")
        parts += [_u32(len(name)), name, _u32(t.value.ndim)]
        parts += [_u32(d) for d in t.value.shape]
        parts.append(np.ascontiguousarray(t.value, dtype="<f4").tobytes())
    return b"".join(parts)


def save(model, path):
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def loads(data, source="<bytes>"):
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise CheckpointError(f"{source}: truncated checkpoint")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    def u32():
        return struct.unpack("<I", take(4))[0]

    if take(4) != MAGIC:
        raise CheckpointError(f"{source}: not a DNT1 checkpoint")
    config = ModelConfig.from_json(take(u32()).decode("utf-8"))
    model = DntModel(config)
    by_name = {t.name: t for t in model.state_tensors()}
    count = u32()
    if count != len(by_name):
        raise CheckpointError(f"{source}: {count} tensors, model expects {len(by_name)}")
    for _ in range(count):
        name = take(u32()).decode("utf-8")
        shape = tuple(u32() for _ in range(u32()))
        target = by_name.get(name)
        if target is None or target.value.shape != shape:
            raise CheckpointError(f"{source}: unexpected tensor {name} {shape}")
        payload = np.frombuffer(take(4 * int(np.prod(shape, dtype=np.int64))), dtype="<f4")
        target.value[...] = payload.reshape(shape)
    if pos != len(data):
        raise CheckpointError(f"{source}: {len(data) - pos} trailing bytes")
    return model


def load(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CheckpointError(f"{path}: cannot read checkpoint ({exc.strerror})") from None
    return loads(data, str(path))
