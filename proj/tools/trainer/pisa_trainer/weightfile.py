"""PISAW1 writer and reader. Layout matches include/pisa/io/weight_file.hpp."""
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"PISAW1\x00"
VERSION = 1
_HEADER = struct.Struct("<BHHBBBBBB")


class FormatError(ValueError):
    pass


@dataclass
class LayerSpec:
    kind: int  # 0 conv, 1 fc
    in_ch: int
    out_ch: int
    kh: int = 1
    kw: int = 1
    stride: int = 1
    pad: int = 0
    weight_bits: int = 1
    input_bits: int = 1
    codes: np.ndarray = field(default=None, repr=False)  # (out, in, kh, kw) unsigned codes
    bn_scale: np.ndarray = field(default=None, repr=False)
    bn_bias: np.ndarray = field(default=None, repr=False)

    @property
    def weight_count(self):
        return self.out_ch * self.in_ch * self.kh * self.kw


def binarize(w):
    """Weight code 1 for w >= 0, else 0 (level +1 / -1)."""
    return (np.asarray(w) >= 0).astype(np.int64)


def _pack_planes(codes, nbits):
    codes = np.asarray(codes, dtype=np.int64).reshape(-1)
    return b"".join(np.packbits((codes >> n) & 1, bitorder="little").tobytes() for n in range(nbits))


def serialize(layers):
    if not layers:
        raise FormatError("network has no layers")
    out = bytearray(MAGIC + bytes([VERSION]) + struct.pack("<I", len(layers)))
    for l in layers:
        out += _HEADER.pack(l.kind, l.in_ch, l.out_ch, l.kh, l.kw, l.stride, l.pad, l.weight_bits, l.input_bits)
    for l in layers:
        codes = np.asarray(l.codes, dtype=np.int64).reshape(-1)
        if codes.size != l.weight_count or codes.min() < 0 or codes.max() >= (1 << l.weight_bits):
            raise FormatError("layer codes do not match its header")
        out += _pack_planes(codes, l.weight_bits)
        out += np.asarray(l.bn_scale, "<f4").reshape(l.out_ch).tobytes()
        out += np.asarray(l.bn_bias, "<f4").reshape(l.out_ch).tobytes()
    return bytes(out)


def parse(data):
    if len(data) < 12 or data[:7] != MAGIC:
        raise FormatError("bad magic")
    if data[7] != VERSION:
        raise FormatError("unsupported version %d" % data[7])
    (count,) = struct.unpack_from("<I", data, 8)
    pos = 12
    layers = []
    for _ in range(count):
        if pos + _HEADER.size > len(data):
            raise FormatError("truncated layer header")
        layers.append(LayerSpec(*_HEADER.unpack_from(data, pos)))
        pos += _HEADER.size
    for l in layers:
        plane = (l.weight_count + 7) // 8
        need = plane * l.weight_bits + 8 * l.out_ch
        if pos + need > len(data):
            raise FormatError("truncated layer payload")
        codes = np.zeros(l.weight_count, dtype=np.int64)
        for n in range(l.weight_bits):
            raw = np.frombuffer(data, np.uint8, plane, pos)
            codes |= np.unpackbits(raw, bitorder="little")[: l.weight_count].astype(np.int64) << n
            pos += plane
        l.codes = codes.reshape(l.out_ch, l.in_ch, l.kh, l.kw)
        l.bn_scale = np.frombuffer(data, "<f4", l.out_ch, pos).copy()
        l.bn_bias = np.frombuffer(data, "<f4", l.out_ch, pos + 4 * l.out_ch).copy()
        pos += 8 * l.out_ch
    if pos != len(data):
        raise FormatError("trailing bytes")
    return layers


def save(path, layers):
    with open(path, "wb") as f:
        f.write(serialize(layers))


def load(path):
    with open(path, "rb") as f:
        return parse(f.read())
