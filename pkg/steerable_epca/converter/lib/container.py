"""Binary container: magic, type byte, JSON index, then array payloads.

Layout (all integers little-endian)::

    magic        3 bytes   b"SEP"
    type         1 byte    0x30 raw payload, 0x31 zlib payload
    index_len    u32       length of the UTF-8 JSON index
    payload_len  u64       uncompressed payload length
    stored_len   u64       payload length as stored
    index        index_len bytes
    payload      stored_len bytes

The index is ``{"kind": str, "meta": {...}, "arrays": {name: {dtype,
shape, offset, nbytes}}}`` with offsets into the uncompressed payload.
"""

import json
import zlib

from steerable_epca.classes.errors import DataFormatError
from steerable_epca.converter.lib.archive import ArchiveReader, ArchiveWriter
from steerable_epca.converter.lib.noindent import to_builtin

MAGIC_BYTES = b"SEP"
RAW_TYPE = 0x30
ZLIB_TYPE = 0x31
HEADER_SIZE = 3 + 1 + 4 + 8 + 8


def pack_container(kind: str, arrays: dict, meta: dict, compress: bool = True) -> bytes:
    with ArchiveWriter() as payload:
        entries = {name: payload.array(array) for name, array in arrays.items()}
        raw = payload.bytes()
    index = json.dumps(
        {"kind": kind, "meta": meta, "arrays": entries},
        sort_keys=True,
        separators=(",", ":"),
        default=to_builtin,
    ).encode("utf-8")
    stored = zlib.compress(raw) if compress else raw

    with ArchiveWriter() as writer:
        writer.write(MAGIC_BYTES)
        writer.byte(ZLIB_TYPE if compress else RAW_TYPE)
        writer.u32(len(index))
        writer.u64(len(raw))
        writer.u64(len(stored))
        writer.write(index)
        writer.write(stored)
        return writer.bytes()


def _read_header(reader: ArchiveReader) -> tuple:
    if reader.size < HEADER_SIZE:
        raise DataFormatError(f"container too short: {reader.size} bytes")
    magic_bytes = reader.read(3)
    if magic_bytes != MAGIC_BYTES:
        raise DataFormatError(
            f"not a steerable ePCA container, found {magic_bytes} instead of {MAGIC_BYTES}"
        )
    container_type = reader.byte()
    if container_type not in [RAW_TYPE, ZLIB_TYPE]:
        raise DataFormatError(f"unknown container type: {container_type:#x}")
    index_len = reader.u32()
    payload_len = reader.u64()
    stored_len = reader.u64()
    try:
        index = json.loads(reader.read(index_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"unreadable container index: {e}") from e
    if not isinstance(index, dict) or not {"kind", "meta", "arrays"} <= set(index):
        raise DataFormatError("container index lacks kind, meta or arrays")
    return container_type, index, payload_len, stored_len


def read_index(data: bytes) -> dict:
    """The JSON index of a container, payload untouched."""
    with ArchiveReader(data) as reader:
        container_type, index, payload_len, stored_len = _read_header(reader)
    index["container_type"] = container_type
    index["payload_len"] = payload_len
    index["stored_len"] = stored_len
    return index


def unpack_container(data: bytes) -> tuple:
    """(kind, arrays, meta) of a packed container."""
    with ArchiveReader(data) as reader:
        container_type, index, payload_len, stored_len = _read_header(reader)
        stored = reader.read_to_end()
    # Check if the stored length is correct
    if stored_len != len(stored):
        raise DataFormatError(f"incorrect stored length: {stored_len}")
    if container_type == ZLIB_TYPE:
        try:
            raw = zlib.decompress(stored)
        except zlib.error as e:
            raise DataFormatError(f"corrupt container payload: {e}") from e
    else:
        raw = stored
    # Check if the uncompressed length is correct
    if payload_len != len(raw):
        raise DataFormatError(f"incorrect payload length: {payload_len}")

    arrays = {}
    try:
        entries = sorted(index["arrays"].items(), key=lambda item: item[1]["offset"])
        with ArchiveReader(raw) as reader:
            for name, entry in entries:
                if reader.tell() != entry["offset"]:
                    raise DataFormatError(
                        f"array {name!r} expected at offset {entry['offset']}, reader at {reader.tell()}"
                    )
                arrays[name] = reader.array(
                    entry["dtype"], tuple(entry["shape"]), entry["nbytes"]
                )
    except (KeyError, TypeError, AttributeError) as e:
        raise DataFormatError(f"malformed array entry in container index: {e}") from e
    return index["kind"], arrays, index["meta"]
