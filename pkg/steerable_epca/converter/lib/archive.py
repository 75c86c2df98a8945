import io
import struct

import numpy as np

from steerable_epca.classes.errors import DataFormatError

# Array payloads are always stored little-endian.
DTYPES = {
    "f64": np.dtype("<f8"),
    "c128": np.dtype("<c16"),
    "i64": np.dtype("<i8"),
}


def dtype_name(array: np.ndarray) -> str:
    if np.iscomplexobj(array):
        return "c128"
    if np.issubdtype(array.dtype, np.integer) or array.dtype == np.bool_:
        return "i64"
    return "f64"


class ArchiveReader:
    data: io.BytesIO
    size: int

    def __init__(self, data: bytes):
        self.data = io.BytesIO(data)
        self.size = len(data)

    def __enter__(self):
        self.data.seek(0)
        return self

    def __exit__(self, type, value, traceback):
        self.data.close()

    def tell(self) -> int:
        return self.data.tell()

    def read(self, size: int) -> bytes:
        b = self.data.read(size)
        if len(b) != size:
            raise DataFormatError(
                f"could not read {size} bytes at offset {self.data.tell() - len(b)}"
            )
        return b

    def read_to_end(self) -> bytes:
        return self.data.read(self.size - self.data.tell())

    def byte(self) -> int:
        return struct.unpack("<B", self.read(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.read(8))[0]

    def array(self, dtype: str, shape: tuple, nbytes: int) -> np.ndarray:
        if dtype not in DTYPES:
            raise DataFormatError(f"unknown array dtype {dtype!r}")
        expected = int(np.prod(shape, dtype=np.int64)) * DTYPES[dtype].itemsize
        if expected != nbytes:
            raise DataFormatError(
                f"array of shape {tuple(shape)} and dtype {dtype} needs {expected} bytes, index says {nbytes}"
            )
        raw = self.read(nbytes)
        return np.frombuffer(raw, dtype=DTYPES[dtype]).reshape(shape).copy()


class ArchiveWriter:
    data: io.BytesIO

    def __init__(self):
        self.data = io.BytesIO()

    def __enter__(self):
        return self

    def __exit__(self, type, value, traceback):
        self.data.close()

    def bytes(self) -> bytes:
        pos = self.data.tell()
        self.data.seek(0)
        b = self.data.read()
        self.data.seek(pos)
        return b

    def tell(self) -> int:
        return self.data.tell()

    def write(self, data: bytes):
        self.data.write(data)

    def byte(self, b: int):
        self.data.write(struct.pack("<B", b))

    def u32(self, i: int):
        self.data.write(struct.pack("<I", i))

    def u64(self, i: int):
        self.data.write(struct.pack("<Q", i))

    def array(self, array: np.ndarray) -> dict:
        """Append an array payload and return its index entry."""
        name = dtype_name(array)
        payload = np.ascontiguousarray(array, dtype=DTYPES[name]).tobytes()
        entry = {
            "dtype": name,
            "shape": list(np.shape(array)),
            "offset": self.data.tell(),
            "nbytes": len(payload),
        }
        self.data.write(payload)
        return entry
