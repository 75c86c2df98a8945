import json

import numpy as np
from numpy.testing import assert_array_equal

from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.helper.fileprocessing import blob_path, read_stack, write_stack


def test_round_trip(tmp_path, rng):
    stack = ImageStack(rng.poisson(1.5, size=(4, 8, 8)).astype(float), kind="counts")
    path = str(tmp_path / "nested" / "counts.stack")
    assert write_stack(stack, path)["success"]
    with open(path, encoding="utf-8") as f:
        header = json.load(f)
    assert header == {"n": 4, "L": 8, "dtype": "f64", "layout": "row-major", "kind": "counts"}
    result = read_stack(path)
    assert result["success"]
    assert result["stack"].kind == "counts"
    assert_array_equal(result["stack"].pixels, stack.pixels)


def test_sidecar_is_little_endian_row_major(tmp_path):
    pixels = np.arange(8, dtype=float).reshape(2, 2, 2)
    path = str(tmp_path / "tiny.stack")
    write_stack(ImageStack(pixels), path)
    with open(blob_path(path), "rb") as f:
        raw = f.read()
    assert_array_equal(np.frombuffer(raw, dtype="<f8"), np.arange(8))


def test_missing_files(tmp_path):
    path = str(tmp_path / "absent.stack")
    assert read_stack(path) == {"success": False, "message": "File not found"}
    with open(path, "w", encoding="utf-8") as f:
        f.write("{}")
    assert read_stack(path)["message"] == "Sidecar not found"


def test_size_mismatch(tmp_path):
    path = str(tmp_path / "short.stack")
    write_stack(ImageStack(np.zeros((3, 4, 4))), path)
    with open(blob_path(path), "r+b") as f:
        f.truncate(40)
    result = read_stack(path)
    assert not result["success"]
    assert "384" in result["message"]


def test_bad_dtype(tmp_path):
    path = str(tmp_path / "f32.stack")
    write_stack(ImageStack(np.zeros((1, 2, 2))), path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"n": 1, "L": 2, "dtype": "f32", "layout": "row-major", "kind": "counts"}, f)
    result = read_stack(path)
    assert not result["success"]
    assert result["message"] == "Unsupported dtype f32"


def test_negative_counts_are_rejected(tmp_path):
    path = str(tmp_path / "bad.stack")
    write_stack(ImageStack(-np.ones((1, 2, 2))), path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"n": 1, "L": 2, "dtype": "f64", "layout": "row-major", "kind": "counts"}, f)
    assert not read_stack(path)["success"]


def test_unreadable_header(tmp_path):
    path = str(tmp_path / "garbled.stack")
    write_stack(ImageStack(np.zeros((1, 2, 2))), path)
    with open(path, "w", encoding="utf-8") as f:
        f.write("not json")
    assert read_stack(path)["message"].startswith("Unreadable header")
