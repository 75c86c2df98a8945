"""File processing helper functions"""

import json
import logging
import os

import numpy as np

from steerable_epca.classes.errors import InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.settings import STACK_BLOB_SUFFIX

STACK_DTYPE = "f64"
STACK_LAYOUT = "row-major"
HEADER_KEYS = ("n", "L", "dtype", "layout", "kind")


def blob_path(header_path):
    """Sidecar holding the little-endian pixel payload of a stack header"""
    return header_path + STACK_BLOB_SUFFIX


def write_stack(stack: ImageStack, header_path):
    """Write a JSON header and its binary sidecar"""
    result = {}
    destination = os.path.dirname(os.path.abspath(header_path))
    if not os.path.exists(destination):
        os.makedirs(destination)
        logging.info("Created directory %s", destination)

    header = {
        "n": stack.n,
        "L": stack.image_size,
        "dtype": STACK_DTYPE,
        "layout": STACK_LAYOUT,
        "kind": stack.kind,
    }
    try:
        with open(blob_path(header_path), "wb") as f:
            f.write(np.ascontiguousarray(stack.pixels, dtype="<f8").tobytes())
        with open(header_path, "w", encoding="utf-8") as f:
            json.dump(header, f, sort_keys=True)
            f.write("\n")
        result["success"] = True
        result["message"] = f"Wrote {stack.n} images of side {stack.image_size}"
        logging.info("Wrote %s (%s images, kind %s)", header_path, stack.n, stack.kind)
    except OSError as e:
        result["success"] = False
        result["message"] = str(e)
        logging.error("Error writing stack %s: %s", header_path, e)
    return result


def _check_header(header) -> str:
    """Empty string when the header is valid, the reason otherwise"""
    if not isinstance(header, dict):
        return "Header is not a JSON object"
    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        return f"Header lacks {', '.join(missing)}"
    if header["dtype"] != STACK_DTYPE:
        return f"Unsupported dtype {header['dtype']}"
    if header["layout"] != STACK_LAYOUT:
        return f"Unsupported layout {header['layout']}"
    for key in ("n", "L"):
        if not isinstance(header[key], int) or header[key] < 0:
            return f"Header field {key} must be a non-negative integer"
    return ""


def read_stack(header_path):
    """Read a JSON header and its binary sidecar into an ImageStack"""
    result = {}
    if not os.path.isfile(header_path):
        result["success"] = False
        result["message"] = "File not found"
        logging.error("File not found %s", header_path)
        return result
    if not os.path.isfile(blob_path(header_path)):
        result["success"] = False
        result["message"] = "Sidecar not found"
        logging.error("Sidecar not found %s", blob_path(header_path))
        return result

    logging.info("Found %s, reading...", header_path)
    try:
        with open(header_path, "r", encoding="utf-8") as f:
            header = json.load(f)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        result["success"] = False
        result["message"] = f"Unreadable header: {e}"
        logging.error("Error reading header %s", header_path)
        return result

    problem = _check_header(header)
    if problem:
        result["success"] = False
        result["message"] = problem
        logging.error("Invalid header %s: %s", header_path, problem)
        return result

    n = header["n"]
    side = header["L"]
    expected = n * side * side * 8
    size = os.path.getsize(blob_path(header_path))
    if size != expected:
        result["success"] = False
        result["message"] = f"Sidecar holds {size} bytes, header needs {expected}"
        logging.error("Size mismatch in %s", blob_path(header_path))
        return result

    try:
        pixels = np.fromfile(blob_path(header_path), dtype="<f8").reshape(n, side, side)
        result["stack"] = ImageStack(pixels.astype(float), kind=header["kind"])
    except (OSError, InvalidArgumentError) as e:
        result["success"] = False
        result["message"] = str(e)
        logging.error("Error reading stack %s: %s", header_path, e)
        return result
    result["success"] = True
    result["message"] = f"Read {n} images of side {side}"
    logging.info("Read %s images of side %s", n, side)
    return result
