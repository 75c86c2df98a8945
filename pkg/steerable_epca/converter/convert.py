"""Model and ground-truth files in the binary container format."""

import json
import logging
import os

import numpy as np

from steerable_epca.basis.fourier_bessel import BasisParams, build_basis
from steerable_epca.classes.covariance import BlockCovariance, RecolorMatrices, RotInvMean
from steerable_epca.classes.errors import DataFormatError
from steerable_epca.classes.groundtruth import GroundTruthModel
from steerable_epca.classes.sepcamodel import SepcaModel
from steerable_epca.converter.lib.container import (
    ZLIB_TYPE,
    pack_container,
    read_index,
    unpack_container,
)
from steerable_epca.converter.lib.noindent import CustomEncoder, NoIndent
from steerable_epca.settings import VERSION

logger = logging.getLogger(__name__)

MODEL_KIND = "sepca-model"
TRUTH_KIND = "ground-truth"


def _params_meta(params: BasisParams) -> dict:
    return {
        "band_limit": float(params.band_limit),
        "support_radius": int(params.support_radius),
        "image_size": int(params.image_size),
    }


def _params_from_meta(meta: dict) -> BasisParams:
    try:
        return BasisParams(
            float(meta["band_limit"]),
            int(meta["support_radius"]),
            int(meta["image_size"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"invalid basis parameters in container: {e}") from e


def _check_blocks(basis, blocks: list, name: str):
    for k, block in enumerate(blocks):
        p_k = basis.p_k[k]
        if block.shape != (p_k, p_k):
            raise DataFormatError(
                f"{name} block k={k} has shape {block.shape}, basis expects {(p_k, p_k)}"
            )


def _read_blocks(arrays: dict, prefix: str, count: int) -> list:
    try:
        return [arrays[f"{prefix}/{k}"] for k in range(count)]
    except KeyError as e:
        raise DataFormatError(f"container lacks array {e}") from e


def _read_file(path: str) -> bytes:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"{path} does not exist")
    with open(path, "rb") as f:
        return f.read()


def _write_file(path: str, data: bytes):
    with open(path, "wb") as f:
        f.write(data)
    logger.info("Wrote %s (%s bytes)", path, len(data))


def encode_model(model: SepcaModel) -> bytes:
    """Mean, basis parameters, B/D and final covariance blocks, ranks."""
    arrays = {
        "mean/coeffs": model.mean.coeffs,
        "mean/node_profile": model.mean.node_profile,
        "mean/image": model.mean.image,
    }
    for k in model.basis.frequencies:
        arrays[f"recolor/b/{k}"] = model.recolor.b[k]
        arrays[f"recolor/d/{k}"] = model.recolor.d[k]
        arrays[f"covariance/{k}"] = model.covariance.blocks[k]
    for k, alpha in enumerate(model.alphas):
        arrays[f"alpha/{k}"] = np.asarray(alpha, dtype=float)
    meta = {
        "version": VERSION,
        "basis": _params_meta(model.basis.params),
        "k_max": model.basis.k_max,
        "p_k": list(model.basis.p_k),
        "ranks": list(model.covariance.ranks),
        "shrunken_ranks": list(model.shrunken_ranks),
        "gammas": [float(g) for g in model.covariance.gammas],
        "include_reflections": bool(model.include_reflections),
        "homogenized": bool(model.homogenized),
        "warnings": list(model.warnings),
        "n_alphas": len(model.alphas),
    }
    return pack_container(MODEL_KIND, arrays, meta)


def decode_model(data: bytes) -> SepcaModel:
    kind, arrays, meta = unpack_container(data)
    if kind != MODEL_KIND:
        raise DataFormatError(f"expected a {MODEL_KIND} container, found {kind!r}")
    basis = build_basis(_params_from_meta(meta.get("basis", {})))
    count = basis.k_max + 1
    if meta.get("k_max") != basis.k_max:
        raise DataFormatError(
            f"model was written for k_max={meta.get('k_max')}, basis rebuilds k_max={basis.k_max}"
        )
    b_blocks = _read_blocks(arrays, "recolor/b", count)
    d_blocks = _read_blocks(arrays, "recolor/d", count)
    cov_blocks = _read_blocks(arrays, "covariance", count)
    for name, blocks in (("B", b_blocks), ("D", d_blocks), ("covariance", cov_blocks)):
        _check_blocks(basis, blocks, name)
    try:
        mean = RotInvMean(
            coeffs=arrays["mean/coeffs"],
            node_profile=arrays["mean/node_profile"],
            image=arrays["mean/image"],
        )
        alphas = tuple(arrays[f"alpha/{k}"] for k in range(meta["n_alphas"]))
        covariance = BlockCovariance.from_blocks(cov_blocks, meta["gammas"], meta["ranks"])
        return SepcaModel(
            basis=basis,
            mean=mean,
            recolor=RecolorMatrices(b=tuple(b_blocks), d=tuple(d_blocks)),
            covariance=covariance,
            shrunken_ranks=tuple(meta["shrunken_ranks"]),
            alphas=alphas,
            include_reflections=meta["include_reflections"],
            homogenized=meta["homogenized"],
            warnings=tuple(meta["warnings"]),
        )
    except KeyError as e:
        raise DataFormatError(f"model container lacks {e}") from e


def save_model(model: SepcaModel, path: str):
    _write_file(path, encode_model(model))


def load_model(path: str) -> SepcaModel:
    model = decode_model(_read_file(path))
    logger.info(
        "Loaded model %s: R=%s c=%.4f ranks=%s",
        path,
        model.support_radius,
        model.band_limit,
        list(model.ranks),
    )
    return model


def encode_truth(model: GroundTruthModel) -> bytes:
    arrays = {"mean/coeffs": model.mean_coeffs}
    for k, block in enumerate(model.signal_cov_blocks):
        arrays[f"sigma/{k}"] = block
    meta = {
        "version": VERSION,
        "basis": _params_meta(model.basis.params),
        "k_max": model.basis.k_max,
        "intensity_scale": float(model.intensity_scale),
        "seed": int(model.seed),
        "clip_rate": float(model.clip_rate),
        "signal_ranks": list(model.signal_ranks),
    }
    return pack_container(TRUTH_KIND, arrays, meta)


def decode_truth(data: bytes) -> GroundTruthModel:
    kind, arrays, meta = unpack_container(data)
    if kind != TRUTH_KIND:
        raise DataFormatError(f"expected a {TRUTH_KIND} container, found {kind!r}")
    basis = build_basis(_params_from_meta(meta.get("basis", {})))
    blocks = _read_blocks(arrays, "sigma", basis.k_max + 1)
    _check_blocks(basis, blocks, "sigma")
    try:
        return GroundTruthModel(
            basis=basis,
            mean_coeffs=arrays["mean/coeffs"],
            signal_cov_blocks=tuple(blocks),
            intensity_scale=meta["intensity_scale"],
            seed=meta["seed"],
            clip_rate=meta["clip_rate"],
        )
    except KeyError as e:
        raise DataFormatError(f"ground-truth container lacks {e}") from e


def save_truth(model: GroundTruthModel, path: str):
    _write_file(path, encode_truth(model))


def load_truth(path: str) -> GroundTruthModel:
    return decode_truth(_read_file(path))


def inspect_container(path: str) -> dict:
    """Kind, metadata and array table of any container file."""
    index = read_index(_read_file(path))
    arrays = {
        name: {
            "dtype": entry["dtype"],
            "shape": NoIndent(entry["shape"]),
            "nbytes": entry["nbytes"],
        }
        for name, entry in sorted(
            index["arrays"].items(), key=lambda item: item[1]["offset"]
        )
    }
    meta = {
        key: NoIndent(value) if isinstance(value, list) else value
        for key, value in index["meta"].items()
    }
    return {
        "kind": index["kind"],
        "compressed": index["container_type"] == ZLIB_TYPE,
        "payload_len": index["payload_len"],
        "meta": meta,
        "arrays": arrays,
    }


def format_inspection(summary: dict) -> str:
    return json.dumps(summary, indent=2, cls=CustomEncoder)
