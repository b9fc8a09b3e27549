"""End-to-end road detection: filters, SVM segmentation, morphology."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .errors import RoadDetectError, PipelineError
from .morphology import connected_components, fill_holes, largest_component
from .netpbm import write_pgm, write_ppm
from .rain import remove_rain_snow
from .raster import as_rgb
from .shadow import remove_shadow
from .specular import suppress_highlights
from .svm import SvmModel, classify, sample_seeds, train_svm


@dataclass
class PipelineResult:
    road_mask: np.ndarray
    model: SvmModel
    intermediates: dict = field(default_factory=dict)


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except RoadDetectError as exc:
        raise PipelineError(name, exc) from exc


def apply_filters(img, cfg: PipelineConfig, intermediates: dict | None = None) -> np.ndarray:
    """Run the enabled filters in configured order."""
    out = as_rgb(img)
    keep = intermediates if intermediates is not None else {}
    for name in cfg.enabled_filters():
        if name == "shadow":
            out, mask = _stage(name, remove_shadow, out, cfg.buffer_width)
            keep["shadow_mask"] = mask
        elif name == "rainsnow":
            out = _stage(name, remove_rain_snow, out, cfg.guided)
        else:
            out, mask = _stage(name, suppress_highlights, out, cfg.specular_params)
            keep["highlight_mask"] = mask
        keep[f"post_{name}"] = out
    return out


def train_model(img, cfg: PipelineConfig) -> SvmModel:
    """Fit the classifier on seed pixels of the (already filtered) image."""
    seeds = _stage("seeds", sample_seeds, img, cfg.layout)
    return _stage("svm", train_svm, seeds, cfg.svm_C, cfg.svm_tol)


def run_pipeline(img, cfg: PipelineConfig = PipelineConfig(), model: SvmModel | None = None) -> PipelineResult:
    """Filter, classify and post-process one frame.

    Without ``model`` the classifier is trained on seeds from this frame.
    """
    inter = {}
    filtered = apply_filters(img, cfg, inter)
    if model is None:
        model = train_model(filtered, cfg)
    raw = _stage("classify", classify, model, filtered)
    inter["svm_mask"] = raw
    labels = _stage("morphology", connected_components, raw, 8)
    road = _stage("morphology", fill_holes, largest_component(labels))
    inter["final_mask"] = road
    return PipelineResult(road, model, inter)


def dump_intermediates(result: PipelineResult, directory, stem: str) -> list:
    """Write every intermediate as netpbm (``.ppm`` images, ``.pgm`` masks)."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, arr in result.intermediates.items():
        if arr.ndim == 3:
            path = out_dir / f"{stem}.{name}.ppm"
            write_ppm(path, arr)
        else:
            path = out_dir / f"{stem}.{name}.pgm"
            write_pgm(path, arr)
        written.append(path)
    return written
