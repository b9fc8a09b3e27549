"""Road detection under shadow, rain/snow and specular glare."""
from .config import PipelineConfig, load_config, parse_config, render_config
from .evaluate import EvalReport, batch_eval, compare_runs, confusion, rates
from .pipeline import PipelineResult, run_pipeline

__all__ = [
    "PipelineConfig", "load_config", "parse_config", "render_config",
    "EvalReport", "batch_eval", "compare_runs", "confusion", "rates",
    "PipelineResult", "run_pipeline",
]
