"""samplab: a sampling-bias laboratory.

Simulates a microblogging platform over a census-grounded synthetic
population, collects user samples with four country-sampling mechanisms
(plus random-id probing), runs the filtering / demographic-inference /
debiasing pipeline, and measures how well each sample estimates the true
population.
"""

from . import (census, debias, evaluate, geo, inference, metrics,
               preprocess, samplers, snowflake, tiler, worldgen)
from .pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "census", "debias", "evaluate", "geo", "inference", "metrics",
    "preprocess", "samplers", "snowflake", "tiler", "worldgen",
    "PipelineConfig", "run_pipeline", "__version__",
]
