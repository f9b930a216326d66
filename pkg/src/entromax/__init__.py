"""Maximum-entropy CNN architecture design toolkit.

Solves a constrained mathematical program over stage widths and depths
(maximize weighted multi-scale entropy minus a depth-uniformity penalty,
subject to effectiveness, FLOPs, parameter and width-monotonicity
constraints) and ships the analyzers, reference catalog and statistical
verification harness that pin every counting convention.
"""

__version__ = "0.1.0"

from .blocks import BlockKind
from .conventions import PINNED, Conventions
from .metrics import (
    MetricReport,
    average_width,
    cnn_entropy,
    count_flops,
    count_params,
    depth_uniformity_penalty,
    effectiveness,
    metric_report,
    mlp_entropy,
    monotone_width_check,
    projected_width,
    weighted_entropy,
)
from .model import (
    LayerDescriptor,
    NetworkSpec,
    StageSpec,
    StemSpec,
    ValidationError,
    Violation,
    expand,
    validate,
)

__all__ = [
    "__version__",
    "BlockKind",
    "Conventions",
    "PINNED",
    "MetricReport",
    "NetworkSpec",
    "StageSpec",
    "StemSpec",
    "LayerDescriptor",
    "ValidationError",
    "Violation",
    "expand",
    "validate",
    "projected_width",
    "mlp_entropy",
    "cnn_entropy",
    "average_width",
    "effectiveness",
    "depth_uniformity_penalty",
    "weighted_entropy",
    "count_params",
    "count_flops",
    "monotone_width_check",
    "metric_report",
]
