from socialrec.evaluator.harness import (
    DEFAULT_K_SETTINGS,
    EvaluationReport,
    ReportRow,
    evaluate,
    evaluate_dataset,
)
from socialrec.evaluator.split import SplitResult, chronological_split
from socialrec.evaluator.synth import SyntheticConfig, generate_synthetic

__all__ = [
    "DEFAULT_K_SETTINGS",
    "EvaluationReport",
    "ReportRow",
    "SplitResult",
    "SyntheticConfig",
    "chronological_split",
    "evaluate",
    "evaluate_dataset",
    "generate_synthetic",
]
