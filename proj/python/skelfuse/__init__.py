"""Multi-sensor skeletal fusion toolkit.

Thin wrapper around the compiled extension: rigid-body math, depth
back-projection, skeleton-seeded ICP calibration, skeleton matching and
confidence-weighted merging, plus the simulate/calibrate/fuse/evaluate
pipeline commands.
"""

import json as _json

from skelfuse._core import *  # noqa: F401,F403
from skelfuse._core import evaluate_json as _evaluate_json


def evaluate(fused_jsonl, ground_truth_json, session_dir=None, config_file=None):
    """Score a fused stream against simulator ground truth.

    Returns the metrics report as a dict; pass session_dir to include
    per-sensor baselines.
    """
    return _json.loads(_evaluate_json(fused_jsonl, ground_truth_json, session_dir, config_file))
