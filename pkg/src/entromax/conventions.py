"""Counting-convention flags and the pinned calibrated defaults.

Several published quantities depend on bookkeeping choices the formulas
alone do not fix: which convs belong to the signal path whose widths
enter entropy and effectiveness, whether batch-norm affine parameters
count, and how batch-norm figures in the FLOPs tally.  The pinned values
below are the unique-enough combination that reproduces the reference
table for all five catalog networks (see catalog.calibrate, and
docs/calibration.md for the sweep output); do not edit them casually.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from itertools import product


@dataclass(frozen=True)
class Conventions:
    # signal-path membership for entropy / effectiveness
    entropy_include_stem: bool = True
    entropy_include_shortcut: bool = False
    # per-stage entropy: cumulative prefix sum (False) or stage-local (True)
    stagewise_entropy: bool = False
    # batch-norm affine pairs in the parameter count
    params_include_bn: bool = True
    # ops charged per batch-norm output element in the FLOPs tally
    # (scale + shift = 2; conv MACs alone undercount the reference table)
    flops_bn_cost: int = 2

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


PINNED = Conventions()


def all_conventions() -> list[Conventions]:
    """Every flag combination the calibration sweep evaluates."""
    combos = []
    for stem, shortcut, stagewise, bn_params, bn_cost in product(
            (False, True), (False, True), (False, True), (False, True), (0, 1, 2)):
        combos.append(Conventions(
            entropy_include_stem=stem,
            entropy_include_shortcut=shortcut,
            stagewise_entropy=stagewise,
            params_include_bn=bn_params,
            flops_bn_cost=bn_cost,
        ))
    return combos


def with_flags(base: Conventions, **flags) -> Conventions:
    return replace(base, **flags)
