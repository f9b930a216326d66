"""Shared fixtures and the randomized tiny-instance generator.

Tiny instances keep the lattice small enough for exhaustive enumeration
so the solver can be checked against the brute-force oracle exactly.
Budgets are drawn between the costs of the cheapest and the most
expensive corner so they actually bind on a fair share of instances.
"""

import dataclasses

import numpy as np
import pytest

from entromax.blocks import BlockKind
from entromax.model import StemSpec
from entromax.solver import Candidate, ProblemSpec, evaluate


def tiny_problem(seed: int, family: int = 0) -> ProblemSpec:
    """Family 0: 2-3 stages, small axes.  Family 1: 2 stages, lattice
    up to roughly 1e4, mixed plain and residual blocks."""
    rng = np.random.default_rng([family, seed])
    g = 8
    if family == 0:
        m = int(rng.integers(2, 4))
        width_bounds = []
        for _ in range(m):
            lo = int(rng.integers(1, 3)) * g
            width_bounds.append((lo, lo + (int(rng.integers(2, 5)) - 1) * g))
        depth_bounds = [(1, int(rng.integers(2, 4))) for _ in range(m)]
        sched = tuple(bool(rng.integers(0, 2)) if i else False for i in range(m))
        block = BlockKind.plain()
    else:
        m = 2
        width_bounds = []
        for _ in range(m):
            lo = int(rng.integers(1, 3)) * g
            width_bounds.append((lo, lo + (int(rng.integers(6, 11)) - 1) * g))
        depth_bounds = [(1, int(rng.integers(4, 9))) for _ in range(m)]
        sched = (False, True)
        block = BlockKind.resnet_basic() if rng.uniform() < 0.4 else BlockKind.plain()

    prob = ProblemSpec(
        block=block,
        stages=m,
        alphas=tuple(float(rng.uniform(0.5, 4)) for _ in range(m)),
        rho0=1.0,
        max_flops=10 ** 14,
        max_params=10 ** 12,
        input_resolution=32,
        downsample_schedule=sched,
        width_bounds=tuple(width_bounds),
        depth_bounds=tuple(depth_bounds),
        beta=float(rng.choice([0.0, 10.0])),
        width_granularity=g,
        num_classes=10,
        stem=StemSpec(channels=8, kernel=3, stride=2, pool=False),
    )

    # corner costs bracket the lattice; draw budgets inside the bracket
    lo_w = list(b[0] for b in prob.width_bounds)
    for i in range(1, m):
        lo_w[i] = max(lo_w[i], lo_w[i - 1])
    lo_c = Candidate(tuple(lo_w), tuple(b[0] for b in prob.depth_bounds))
    hi_c = Candidate(
        tuple(min(b[1] for b in prob.width_bounds[i:]) for i in range(m)),
        tuple(b[1] for b in prob.depth_bounds))
    e_lo, e_hi = evaluate(lo_c, prob), evaluate(hi_c, prob)
    u1, u2, u3 = rng.uniform(), rng.uniform(), rng.uniform()
    max_params = (int(e_lo.params + u1 * (e_hi.params - e_lo.params))
                  if u1 > 0.25 else 10 ** 12)
    max_flops = (int(e_lo.flops + u2 * (e_hi.flops - e_lo.flops))
                 if u2 > 0.25 else 10 ** 14)
    rho_floor = max(e_lo.rho, evaluate(Candidate(hi_c.widths, lo_c.depths), prob).rho)
    return dataclasses.replace(
        prob, max_params=max_params, max_flops=max_flops,
        rho0=float(rho_floor * (1.0 + 3 * u3)))


@pytest.fixture(scope="session")
def shipped_problem_path():
    from importlib import resources

    def lookup(name: str):
        return resources.as_file(
            resources.files("entromax.data.problems").joinpath(f"{name}.json"))

    return lookup
