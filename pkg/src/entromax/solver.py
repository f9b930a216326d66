"""Constrained maximization of network entropy over stage widths and depths.

The program: maximize sum_i alpha_i * H_i - beta * Q over per-stage
widths and depths, subject to effectiveness <= rho0, FLOPs and parameter
budgets, and non-decreasing stage widths.

Solution method (no external solver dependency, validated against the
brute-force oracle below):

  phase 1  continuous relaxation: widths and depths treated as reals,
           multi-start projected coordinate ascent on an exterior-penalty
           objective with adaptive step shrinking; width iterates are kept
           on the non-decreasing cone by pool-adjacent-violators projection.
           The penalty weight starts at ten times the objective scale and
           doubles with each restart index; constraint violations below
           0.5% relative are tolerated here because rounding absorbs them.
  phase 2  round to the integer/granularity lattice, then greedy repair:
           shrink the most expensive stage's width first, then depths,
           until feasible (monotonicity preserved throughout).
  phase 3  discrete local search: +-1 depth, +-granularity width, and
           width transfers between adjacent stages, best-improvement,
           until no improving feasible neighbour exists.

Restarts are independent and deterministically seeded from (seed,
restart index); the global best is reduced with a total tie-break
(higher objective, lower params, lexicographically smaller widths, then
depths), so parallel and sequential runs return identical results.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blocks import ROLE_MAIN, ROLE_SHORTCUT, BlockKind, block_convs
from .conventions import PINNED, Conventions
from .metrics import (
    _layer_flops,
    _layer_params,
    depth_uniformity_penalty,
    effectiveness,
    weighted_entropy,
)
from .model import (
    NetworkSpec,
    StageSpec,
    StemSpec,
    expand,
    halve,
    resolve_rows,
)

__all__ = [
    "ProblemSpec",
    "Candidate",
    "CandidateEval",
    "SolveOptions",
    "SolveReport",
    "InfeasibleProblem",
    "realize",
    "evaluate",
    "objective",
    "feasible",
    "brute_force",
    "round_and_repair",
    "solve",
    "lattice_size",
]


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the width/depth program."""

    block: BlockKind
    stages: int
    alphas: tuple[float, ...]
    rho0: float
    max_flops: int
    max_params: int
    input_resolution: int
    downsample_schedule: tuple[bool, ...]
    width_bounds: tuple[tuple[int, int], ...]
    depth_bounds: tuple[tuple[int, int], ...]
    beta: float = 10.0
    width_granularity: int = 8
    kernel: int = 3
    groups: int = 1
    num_classes: int = 1000
    stem: StemSpec = StemSpec(channels=32, kernel=3, stride=2, pool=False)
    head_channels: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "downsample_schedule", tuple(self.downsample_schedule))
        object.__setattr__(self, "width_bounds", tuple(tuple(b) for b in self.width_bounds))
        object.__setattr__(self, "depth_bounds", tuple(tuple(b) for b in self.depth_bounds))

    def check(self) -> None:
        m = self.stages
        if m < 1:
            raise ValueError("at least one stage required")
        for name, seq in (("alphas", self.alphas),
                          ("downsample_schedule", self.downsample_schedule),
                          ("width_bounds", self.width_bounds),
                          ("depth_bounds", self.depth_bounds)):
            if len(seq) != m:
                raise ValueError(f"{name} must have {m} entries, got {len(seq)}")
        if any(a < 0 for a in self.alphas):
            raise ValueError("alphas must be nonnegative")
        if self.beta < 0 or self.rho0 <= 0:
            raise ValueError("beta must be >= 0 and rho0 > 0")
        if self.width_granularity < 1:
            raise ValueError("width granularity must be >= 1")
        for lo, hi in itertools.chain(self.width_bounds, self.depth_bounds):
            if not (1 <= lo <= hi):
                raise ValueError(f"bounds must satisfy 1 <= lo <= hi, got ({lo}, {hi})")
        lo_g, hi_g = _granular_bounds(self)
        for i in range(m):
            if lo_g[i] > hi_g[i]:
                raise ValueError(
                    f"stage {i}: no monotone width lattice point in bounds "
                    f"(effective granular range [{lo_g[i]}, {hi_g[i]}])")


@dataclass(frozen=True)
class Candidate:
    widths: tuple[int, ...]
    depths: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        object.__setattr__(self, "depths", tuple(int(d) for d in self.depths))


@dataclass(frozen=True)
class CandidateEval:
    objective: float
    weighted_entropy: float
    q: float
    rho: float
    params: int
    flops: int
    monotone: bool
    feasible: bool
    slacks: dict
    violations: dict
    stage_params: tuple[int, ...]
    stage_flops: tuple[int, ...]


@dataclass
class SolveOptions:
    seed: int = 0
    restarts: int = 12
    threads: int = 1
    max_evals: int = 200_000
    sweeps: int = 48
    step_init: float = 0.25
    step_min: float = 0.005
    penalty_tolerance: float = 0.005
    trace: bool = False
    max_enumeration: int = 1_000_000


@dataclass
class SolveReport:
    best: Candidate | None
    objective: float
    feasible: bool
    slacks: dict
    restarts_used: int
    evaluations: int
    wall_time: float
    budget_exhausted: bool = False
    infeasibility: str | None = None
    trace: list = field(default_factory=list)


class InfeasibleProblem(ValueError):
    """No candidate in the lattice satisfies the constraints."""

    def __init__(self, message: str, binding: str):
        super().__init__(message)
        self.binding = binding


# ---------------------------------------------------------------------------
# candidate realization and evaluation


def _granular_bounds(prob: ProblemSpec) -> tuple[list[int], list[int]]:
    """Per-stage width bounds snapped to the lattice and tightened so a
    monotone chain always exists: prefix-max of the lower bounds,
    suffix-min of the upper bounds."""
    g = prob.width_granularity
    lo = [math.ceil(b[0] / g) * g for b in prob.width_bounds]
    hi = [(b[1] // g) * g for b in prob.width_bounds]
    for i in range(1, len(lo)):
        lo[i] = max(lo[i], lo[i - 1])
    for i in range(len(hi) - 2, -1, -1):
        hi[i] = min(hi[i], hi[i + 1])
    return lo, hi


def _in_bounds(cand: Candidate, prob: ProblemSpec) -> str | None:
    for i, (w, (lo, hi)) in enumerate(zip(cand.widths, prob.width_bounds)):
        if not (lo <= w <= hi):
            return f"stage {i}: width {w} outside [{lo}, {hi}]"
        if w % prob.width_granularity != 0:
            return f"stage {i}: width {w} is not a multiple of {prob.width_granularity}"
    for i, (d, (lo, hi)) in enumerate(zip(cand.depths, prob.depth_bounds)):
        if not (lo <= d <= hi):
            return f"stage {i}: depth {d} outside [{lo}, {hi}]"
    return None


def realize(cand: Candidate, prob: ProblemSpec) -> NetworkSpec:
    """Deterministic network for a candidate under the problem's fixed
    stem, head, block kind and downsample schedule."""
    if len(cand.widths) != prob.stages or len(cand.depths) != prob.stages:
        raise ValueError("candidate arity does not match the problem's stage count")
    bad = _in_bounds(cand, prob)
    if bad is not None:
        raise ValueError(f"candidate outside problem bounds: {bad}")
    stages = tuple(
        StageSpec(block=prob.block, depth=cand.depths[i], width=cand.widths[i],
                  kernel=prob.kernel, groups=prob.groups,
                  downsample=prob.downsample_schedule[i])
        for i in range(prob.stages)
    )
    return NetworkSpec(
        input_resolution=prob.input_resolution,
        stem=prob.stem,
        stages=stages,
        head_channels=prob.head_channels,
        num_classes=prob.num_classes,
    )


def evaluate(cand: Candidate, prob: ProblemSpec,
             conventions: Conventions = PINNED) -> CandidateEval:
    """Authoritative discrete evaluation: metrics recomputed from the
    realized network in a single expansion pass."""
    net = realize(cand, prob)
    layers = expand(net, check=False)
    weighted, _ = weighted_entropy(net, prob.alphas, conventions, layers=layers)
    q = depth_uniformity_penalty(cand.depths)
    rho = effectiveness(net, conventions, layers=layers)
    monotone = all(a <= b for a, b in zip(cand.widths, cand.widths[1:]))

    params = 0
    flops = 0
    stage_params = [0] * prob.stages
    stage_flops = [0] * prob.stages
    for layer in layers:
        lp = _layer_params(layer, conventions)
        lf = _layer_flops(layer, conventions)
        params += lp
        flops += lf
        if layer.stage is not None:
            stage_params[layer.stage] += lp
            stage_flops[layer.stage] += lf

    slacks = {
        "rho": prob.rho0 - rho,
        "flops": prob.max_flops - flops,
        "params": prob.max_params - params,
    }
    violations = {}
    if rho > prob.rho0:
        violations["rho"] = rho - prob.rho0
    if flops > prob.max_flops:
        violations["flops"] = flops - prob.max_flops
    if params > prob.max_params:
        violations["params"] = params - prob.max_params
    if not monotone:
        violations["monotone"] = 1.0
    return CandidateEval(
        objective=weighted - prob.beta * q,
        weighted_entropy=weighted,
        q=q,
        rho=rho,
        params=params,
        flops=flops,
        monotone=monotone,
        feasible=not violations,
        slacks=slacks,
        violations=violations,
        stage_params=tuple(stage_params),
        stage_flops=tuple(stage_flops),
    )


def objective(cand: Candidate, prob: ProblemSpec,
              conventions: Conventions = PINNED) -> float:
    return evaluate(cand, prob, conventions).objective


def feasible(cand: Candidate, prob: ProblemSpec,
             conventions: Conventions = PINNED) -> tuple[bool, dict]:
    ev = evaluate(cand, prob, conventions)
    return ev.feasible, ev.violations


def _better(a: tuple[Candidate, CandidateEval],
            b: tuple[Candidate, CandidateEval]) -> bool:
    """Strict total order: objective desc, params asc, widths lex asc,
    depths lex asc.  Shared by the solver and the brute-force oracle so
    their tie-breaks agree exactly."""
    ca, ea = a
    cb, eb = b
    if ea.objective != eb.objective:
        return ea.objective > eb.objective
    if ea.params != eb.params:
        return ea.params < eb.params
    if ca.widths != cb.widths:
        return ca.widths < cb.widths
    return ca.depths < cb.depths


# ---------------------------------------------------------------------------
# brute-force oracle


def lattice_size(prob: ProblemSpec) -> int:
    n = 1
    g = prob.width_granularity
    for lo, hi in prob.width_bounds:
        n *= max(0, hi // g - math.ceil(lo / g) + 1)
    for lo, hi in prob.depth_bounds:
        n *= hi - lo + 1
    return n


def brute_force(prob: ProblemSpec, conventions: Conventions = PINNED,
                max_enumeration: int = 1_000_000,
                ) -> tuple[Candidate, CandidateEval]:
    """Exhaustive feasible argmax over the lattice (oracle for solve)."""
    prob.check()
    size = lattice_size(prob)
    if size > max_enumeration:
        raise ValueError(f"lattice has {size} points, above the cap {max_enumeration}")

    g = prob.width_granularity
    width_axes = [range(math.ceil(lo / g) * g, (hi // g) * g + 1, g)
                  for lo, hi in prob.width_bounds]
    depth_axes = [range(lo, hi + 1) for lo, hi in prob.depth_bounds]

    best: tuple[Candidate, CandidateEval] | None = None
    tightest: tuple[float, str] | None = None
    for widths in itertools.product(*width_axes):
        if any(a > b for a, b in zip(widths, widths[1:])):
            continue  # monotonicity is structural; skip without evaluating
        for depths in itertools.product(*depth_axes):
            cand = Candidate(widths, depths)
            ev = evaluate(cand, prob, conventions)
            if ev.feasible:
                entry = (cand, ev)
                if best is None or _better(entry, best):
                    best = entry
            else:
                scale = {"rho": prob.rho0, "flops": prob.max_flops,
                         "params": prob.max_params, "monotone": 1.0}
                name, rel = max(
                    ((k, v / scale[k]) for k, v in ev.violations.items()),
                    key=lambda kv: kv[1])
                if tightest is None or rel < tightest[0]:
                    tightest = (rel, name)
    if best is None:
        binding = tightest[1] if tightest else "bounds"
        raise InfeasibleProblem(
            f"no feasible candidate in the lattice; tightest violated "
            f"constraint: {binding}", binding)
    return best


# ---------------------------------------------------------------------------
# continuous relaxation


def _pav(values) -> list[float]:
    """L2 projection onto the non-decreasing cone (pool adjacent violators)."""
    vals: list[float] = []
    counts: list[int] = []
    for v in values:
        vals.append(float(v))
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, c2 = vals.pop(), counts.pop()
            v1, c1 = vals.pop(), counts.pop()
            vals.append((v1 * c1 + v2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    out: list[float] = []
    for v, c in zip(vals, counts):
        out.extend([v] * c)
    return out


def _monotone_box(widths, lo_eff, hi_eff) -> list[float]:
    """Project onto the monotone cone intersected with the effective box."""
    w = _pav(widths)
    out = []
    prev = -math.inf
    for i, v in enumerate(w):
        v = min(max(v, lo_eff[i], prev), hi_eff[i])
        out.append(v)
        prev = v
    return out


class _Relaxed:
    """Continuous surrogate of the discrete evaluation.

    Mirrors the block expansion with real-valued widths and depths: the
    first block of a stage is costed explicitly and the remaining
    (depth - 1) blocks scale the uniform-block cost, which is exact for
    integer depths.  Squeeze-excite channel flooring is smoothed; that
    detail is far below the rounding granularity.
    """

    def __init__(self, prob: ProblemSpec, conventions: Conventions = PINNED):
        self.prob = prob
        self.conv = conventions
        r = prob.input_resolution
        self.r_stem_out = halve(r) if prob.stem.stride == 2 else r
        r = self.r_stem_out
        if prob.stem.pool:
            r = halve(r)
        self.r_stage_in = []
        self.r_stage = []
        for ds in prob.downsample_schedule:
            self.r_stage_in.append(r)
            if ds:
                r = halve(r)
            self.r_stage.append(r)

    def _row_costs(self, rows):
        params = 0.0
        flops = 0.0
        logw = 0.0
        n_path = 0.0
        for plan, _, r_out in rows:
            weights = plan.c_out * (plan.c_in / plan.groups) * plan.kernel ** 2
            params += weights
            if plan.has_bn and self.conv.params_include_bn:
                params += 2 * plan.c_out
            if plan.has_bias:
                params += plan.c_out
            area = r_out * r_out
            flops += weights * area
            if plan.has_bn:
                flops += self.conv.flops_bn_cost * plan.c_out * area
            in_path = plan.role == ROLE_MAIN or (
                plan.role == ROLE_SHORTCUT and self.conv.entropy_include_shortcut)
            if in_path:
                logw += math.log(plan.c_in * plan.kernel ** 2 / plan.groups)
                n_path += 1
        return params, flops, logw, n_path

    def evaluate(self, widths, depths):
        prob = self.prob
        conv = self.conv
        params = 0.0
        flops = 0.0
        n_path = 0.0
        logw_total = 0.0
        logw_stage = [0.0] * prob.stages

        stem = prob.stem
        w_stem = 3 * stem.kernel ** 2
        params += stem.channels * w_stem + (2 * stem.channels if conv.params_include_bn else 0)
        flops += (stem.channels * w_stem + conv.flops_bn_cost * stem.channels) \
            * self.r_stem_out ** 2
        if conv.entropy_include_stem:
            logw_stage[0] += math.log(w_stem)
            logw_total += math.log(w_stem)
            n_path += 1

        c_prev = float(stem.channels)
        for i in range(prob.stages):
            c = float(widths[i])
            depth = float(depths[i])
            stride = 2 if prob.downsample_schedule[i] else 1
            first_plans = block_convs(prob.block, c_prev, c, prob.kernel,
                                      prob.groups, stride, exact=False)
            first_rows, _ = resolve_rows(first_plans, self.r_stage_in[i])
            p1, f1, l1, n1 = self._row_costs(first_rows)
            rest_plans = block_convs(prob.block, c, c, prob.kernel,
                                     prob.groups, 1, exact=False)
            rest_rows, _ = resolve_rows(rest_plans, self.r_stage[i])
            p2, f2, l2, n2 = self._row_costs(rest_rows)
            k = depth - 1.0
            params += p1 + k * p2
            flops += f1 + k * f2
            logw_stage[i] += l1 + k * l2
            logw_total += l1 + k * l2
            n_path += n1 + k * n2
            c_prev = c

        feat = c_prev
        if prob.head_channels is not None:
            hp = prob.head_channels * feat
            params += hp + (2 * prob.head_channels if conv.params_include_bn else 0)
            flops += (hp + conv.flops_bn_cost * prob.head_channels) * self.r_stage[-1] ** 2
            feat = float(prob.head_channels)
        params += prob.num_classes * feat + prob.num_classes
        flops += prob.num_classes * feat

        rho = n_path / math.exp(logw_total / n_path)
        if not conv.stagewise_entropy:
            acc = 0.0
            for i in range(prob.stages):
                acc += logw_stage[i]
                logw_stage[i] = acc
        weighted = 0.0
        for i in range(prob.stages):
            weighted += prob.alphas[i] * math.log(
                self.r_stage[i] ** 2 * widths[i]) * logw_stage[i]
        depths_arr = list(depths)
        mean = sum(depths_arr) / len(depths_arr)
        q = math.exp(sum((d - mean) ** 2 for d in depths_arr) / len(depths_arr))
        obj = weighted - prob.beta * q
        return obj, rho, params, flops

    def penalized(self, widths, depths, mu, tol):
        obj, rho, params, flops = self.evaluate(widths, depths)
        pen = 0.0
        for usage, budget in ((rho, self.prob.rho0),
                              (flops, float(self.prob.max_flops)),
                              (params, float(self.prob.max_params))):
            excess = max(0.0, usage / budget - 1.0 - tol)
            pen += excess * excess
        return obj - mu * pen, obj


def _continuous_ascent(relaxed: _Relaxed, prob: ProblemSpec, opts: SolveOptions,
                       w0, d0, mu: float):
    lo_g, hi_g = _granular_bounds(prob)
    lo_w = [float(v) for v in lo_g]
    hi_w = [float(v) for v in hi_g]
    lo_d = [float(b[0]) for b in prob.depth_bounds]
    hi_d = [float(b[1]) for b in prob.depth_bounds]

    w = _monotone_box(w0, lo_w, hi_w)
    d = [min(max(float(v), lo_d[i]), hi_d[i]) for i, v in enumerate(d0)]
    best, _ = relaxed.penalized(w, d, mu, opts.penalty_tolerance)

    step = opts.step_init
    m = prob.stages
    for _ in range(opts.sweeps):
        improved = False
        for j in range(2 * m):
            is_width = j < m
            k = j if is_width else j - m
            span = (hi_w[k] - lo_w[k]) if is_width else (hi_d[k] - lo_d[k])
            if span <= 0:
                continue
            for sign in (1.0, -1.0):
                if is_width:
                    trial_w = list(w)
                    trial_w[k] += sign * step * span
                    trial_w = _monotone_box(trial_w, lo_w, hi_w)
                    trial_d = d
                else:
                    trial_w = w
                    trial_d = list(d)
                    trial_d[k] = min(max(trial_d[k] + sign * step * span,
                                         lo_d[k]), hi_d[k])
                score, _ = relaxed.penalized(trial_w, trial_d, mu,
                                             opts.penalty_tolerance)
                if score > best:
                    best = score
                    w, d = list(trial_w), list(trial_d)
                    improved = True
        if not improved:
            step *= 0.5
            if step < opts.step_min:
                break
    return w, d


# ---------------------------------------------------------------------------
# rounding, repair, discrete polish


class _Budget:
    """Evaluation counter with a hard cap."""

    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0
        self.exhausted = False

    def take(self) -> bool:
        if self.used >= self.cap:
            self.exhausted = True
            return False
        self.used += 1
        return True


def _snap(value: float, granularity: int) -> int:
    return int(math.floor(value / granularity + 0.5)) * granularity


def round_and_repair(widths, depths, prob: ProblemSpec,
                     conventions: Conventions = PINNED,
                     budget: _Budget | None = None,
                     ) -> tuple[Candidate, CandidateEval] | None:
    """Project reals onto the feasible lattice.

    Round widths to the nearest granularity multiple and depths to the
    nearest integer, project widths onto the monotone cone, then repair
    greedily while infeasible: shrink the width of the most expensive
    stage first, then depths; effectiveness excess is repaired by
    removing depth from the deepest stage.  Returns None when the
    repair exhausts the bounds, or the budget runs out.
    """
    budget = budget or _Budget(10 ** 9)
    g = prob.width_granularity
    lo_g, hi_g = _granular_bounds(prob)
    lo_d = [b[0] for b in prob.depth_bounds]

    w = _monotone_box([float(v) for v in widths], lo_g, hi_g)
    w = [_snap(v, g) for v in w]
    prev = 0
    for i in range(len(w)):
        w[i] = min(max(w[i], lo_g[i], prev), hi_g[i])
        prev = w[i]
    d = [min(max(int(math.floor(v + 0.5)), prob.depth_bounds[i][0]),
             prob.depth_bounds[i][1]) for i, v in enumerate(depths)]

    while True:
        cand = Candidate(tuple(w), tuple(d))
        if not budget.take():
            return None
        ev = evaluate(cand, prob, conventions)
        if ev.feasible:
            return cand, ev

        if "params" in ev.violations or "flops" in ev.violations:
            key = ev.stage_params if "params" in ev.violations else ev.stage_flops
            order = sorted(range(prob.stages), key=lambda i: (-key[i], i))
            moved = False
            for j in order:
                floor_j = max(lo_g[j], w[j - 1] if j > 0 else 0)
                if w[j] - g >= floor_j:
                    w[j] -= g
                    moved = True
                    break
            if moved:
                continue
            for j in sorted(range(prob.stages), key=lambda i: (-d[i], i)):
                if d[j] - 1 >= lo_d[j]:
                    d[j] -= 1
                    moved = True
                    break
            if not moved:
                return None
            continue

        if "rho" in ev.violations:
            # too deep for its width: drop depth from the deepest stage
            j = min(range(prob.stages), key=lambda i: (-d[i], i))
            if d[j] - 1 >= lo_d[j]:
                d[j] -= 1
                continue
            return None

        return None  # monotone violation cannot occur by construction


def _neighbors(cand: Candidate, prob: ProblemSpec):
    """Deterministic move set for the discrete polish."""
    g = prob.width_granularity
    lo_g, hi_g = _granular_bounds(prob)
    w, d = cand.widths, cand.depths
    m = prob.stages

    def monotone_ok(ws):
        return all(a <= b for a, b in zip(ws, ws[1:]))

    for j in range(m):
        for delta in (g, -g):
            nw = w[j] + delta
            if lo_g[j] <= nw <= hi_g[j]:
                ws = w[:j] + (nw,) + w[j + 1:]
                if monotone_ok(ws):
                    yield Candidate(ws, d)
        for delta in (1, -1):
            nd = d[j] + delta
            if prob.depth_bounds[j][0] <= nd <= prob.depth_bounds[j][1]:
                yield Candidate(w, d[:j] + (nd,) + d[j + 1:])
    for j in range(m - 1):
        for da, db in ((g, -g), (-g, g)):
            wa, wb = w[j] + da, w[j + 1] + db
            if lo_g[j] <= wa <= hi_g[j] and lo_g[j + 1] <= wb <= hi_g[j + 1]:
                ws = w[:j] + (wa, wb) + w[j + 2:]
                if monotone_ok(ws):
                    yield Candidate(ws, d)
    # depth transfers preserve the total layer count, so they hop over the
    # uniformity-penalty barrier that blocks single +-1 depth moves
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            di, dj = d[i] + 1, d[j] - 1
            if di <= prob.depth_bounds[i][1] and dj >= prob.depth_bounds[j][0]:
                ds = list(d)
                ds[i], ds[j] = di, dj
                yield Candidate(w, tuple(ds))
    # width-for-depth trades exchange budget between the two resources,
    # which no sequence of feasible single moves can do at a tight budget
    for i in range(m):
        for j in range(m):
            for dw, dd in ((g, -1), (-g, 1)):
                nw, nd = w[i] + dw, d[j] + dd
                if not (lo_g[i] <= nw <= hi_g[i]):
                    continue
                if not (prob.depth_bounds[j][0] <= nd <= prob.depth_bounds[j][1]):
                    continue
                ws = w[:i] + (nw,) + w[i + 1:]
                if monotone_ok(ws):
                    yield Candidate(ws, d[:j] + (nd,) + d[j + 1:])


def _polish(start: tuple[Candidate, CandidateEval], prob: ProblemSpec,
            conventions: Conventions, budget: _Budget,
            ) -> tuple[Candidate, CandidateEval]:
    current = start
    while True:
        best_neighbor = None
        for cand in _neighbors(current[0], prob):
            if not budget.take():
                return current
            ev = evaluate(cand, prob, conventions)
            if not ev.feasible:
                continue
            entry = (cand, ev)
            if _better(entry, current) and (
                    best_neighbor is None or _better(entry, best_neighbor)):
                best_neighbor = entry
        if best_neighbor is None:
            return current
        current = best_neighbor


# ---------------------------------------------------------------------------
# top-level solve


def _start_point(prob: ProblemSpec, restart: int, seed: int):
    """Deterministic restart start: two corner heuristics, one midpoint,
    then seeded uniform draws."""
    lo_g, hi_g = _granular_bounds(prob)
    lo_d = [b[0] for b in prob.depth_bounds]
    hi_d = [b[1] for b in prob.depth_bounds]
    if restart == 0:
        return [float(v) for v in hi_g], [float(v) for v in hi_d]
    if restart == 1:
        return [float(v) for v in lo_g], [float(v) for v in hi_d]
    if restart == 2:
        return ([(a + b) / 2 for a, b in zip(lo_g, hi_g)],
                [(a + b) / 2 for a, b in zip(lo_d, hi_d)])
    rng = np.random.default_rng([seed, restart])
    w = rng.uniform(lo_g, hi_g).tolist()
    d = rng.uniform(lo_d, hi_d).tolist()
    return w, d


def _run_restart(prob: ProblemSpec, opts: SolveOptions,
                 conventions: Conventions, restart: int, eval_cap: int):
    budget = _Budget(eval_cap)
    result = None
    note = {"restart": restart, "evaluations": 0}
    if eval_cap > 0:
        w0, d0 = _start_point(prob, restart, opts.seed)
        # odd random restarts stay where they are drawn: the ascent pulls
        # everything into few basins, and rounding a raw draw keeps the
        # discrete search's start diversity
        ascend = restart < 3 or restart % 2 == 0
        if ascend:
            relaxed = _Relaxed(prob, conventions)
            mu0 = 10.0 * (1.0 + abs(relaxed.evaluate(w0, d0)[0]))
            mu = mu0 * (2.0 ** restart)
            w, d = _continuous_ascent(relaxed, prob, opts, w0, d0, mu)
            note["mu"] = mu
        else:
            w, d = w0, d0
        rounded = round_and_repair(w, d, prob, conventions, budget)
        if rounded is not None:
            result = _polish(rounded, prob, conventions, budget)
        note["continuous"] = [list(w), list(d)]
        if result is not None:
            note["best"] = {"widths": list(result[0].widths),
                            "depths": list(result[0].depths),
                            "objective": result[1].objective}
    note["evaluations"] = budget.used
    return result, budget.used, budget.exhausted, note


def _restart_caps(max_evals: int, restarts: int) -> list[int]:
    """Deterministic per-restart budgets (independent of execution order)."""
    base = max_evals // restarts
    extra = max_evals - base * restarts
    return [base + (1 if r < extra else 0) for r in range(restarts)]


def solve(prob: ProblemSpec, opts: SolveOptions | None = None,
          conventions: Conventions = PINNED) -> SolveReport:
    """Best feasible candidate by the documented two-phase method."""
    opts = opts or SolveOptions()
    prob.check()
    t0 = time.perf_counter()
    caps = _restart_caps(opts.max_evals, opts.restarts)

    if opts.threads > 1:
        with ProcessPoolExecutor(max_workers=opts.threads) as pool:
            outcomes = list(pool.map(
                _run_restart,
                itertools.repeat(prob), itertools.repeat(opts),
                itertools.repeat(conventions),
                range(opts.restarts), caps))
    else:
        outcomes = [_run_restart(prob, opts, conventions, r, caps[r])
                    for r in range(opts.restarts)]

    best: tuple[Candidate, CandidateEval] | None = None
    evaluations = 0
    exhausted = False
    trace = []
    for result, used, was_exhausted, note in outcomes:
        evaluations += used
        exhausted = exhausted or was_exhausted
        if opts.trace:
            trace.append(note)
        if result is not None and (best is None or _better(result, best)):
            best = result

    wall = time.perf_counter() - t0
    if best is None:
        # probe the cheapest lattice point to name the binding constraint
        lo_g, _ = _granular_bounds(prob)
        cheapest = Candidate(tuple(lo_g), tuple(b[0] for b in prob.depth_bounds))
        ev = evaluate(cheapest, prob, conventions)
        if ev.feasible:
            # budget starvation, not infeasibility: report the probe point
            return SolveReport(
                best=cheapest, objective=ev.objective, feasible=True,
                slacks=ev.slacks, restarts_used=opts.restarts,
                evaluations=evaluations, wall_time=wall,
                budget_exhausted=True, trace=trace)
        binding = max(ev.violations, key=lambda k: ev.violations[k])
        return SolveReport(
            best=None, objective=-math.inf, feasible=False, slacks=ev.slacks,
            restarts_used=opts.restarts, evaluations=evaluations,
            wall_time=wall, budget_exhausted=exhausted,
            infeasibility=binding, trace=trace)

    cand, ev = best
    return SolveReport(
        best=cand, objective=ev.objective, feasible=True, slacks=ev.slacks,
        restarts_used=opts.restarts, evaluations=evaluations, wall_time=wall,
        budget_exhausted=exhausted, trace=trace)
