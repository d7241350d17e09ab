"""PID gain search over simulated loop cost.

Cost is an integral performance index (ITAE, ISE, or IAE) of the tracking
error over the simulation horizon; runs that diverge are charged a large
finite penalty so unstable regions of the gain box do not abort a search.
Two deterministic methods are provided: exhaustive grid search and a
bounded Nelder-Mead simplex with fixed coefficients.  Determinism is a
hard requirement here; identical specs must reproduce identical
evaluation histories, so there is no stochastic restart or adaptive
scaling anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .loops import LoopSpec, simulate_loop
from .pid import PidGains

__all__ = [
    "CostKind",
    "DIVERGENCE_PENALTY",
    "TuneMethod",
    "TuneResult",
    "TuneSpec",
    "loop_cost",
    "tune_pid",
]

DIVERGENCE_PENALTY = 1e12


class CostKind(str, Enum):
    ITAE = "itae"   # integral of time-weighted absolute error
    ISE = "ise"     # integral of squared error
    IAE = "iae"     # integral of absolute error


class TuneMethod(str, Enum):
    NELDER_MEAD = "nelder_mead"
    GRID = "grid"


def loop_cost(spec: LoopSpec, cost_kind: CostKind = CostKind.ITAE) -> float:
    """Simulate the loop and integrate its tracking error.

    The error used is setpoint minus true output, matching how response
    metrics are scored.  A diverged run returns ``DIVERGENCE_PENALTY``.
    """
    result = simulate_loop(spec)
    if result.diverged:
        return DIVERGENCE_PENALTY
    t = result.series.t
    e = np.abs(result.series["setpoint"] - result.series["y_true"])
    dt = spec.sim.dt
    kind = CostKind(cost_kind)
    if kind is CostKind.ITAE:
        return float(np.sum(t * e) * dt)
    if kind is CostKind.ISE:
        return float(np.sum(e * e) * dt)
    return float(np.sum(e) * dt)


@dataclass(frozen=True)
class TuneSpec:
    """Search definition over (kp, ki, kd).

    ``loop`` is the template; candidate triples replace its gains while
    keeping the derivative filter and saturation settings.  A bound pair
    with lo == hi pins that gain.  ``initial`` supplies the starting
    triple (projected onto the bounds box) and is always evaluated, so the
    incumbent can never be lost.
    """

    loop: LoopSpec
    cost_kind: CostKind = CostKind.ITAE
    kp_bounds: tuple[float, float] = (0.0, 10.0)
    ki_bounds: tuple[float, float] = (0.0, 0.0)
    kd_bounds: tuple[float, float] = (0.0, 0.0)
    initial: PidGains = field(default_factory=PidGains)
    method: TuneMethod = TuneMethod.NELDER_MEAD
    grid_points: int = 5
    max_evals: int = 200

    def __post_init__(self) -> None:
        object.__setattr__(self, "cost_kind", CostKind(self.cost_kind))
        object.__setattr__(self, "method", TuneMethod(self.method))
        for name in ("kp_bounds", "ki_bounds", "kd_bounds"):
            lo, hi = getattr(self, name)
            if lo < 0:
                raise ValueError(f"{name} lower bound must be >= 0")
            if lo > hi:
                raise ValueError(f"{name} is an empty interval: {lo} > {hi}")
        if self.grid_points < 1:
            raise ValueError("grid_points must be >= 1")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")

    @property
    def bounds(self) -> tuple[tuple[float, float], ...]:
        return (self.kp_bounds, self.ki_bounds, self.kd_bounds)


@dataclass
class TuneResult:
    best_gains: PidGains
    best_cost: float
    evals: int
    history: list[tuple[PidGains, float]]


def _project(triple: tuple[float, float, float], bounds) -> tuple[float, float, float]:
    return tuple(min(max(v, lo), hi) for v, (lo, hi) in zip(triple, bounds))


def _with_gains(spec: TuneSpec, triple: tuple[float, float, float]) -> LoopSpec:
    gains = replace(spec.loop.gains, kp=triple[0], ki=triple[1], kd=triple[2])
    return replace(spec.loop, gains=gains)


def _grid_axis(lo: float, hi: float, points: int) -> list[float]:
    """Grid values for one gain: geometric when the interval is strictly
    positive (gains act as scale parameters, so decades matter), linear
    when it starts at zero."""
    if lo == hi:
        return [lo]
    if lo > 0:
        return list(np.geomspace(lo, hi, points))
    return list(np.linspace(lo, hi, points))


def _grid_eval(args: tuple[TuneSpec, tuple[float, float, float]]) -> float:
    spec, triple = args
    return loop_cost(_with_gains(spec, triple), spec.cost_kind)


def tune_pid(
    spec: TuneSpec,
    cost_fn: Callable[[LoopSpec, CostKind], float] = loop_cost,
    jobs: int = 1,
) -> TuneResult:
    """Minimize the loop cost over the bounds box.

    Grid: the projected initial triple plus an exhaustive lattice of
    ``grid_points`` per free gain (geometric spacing on strictly positive
    intervals, linear otherwise), evaluated in (kp, ki, kd) lexicographic
    order.  Nelder-Mead: deterministic simplex from the projected initial
    with coefficients (1, 2, 0.5, 0.5) for reflection, expansion,
    contraction, and shrink, every candidate clipped to the box.  Both
    stop at ``max_evals``; Nelder-Mead also stops once the simplex spread
    drops below 1e-8.  Cost ties are broken toward the lexicographically
    lowest (kp, ki, kd).

    ``cost_fn`` is injectable for testing; the default simulates the loop.
    ``jobs`` > 1 fans grid evaluations out over processes (cost
    evaluations are pure, and the merge keeps candidate order, so the
    history is identical to a serial run).
    """
    bounds = spec.bounds
    history: list[tuple[PidGains, float]] = []

    def evaluate(triple: tuple[float, float, float]) -> float:
        loop = _with_gains(spec, triple)
        cost = cost_fn(loop, spec.cost_kind)
        history.append((loop.gains, cost))
        return cost

    start = _project((spec.initial.kp, spec.initial.ki, spec.initial.kd), bounds)

    if spec.method is TuneMethod.GRID:
        axes = [_grid_axis(lo, hi, spec.grid_points) for lo, hi in bounds]
        candidates: list[tuple[float, float, float]] = [start]
        for point in itertools.product(*axes):
            if point not in candidates:
                candidates.append(point)
        candidates = candidates[: spec.max_evals]
        if jobs > 1 and cost_fn is loop_cost:
            import multiprocessing

            with multiprocessing.Pool(jobs) as pool:
                costs = pool.map(_grid_eval, [(spec, c) for c in candidates])
            for point, cost in zip(candidates, costs):
                history.append((_with_gains(spec, point).gains, cost))
        else:
            for point in candidates:
                evaluate(point)
    else:
        _nelder_mead(evaluate, start, bounds, spec.max_evals, history)

    best_gains, best_cost = min(
        history, key=lambda item: (item[1], item[0].kp, item[0].ki, item[0].kd)
    )
    return TuneResult(
        best_gains=best_gains, best_cost=best_cost, evals=len(history), history=history
    )


def _nelder_mead(
    evaluate,
    start: tuple[float, float, float],
    bounds,
    max_evals: int,
    history: list,
    spread_tol: float = 1e-8,
) -> None:
    """Bounded Nelder-Mead on the free gain dimensions."""
    free = [i for i, (lo, hi) in enumerate(bounds) if lo < hi]
    full = list(start)

    def assemble(xf: np.ndarray) -> tuple[float, float, float]:
        triple = list(full)
        for j, i in enumerate(free):
            lo, hi = bounds[i]
            triple[i] = min(max(float(xf[j]), lo), hi)
        return tuple(triple)

    def f(xf: np.ndarray) -> float:
        return evaluate(assemble(xf))

    if not free:
        evaluate(tuple(full))
        return

    dim = len(free)
    x0 = np.array([start[i] for i in free])
    simplex = [x0]
    for j, i in enumerate(free):
        lo, hi = bounds[i]
        step = 0.05 * (hi - lo)
        vertex = x0.copy()
        vertex[j] = min(vertex[j] + step, hi)
        if vertex[j] == x0[j]:  # started at the upper bound, step inward
            vertex[j] = max(x0[j] - step, lo)
        simplex.append(vertex)

    values = []
    for v in simplex:
        if len(history) >= max_evals:
            return
        values.append(f(v))

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    while len(history) < max_evals:
        order = sorted(range(dim + 1), key=lambda i: (values[i], tuple(simplex[i])))
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        spread = max(float(np.max(np.abs(v - simplex[0]))) for v in simplex[1:])
        if spread < spread_tol:
            return

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]

        reflected = centroid + alpha * (centroid - worst)
        fr = f(reflected)
        if fr < values[0]:
            if len(history) >= max_evals:
                simplex[-1], values[-1] = reflected, fr
                return
            expanded = centroid + gamma * (centroid - worst)
            fe = f(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
            continue
        if len(history) >= max_evals:
            return
        contracted = centroid + rho * (worst - centroid)
        fc = f(contracted)
        if fc < values[-1]:
            simplex[-1], values[-1] = contracted, fc
            continue
        # Shrink toward the best vertex.
        for i in range(1, dim + 1):
            if len(history) >= max_evals:
                return
            simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
            values[i] = f(simplex[i])
