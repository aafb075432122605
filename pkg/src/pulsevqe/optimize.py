"""Bound-constrained pulse optimization and the adaptive segment growth.

minimize() is a limited-memory quasi-Newton (L-BFGS-B) loop over a packed
parameter vector; multistart() restarts it from random in-bounds points;
adaptive_optimize() grows the number of square-pulse segments by splitting
and re-optimizing with warm starts; duration_search() scans total pulse
durations for the shortest feasible one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.optimize

from .hamiltonians import exact_ground
from .objective import ObjectiveSpec, diagnostics, energy, value_and_gradient
from .pulses import (
    ParamVector,
    PulseSet,
    SquarePulse,
    pack,
    unpack,
    split_largest_segment,
)

__all__ = [
    "OptimizerConfig",
    "OptimizationRecord",
    "OptimizationError",
    "minimize",
    "multistart",
    "adaptive_optimize",
    "duration_search",
]


class OptimizationError(RuntimeError):
    """All optimization attempts failed."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Stopping rules for one quasi-Newton run."""

    max_iters: int = 1000
    grad_tol: float = 1e-9
    energy_tol: float = 1e-10
    history_size: int = 10
    seed: int | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.grad_tol <= 0 or self.energy_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class OptimizationRecord:
    """Outcome of one optimization run (energies in Hartree)."""

    best_params: ParamVector
    best_energy: float
    error_vs_fci: float
    leakage_final: float
    overlap_final: float
    n_energy_evals: int
    n_grad_evals: int
    converged: bool
    trace: tuple[float, ...]
    wall_time: float = 0.0
    start_index: int = 0
    n_segments: int | None = None
    failure: str | None = None
    pulse_json: str | None = None  # optimized pulse set, file-schema JSON

    def summary(self) -> dict:
        return {
            "best_energy": self.best_energy,
            "error_vs_fci": self.error_vs_fci,
            "leakage": self.leakage_final,
            "overlap": self.overlap_final,
            "n_energy_evals": self.n_energy_evals,
            "n_grad_evals": self.n_grad_evals,
            "converged": self.converged,
            "wall_time_s": self.wall_time,
            "start_index": self.start_index,
            "n_segments": self.n_segments,
            "failure": self.failure,
        }


def _project_bounds(x: np.ndarray, bounds: Sequence[tuple[float, float]]) -> np.ndarray:
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return np.clip(x, lo, hi)


def minimize_function(
    fun, x0: np.ndarray, bounds, cfg: OptimizerConfig
) -> tuple[np.ndarray, float, tuple[float, ...], bool, str | None]:
    """Bound-constrained quasi-Newton on fun(x) -> (value, gradient).

    Returns (best_x, best_f, best-so-far trace per iteration, converged,
    failure message). This is the single optimizer code path; minimize()
    wraps it for pulse objectives.
    """
    best = {"f": np.inf, "x": np.asarray(x0, dtype=float)}
    trace: list[float] = []
    failure: str | None = None

    def wrapped(x):
        f, g = fun(x)
        if f < best["f"]:
            best["f"] = f
            best["x"] = x.copy()
        return f, g

    converged = False
    try:
        result = scipy.optimize.minimize(
            wrapped,
            _project_bounds(np.asarray(x0, dtype=float), bounds),
            jac=True,
            method="L-BFGS-B",
            bounds=list(bounds),
            callback=lambda xk: trace.append(best["f"]),
            options={
                "maxiter": cfg.max_iters,
                "maxcor": cfg.history_size,
                "ftol": cfg.energy_tol,
                "gtol": cfg.grad_tol,
                "maxfun": 50 * cfg.max_iters,
            },
        )
        converged = bool(result.success)
    except (RuntimeError, FloatingPointError) as exc:
        failure = f"{type(exc).__name__}: {exc}"
    x_best = _project_bounds(best["x"], bounds)
    return x_best, best["f"], tuple(trace), converged, failure


def minimize(
    spec: ObjectiveSpec, x0: ParamVector, cfg: OptimizerConfig | None = None
) -> OptimizationRecord:
    """Run L-BFGS-B from x0; the trace is the best objective seen per iteration."""
    cfg = cfg or OptimizerConfig()
    counters = {"energy": 0, "grad": 0}

    def fun(x):
        f, g, n_fd = value_and_gradient(x0.with_values(x), spec)
        counters["energy"] += 1 + n_fd
        counters["grad"] += 1
        return f, g

    t0 = time.perf_counter()
    best_x, _, trace, converged, failure = minimize_function(
        fun, x0.as_array(), x0.bounds, cfg
    )
    trace = list(trace)
    wall = time.perf_counter() - t0

    best_params = x0.with_values(best_x)
    best_energy = energy(best_params, spec)
    counters["energy"] += 1
    diag = diagnostics(best_params, spec)
    if not trace or trace[-1] > best_energy:
        trace.append(best_energy)
    from .pulses import serialize_pulse_set

    pulse_json = serialize_pulse_set(unpack(best_params, spec.pulse_template))
    return OptimizationRecord(
        best_params=best_params,
        best_energy=best_energy,
        error_vs_fci=diag["error_vs_fci"],
        leakage_final=diag["leakage"],
        overlap_final=diag["overlap"],
        n_energy_evals=counters["energy"],
        n_grad_evals=counters["grad"],
        converged=converged and failure is None,
        trace=tuple(trace),
        wall_time=wall,
        n_segments=_segment_count(spec.pulse_template),
        failure=failure,
        pulse_json=pulse_json,
    )


def _segment_count(pulse_set: PulseSet) -> int | None:
    if isinstance(pulse_set.pulses[0], SquarePulse):
        return pulse_set.pulses[0].n_segments
    return None


def random_start(
    template_params: ParamVector, rng: np.random.Generator
) -> ParamVector:
    """Uniform in-bounds draw for every entry (amplitudes, times, frequencies)."""
    values = [rng.uniform(lo, hi) for lo, hi in template_params.bounds]
    return template_params.with_values(values)


def multistart(
    spec: ObjectiveSpec,
    n_starts: int,
    cfg: OptimizerConfig | None = None,
    rng: np.random.Generator | int | None = None,
    mode: str = "full",
    return_all: bool = False,
):
    """minimize() from the template plus n_starts-1 random initializations.

    Start 0 is the template's own parameters; the rest draw uniformly within
    bounds from per-start seeds derived from `rng`. Records are merged by
    (energy, start index), so ties resolve deterministically.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(rng if rng is not None else cfg.seed)
    template_params = pack(spec.pulse_template, mode)
    records: list[OptimizationRecord] = []
    failures: list[str] = []
    for start_idx in range(n_starts):
        if start_idx == 0:
            x0 = template_params
        else:
            x0 = random_start(template_params, rng)
        try:
            rec = minimize(spec, x0, cfg)
        except (RuntimeError, ValueError) as exc:
            failures.append(f"start {start_idx}: {exc}")
            continue
        records.append(replace(rec, start_index=start_idx))
    if not records:
        raise OptimizationError(
            f"all {n_starts} starts failed: " + "; ".join(failures)
        )
    records.sort(key=lambda r: (r.best_energy, r.start_index))
    return records if return_all else records[0]


def adaptive_optimize(
    spec: ObjectiveSpec,
    max_segments: int,
    target_error: float,
    rng: np.random.Generator | int | None = None,
    cfg: OptimizerConfig | None = None,
    n1_starts: int = 1,
    n1_iters: int | None = None,
    use_exact_reference: bool | None = None,
    stagnation_tol: float = 1e-6,
) -> list[OptimizationRecord]:
    """Grow square-pulse segments until the energy error hits target_error.

    Stages: optimize the n=1 pulse (amplitudes and frequencies; switch times
    are never optimized here), then repeatedly split each transmon's largest
    segment at a random time (the first split cuts the whole pulse) and
    re-optimize warm-started from the previous shape. Stops at target_error
    (measured against exact diagonalization when available, otherwise on
    energy stagnation) or at max_segments.
    """
    if target_error <= 0:
        raise ValueError("target_error must be positive")
    if spec.pulse_template.kind != "square":
        raise ValueError("adaptive optimization needs square pulses")
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(rng if rng is not None else cfg.seed)
    if use_exact_reference is None:
        use_exact_reference = spec.hamiltonian.n_qubits <= 12
    fci = exact_ground(spec.hamiltonian)[0] if use_exact_reference else None

    current = spec
    records: list[OptimizationRecord] = []
    template_params = pack(current.pulse_template, "adaptive")
    if n1_starts > 1:
        # cheap exploration across starts, then polish the winner
        explore_cfg = replace(cfg, max_iters=n1_iters or cfg.max_iters)
        rec = multistart(current, n1_starts, explore_cfg, rng, mode="adaptive")
        rec = minimize(current, rec.best_params, cfg)
    else:
        rec = minimize(current, template_params, cfg)
    records.append(replace(rec, n_segments=1))

    for n_seg in range(2, max_segments + 1):
        if _stop(records, fci, target_error, stagnation_tol):
            break
        prev_set = unpack(records[-1].best_params, current.pulse_template)
        split = PulseSet(
            pulses=tuple(split_largest_segment(p, rng) for p in prev_set.pulses),
            total_time=prev_set.total_time,
        )
        current = replace(spec, pulse_template=split)
        rec = minimize(current, pack(split, "adaptive"), cfg)
        records.append(replace(rec, n_segments=n_seg))
    return records


def _stop(
    records: list[OptimizationRecord],
    fci: float | None,
    target_error: float,
    stagnation_tol: float,
) -> bool:
    if fci is not None:
        return records[-1].best_energy - fci <= target_error
    if len(records) >= 2:
        return records[-2].best_energy - records[-1].best_energy < stagnation_tol
    return False


def duration_search(
    spec: ObjectiveSpec,
    durations: Sequence[float],
    target_error: float,
    cfg: OptimizerConfig | None = None,
    rng: np.random.Generator | int | None = None,
    n_starts: int = 5,
    stop_at_first_feasible: bool = False,
) -> tuple[dict[float, OptimizationRecord], float | None]:
    """Multistart per duration T; the minimal feasible T meets target_error."""
    if list(durations) != sorted(durations):
        raise ValueError("durations must be ascending")
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(rng if rng is not None else cfg.seed)
    fci = exact_ground(spec.hamiltonian)[0]
    results: dict[float, OptimizationRecord] = {}
    minimal: float | None = None
    for T in durations:
        scaled = _rescale_total_time(spec.pulse_template, T)
        sub_spec = replace(spec, pulse_template=scaled)
        rec = multistart(sub_spec, n_starts, cfg, rng)
        results[float(T)] = rec
        if minimal is None and rec.best_energy - fci <= target_error:
            minimal = float(T)
            if stop_at_first_feasible:
                break
    return results, minimal


def _rescale_total_time(pulse_set: PulseSet, new_total: float) -> PulseSet:
    scale = new_total / pulse_set.total_time
    pulses = []
    for p in pulse_set.pulses:
        if isinstance(p, SquarePulse):
            pulses.append(
                replace(
                    p,
                    switch_times=tuple(t * scale for t in p.switch_times),
                    total_time=new_total,
                )
            )
        else:
            comps = tuple(
                replace(c, center=c.center * scale, width=c.width * scale)
                for c in p.components
            )
            pulses.append(replace(p, components=comps, total_time=new_total))
    return PulseSet(pulses=tuple(pulses), total_time=new_total)
