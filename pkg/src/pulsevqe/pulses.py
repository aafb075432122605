"""Parameterized drive pulses and their flat optimizer parameterization.

Square pulses are piecewise constant with right-continuous switching:
the amplitude on [t_{j-1}, t_j) is c_j and the final instant t = T belongs
to the last segment. Gaussian pulses are sums of Gaussian components.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .device import TransmonDevice

__all__ = [
    "PulseError",
    "SquarePulse",
    "GaussianComponent",
    "GaussianPulse",
    "PulseSet",
    "ParamVector",
    "amplitude_at",
    "pack",
    "unpack",
    "unpack_ex",
    "split_largest_segment",
    "square_template",
    "parse_pulse_set",
    "load_pulse_set",
    "serialize_pulse_set",
]

DEFAULT_AMP_BOUND = 0.02          # GHz (20 MHz)
ADAPTIVE_AMP_BOUND = 0.04         # GHz (40 MHz)
DEFAULT_FREQ_WINDOW = 1.0         # GHz around the transmon frequency
ADAPTIVE_FREQ_WINDOW = 1.5        # GHz
SWITCH_MARGIN = 0.1               # ns kept clear of 0, T and random splits
MIN_GAUSS_WIDTH = 0.1             # ns
AMP_GRID_POINTS = 1001            # bound check grid for Gaussian envelopes


class PulseError(ValueError):
    """Invalid pulse parameterization."""


@dataclass(frozen=True)
class SquarePulse:
    """Piecewise-constant drive envelope for one transmon.

    amps[j] applies on [switch_times[j-1], switch_times[j]); frequencies in
    GHz (2*pi GHz angular), times in ns.
    """

    amps: tuple[float, ...]
    switch_times: tuple[float, ...]
    freq: float
    total_time: float
    amp_bound: float = DEFAULT_AMP_BOUND
    freq_bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.total_time <= 0:
            raise PulseError("total_time must be positive")
        if len(self.amps) != len(self.switch_times) + 1:
            raise PulseError(
                f"{len(self.amps)} amplitudes need {len(self.amps) - 1} switch times"
            )
        prev = 0.0
        for t in self.switch_times:
            if not prev < t < self.total_time:
                raise PulseError(
                    f"switch times must be strictly increasing in (0, {self.total_time})"
                )
            prev = t
        tol = 1e-12
        for c in self.amps:
            if abs(c) > self.amp_bound + tol:
                raise PulseError(
                    f"amplitude {c} exceeds bound {self.amp_bound} GHz"
                )
        if self.freq_bounds is not None:
            lo, hi = self.freq_bounds
            if not lo - tol <= self.freq <= hi + tol:
                raise PulseError(
                    f"drive frequency {self.freq} outside window [{lo}, {hi}]"
                )

    @property
    def n_segments(self) -> int:
        return len(self.amps)

    def segment_edges(self) -> np.ndarray:
        return np.array((0.0, *self.switch_times, self.total_time))


@dataclass(frozen=True)
class GaussianComponent:
    amp: float       # GHz
    center: float    # ns
    width: float     # ns, > 0


@dataclass(frozen=True)
class GaussianPulse:
    """Sum-of-Gaussians drive envelope for one transmon."""

    components: tuple[GaussianComponent, ...]
    freq: float
    total_time: float
    amp_bound: float = DEFAULT_AMP_BOUND
    freq_bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.total_time <= 0:
            raise PulseError("total_time must be positive")
        if not self.components:
            raise PulseError("at least one Gaussian component required")
        for comp in self.components:
            if comp.width <= 0:
                raise PulseError("Gaussian width must be positive")
        grid = np.linspace(0.0, self.total_time, AMP_GRID_POINTS)
        env = self.envelope(grid)
        if np.max(np.abs(env)) > self.amp_bound + 1e-9:
            raise PulseError(
                f"Gaussian envelope exceeds amplitude bound {self.amp_bound} GHz"
            )
        if self.freq_bounds is not None:
            lo, hi = self.freq_bounds
            if not lo - 1e-12 <= self.freq <= hi + 1e-12:
                raise PulseError(
                    f"drive frequency {self.freq} outside window [{lo}, {hi}]"
                )

    def envelope(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for comp in self.components:
            out += comp.amp * np.exp(-((t - comp.center) ** 2) / (2 * comp.width**2))
        return out


Pulse = SquarePulse | GaussianPulse


@dataclass(frozen=True)
class PulseSet:
    """One pulse per transmon, all sharing the total duration."""

    pulses: tuple[Pulse, ...]
    total_time: float

    def __post_init__(self):
        if not self.pulses:
            raise PulseError("empty pulse set")
        kinds = {type(p) for p in self.pulses}
        if len(kinds) > 1:
            raise PulseError("pulse set must be of uniform kind")
        for p in self.pulses:
            if abs(p.total_time - self.total_time) > 1e-12:
                raise PulseError("all pulses must share total_time")

    @property
    def kind(self) -> str:
        return "square" if isinstance(self.pulses[0], SquarePulse) else "gaussian"

    @property
    def n_transmons(self) -> int:
        return len(self.pulses)


def amplitude_at(pulse: Pulse, t: float) -> float:
    """Drive envelope value at time t in [0, T], right-continuous at switches."""
    if not 0.0 <= t <= pulse.total_time:
        raise PulseError(f"t={t} outside [0, {pulse.total_time}]")
    if isinstance(pulse, SquarePulse):
        return pulse.amps[bisect.bisect_right(pulse.switch_times, t)]
    return float(pulse.envelope(np.array([t]))[0])


# ---------------------------------------------------------------------------
# Flat parameter vectors
# ---------------------------------------------------------------------------

ROLE_AMP = "amp"
ROLE_SWITCH = "switch_time"
ROLE_FREQ = "freq"
ROLE_GAUSS_AMP = "gauss_amp"
ROLE_GAUSS_CENTER = "gauss_center"
ROLE_GAUSS_WIDTH = "gauss_width"


@dataclass(frozen=True)
class ParamVector:
    """Flat parameter values with a (transmon, role, index) layout and bounds."""

    values: tuple[float, ...]
    layout: tuple[tuple[int, str, int], ...]
    bounds: tuple[tuple[float, float], ...]
    mode: str = "full"

    def __post_init__(self):
        if not (len(self.values) == len(self.layout) == len(self.bounds)):
            raise PulseError("values, layout and bounds must align")
        if self.mode not in ("full", "adaptive"):
            raise PulseError(f"unknown packing mode {self.mode!r}")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def with_values(self, values: Sequence[float]) -> "ParamVector":
        values = tuple(float(v) for v in values)
        if len(values) != len(self.layout):
            raise PulseError("replacement values do not match layout")
        return replace(self, values=values)

    def entries(self, role: str) -> list[int]:
        return [i for i, (_, r, _) in enumerate(self.layout) if r == role]


def pack(pulse_set: PulseSet, mode: str = "full") -> ParamVector:
    """Flatten a pulse set for the optimizer.

    full mode packs amplitudes + switch times + frequency per transmon;
    adaptive mode packs amplitudes + frequency only (switch times frozen).
    """
    if mode not in ("full", "adaptive"):
        raise PulseError(f"unknown packing mode {mode!r}")
    values: list[float] = []
    layout: list[tuple[int, str, int]] = []
    bounds: list[tuple[float, float]] = []
    T = pulse_set.total_time
    for k, pulse in enumerate(pulse_set.pulses):
        freq_bounds = pulse.freq_bounds or (
            pulse.freq - DEFAULT_FREQ_WINDOW,
            pulse.freq + DEFAULT_FREQ_WINDOW,
        )
        if isinstance(pulse, SquarePulse):
            for j, c in enumerate(pulse.amps):
                values.append(c)
                layout.append((k, ROLE_AMP, j))
                bounds.append((-pulse.amp_bound, pulse.amp_bound))
            if mode == "full":
                for j, t in enumerate(pulse.switch_times):
                    values.append(t)
                    layout.append((k, ROLE_SWITCH, j))
                    bounds.append((SWITCH_MARGIN, T - SWITCH_MARGIN))
        else:
            if mode == "adaptive":
                raise PulseError("adaptive packing requires square pulses")
            for i, comp in enumerate(pulse.components):
                values.append(comp.amp)
                layout.append((k, ROLE_GAUSS_AMP, i))
                bounds.append((-pulse.amp_bound, pulse.amp_bound))
                values.append(comp.center)
                layout.append((k, ROLE_GAUSS_CENTER, i))
                bounds.append((0.0, T))
                values.append(comp.width)
                layout.append((k, ROLE_GAUSS_WIDTH, i))
                bounds.append((MIN_GAUSS_WIDTH, T))
        values.append(pulse.freq)
        layout.append((k, ROLE_FREQ, 0))
        bounds.append(freq_bounds)
    return ParamVector(
        values=tuple(values), layout=tuple(layout), bounds=tuple(bounds), mode=mode
    )


def _repair_sorted(times: list[float], lo: float, hi: float) -> tuple[list[float], int]:
    """Sorted projection into [lo, hi] with strict ordering preserved."""
    repairs = 0
    fixed = sorted(times)
    if fixed != times:
        repairs += 1
    out = []
    prev = lo - 1.0
    for t in fixed:
        t2 = min(max(t, lo), hi)
        if t2 != t:
            repairs += 1
        if t2 <= prev:
            t2 = np.nextafter(prev, np.inf)
            repairs += 1
        out.append(t2)
        prev = t2
    return out, repairs


def unpack_ex(params: ParamVector, template: PulseSet) -> tuple[PulseSet, int]:
    """Rebuild a pulse set from flat values; returns (set, repair_count).

    Crossed switch times are re-sorted (sorted projection) and out-of-bound
    values are clamped; each intervention increments the repair counter.
    """
    reference = pack(template, params.mode)
    if reference.layout != params.layout:
        raise PulseError("parameter layout does not match template")
    repairs = 0
    per_transmon: dict[int, dict[str, dict[int, float]]] = {}
    for (k, role, idx), value, (lo, hi) in zip(
        params.layout, params.values, params.bounds
    ):
        clamped = min(max(value, lo), hi)
        if clamped != value:
            repairs += 1
        per_transmon.setdefault(k, {}).setdefault(role, {})[idx] = clamped
    pulses = []
    for k, pulse in enumerate(template.pulses):
        roles = per_transmon.get(k, {})
        freq = roles[ROLE_FREQ][0]
        if isinstance(pulse, SquarePulse):
            amps = tuple(
                roles[ROLE_AMP][j] for j in range(pulse.n_segments)
            )
            if params.mode == "full" and pulse.switch_times:
                raw = [roles[ROLE_SWITCH][j] for j in range(len(pulse.switch_times))]
                fixed, extra = _repair_sorted(
                    raw, SWITCH_MARGIN, template.total_time - SWITCH_MARGIN
                )
                repairs += extra
                switch = tuple(fixed)
            else:
                switch = pulse.switch_times
            pulses.append(replace(pulse, amps=amps, switch_times=switch, freq=freq))
        else:
            comps = tuple(
                GaussianComponent(
                    amp=roles[ROLE_GAUSS_AMP][i],
                    center=roles[ROLE_GAUSS_CENTER][i],
                    width=roles[ROLE_GAUSS_WIDTH][i],
                )
                for i in range(len(pulse.components))
            )
            # A summed envelope can exceed the bound even with in-bound
            # components; rescale amplitudes and count it as one repair.
            trial_amps = [c.amp for c in comps]
            grid = np.linspace(0.0, template.total_time, AMP_GRID_POINTS)
            env = np.zeros_like(grid)
            for c in comps:
                env += c.amp * np.exp(-((grid - c.center) ** 2) / (2 * c.width**2))
            peak = float(np.max(np.abs(env)))
            if peak > pulse.amp_bound:
                scale = pulse.amp_bound / peak
                comps = tuple(replace(c, amp=c.amp * scale) for c in comps)
                repairs += 1
            pulses.append(replace(pulse, components=comps, freq=freq))
    return PulseSet(pulses=tuple(pulses), total_time=template.total_time), repairs


def unpack(params: ParamVector, template: PulseSet) -> PulseSet:
    return unpack_ex(params, template)[0]


def split_largest_segment(
    pulse: SquarePulse, rng: np.random.Generator
) -> SquarePulse:
    """Split the longest segment at a random interior time.

    Both children inherit the parent amplitude, so the envelope is unchanged.
    Falls back to the midpoint when the segment is shorter than twice the
    margin.
    """
    edges = pulse.segment_edges()
    durations = np.diff(edges)
    j = int(np.argmax(durations))
    start, end = float(edges[j]), float(edges[j + 1])
    if end - start < 2 * SWITCH_MARGIN:
        cut = 0.5 * (start + end)
    else:
        cut = float(rng.uniform(start + SWITCH_MARGIN, end - SWITCH_MARGIN))
    amps = pulse.amps[: j + 1] + (pulse.amps[j],) + pulse.amps[j + 1 :]
    switch = tuple(sorted(pulse.switch_times + (cut,)))
    return replace(pulse, amps=amps, switch_times=switch)


def square_template(
    device: TransmonDevice,
    n_segments: int,
    total_time: float,
    amp_bound: float = DEFAULT_AMP_BOUND,
    freq_window: float = DEFAULT_FREQ_WINDOW,
    amps: Sequence[Sequence[float]] | None = None,
) -> PulseSet:
    """Equal-length square segments on every transmon, driven at resonance."""
    edges = np.linspace(0.0, total_time, n_segments + 1)[1:-1]
    pulses = []
    for k in range(device.n_transmons):
        amp_k = tuple(amps[k]) if amps is not None else (0.0,) * n_segments
        pulses.append(
            SquarePulse(
                amps=amp_k,
                switch_times=tuple(float(t) for t in edges),
                freq=device.omega[k],
                total_time=total_time,
                amp_bound=amp_bound,
                freq_bounds=(device.omega[k] - freq_window, device.omega[k] + freq_window),
            )
        )
    return PulseSet(pulses=tuple(pulses), total_time=total_time)


# ---------------------------------------------------------------------------
# Pulse file schema (JSON):
# {"kind": "square"|"gaussian", "total_time": T,
#  "pulses": [{"freq": .., "amps": [..], "switch_times": [..],
#              "amp_bound": .., "freq_bounds": [lo, hi]}, ...]        (square)
#  or        [{"freq": .., "components": [{"amp","center","width"}]}]  (gaussian)
# }
# ---------------------------------------------------------------------------


def parse_pulse_set(document: str | Mapping[str, Any]) -> PulseSet:
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise PulseError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    else:
        doc = dict(document)
    try:
        kind = doc["kind"]
        total_time = float(doc["total_time"])
        pulses: list[Pulse] = []
        for entry in doc["pulses"]:
            common = dict(
                freq=float(entry["freq"]),
                total_time=total_time,
                amp_bound=float(entry.get("amp_bound", DEFAULT_AMP_BOUND)),
                freq_bounds=tuple(entry["freq_bounds"]) if entry.get("freq_bounds") else None,
            )
            if kind == "square":
                pulses.append(
                    SquarePulse(
                        amps=tuple(float(c) for c in entry["amps"]),
                        switch_times=tuple(float(t) for t in entry.get("switch_times", [])),
                        **common,
                    )
                )
            elif kind == "gaussian":
                pulses.append(
                    GaussianPulse(
                        components=tuple(
                            GaussianComponent(
                                amp=float(c["amp"]),
                                center=float(c["center"]),
                                width=float(c["width"]),
                            )
                            for c in entry["components"]
                        ),
                        **common,
                    )
                )
            else:
                raise PulseError(f"unknown pulse kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PulseError):
            raise
        raise PulseError(f"invalid pulse document: {exc}") from exc
    return PulseSet(pulses=tuple(pulses), total_time=total_time)


def load_pulse_set(path: str | Path) -> PulseSet:
    return parse_pulse_set(Path(path).read_text(encoding="utf-8"))


def serialize_pulse_set(pulse_set: PulseSet) -> str:
    entries = []
    for pulse in pulse_set.pulses:
        entry: dict[str, Any] = {"freq": pulse.freq, "amp_bound": pulse.amp_bound}
        if pulse.freq_bounds is not None:
            entry["freq_bounds"] = list(pulse.freq_bounds)
        if isinstance(pulse, SquarePulse):
            entry["amps"] = list(pulse.amps)
            entry["switch_times"] = list(pulse.switch_times)
        else:
            entry["components"] = [
                {"amp": c.amp, "center": c.center, "width": c.width}
                for c in pulse.components
            ]
        entries.append(entry)
    return json.dumps(
        {
            "kind": pulse_set.kind,
            "total_time": pulse_set.total_time,
            "pulses": entries,
        },
        indent=1,
    )
