"""Command-line front end.

Subcommands: exact, evolve, optimize, adapt, scan, noise, gradcheck.
Machine-readable outputs carry a schema_version marker (JSON field, or a
leading `# schema_version=N` comment line in CSV files). Exit codes:
0 success, 1 check failure, 2 I/O or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .device import DeviceError, load_device
from .dynamics import EvolutionConfig, IntegratorError, embed_reference, evolve, leakage
from .hamiltonians import (
    HamiltonianError,
    exact_ground,
    expectation,
    load_hamiltonian,
    overlap_with_ground,
)
from .objective import (
    ObjectiveSpec,
    ProjectionError,
    energy,
    gradient,
    project_normalize,
    value_and_gradient,
)
from .optimize import (
    OptimizerConfig,
    adaptive_optimize,
    duration_search,
    minimize,
    multistart,
)
from .pulses import (
    ADAPTIVE_AMP_BOUND,
    ADAPTIVE_FREQ_WINDOW,
    DEFAULT_AMP_BOUND,
    DEFAULT_FREQ_WINDOW,
    PulseError,
    load_pulse_set,
    pack,
    serialize_pulse_set,
    square_template,
    unpack,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2


class CliError(Exception):
    """Input/validation failure mapped to exit code 2."""


def _load_inputs(args, need_device=False, need_pulse=False):
    try:
        hamiltonian = load_hamiltonian(args.hamiltonian)
    except FileNotFoundError as exc:
        raise CliError(f"hamiltonian file not found: {args.hamiltonian}") from exc
    except HamiltonianError as exc:
        raise CliError(f"invalid hamiltonian: {exc}") from exc
    device = pulse_set = None
    if need_device:
        if not args.device:
            raise CliError("--device is required for this subcommand")
        try:
            device = load_device(args.device)
        except FileNotFoundError as exc:
            raise CliError(f"device file not found: {args.device}") from exc
        except DeviceError as exc:
            raise CliError(f"invalid device: {exc}") from exc
    if need_pulse:
        if not args.pulse:
            raise CliError("--pulse is required for this subcommand")
        try:
            pulse_set = load_pulse_set(args.pulse)
        except FileNotFoundError as exc:
            raise CliError(f"pulse file not found: {args.pulse}") from exc
        except PulseError as exc:
            raise CliError(f"invalid pulse file: {exc}") from exc
    return hamiltonian, device, pulse_set


def _outdir(args) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict):
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=1), encoding="utf-8")


def _record_payload(rec) -> dict:
    # wall-clock intentionally omitted: outputs are bit-reproducible per seed
    return {
        "best_energy": rec.best_energy,
        "error_vs_fci": rec.error_vs_fci,
        "leakage": rec.leakage_final,
        "overlap": rec.overlap_final,
        "n_energy_evals": rec.n_energy_evals,
        "n_grad_evals": rec.n_grad_evals,
        "converged": rec.converged,
        "start_index": rec.start_index,
        "n_segments": rec.n_segments,
        "trace": list(rec.trace),
        "params": {
            "values": list(rec.best_params.values),
            "layout": [list(entry) for entry in rec.best_params.layout],
            "bounds": [list(b) for b in rec.best_params.bounds],
            "mode": rec.best_params.mode,
        },
    }


def _spec_from_args(args, hamiltonian, device, pulse_set) -> ObjectiveSpec:
    return ObjectiveSpec(
        hamiltonian=hamiltonian,
        device=device,
        pulse_template=pulse_set,
        evolution=EvolutionConfig(dt=args.dt),
        normalization="unnormalized" if args.unnormalized else "normalized",
        spin_lambda=args.spin_lambda,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_exact(args) -> int:
    hamiltonian, _, _ = _load_inputs(args)
    e_fci, _ = exact_ground(hamiltonian)
    e_hf = expectation(hamiltonian.reference_vector, hamiltonian)
    print(f"HF  energy: {e_hf:.10f} Hartree")
    print(f"FCI energy: {e_fci:.10f} Hartree")
    print(f"correlation: {(e_hf - e_fci) * 1000:.6f} mHa")
    if args.out:
        _write_json(
            _outdir(args) / "exact.json",
            {"hf_energy": e_hf, "fci_energy": e_fci,
             "hamiltonian": str(args.hamiltonian)},
        )
    return EXIT_OK


def cmd_evolve(args) -> int:
    hamiltonian, device, pulse_set = _load_inputs(args, need_device=True, need_pulse=True)
    config = EvolutionConfig(dt=args.dt, snapshot_stride=args.snapshots)
    psi0 = embed_reference(hamiltonian.reference_state, device)
    if args.auto_dt:
        from .dynamics import evolve_converged

        result, dt_used = evolve_converged(
            device, pulse_set, psi0, config, hamiltonian
        )
        if dt_used != args.dt:
            print(f"auto-dt: refined to dt={dt_used}")
        config = EvolutionConfig(dt=dt_used, snapshot_stride=args.snapshots)
    result = evolve(device, pulse_set, psi0, config, hamiltonian)
    e_fci, _ = exact_ground(hamiltonian)
    projected = project_normalize(result.final_state, device, "normalized")
    e_final = expectation(projected, hamiltonian)
    leak = leakage(result.final_state, device)
    print(f"final energy: {e_final:.10f} Hartree")
    print(f"error vs FCI: {e_final - e_fci:.3e} Hartree")
    print(f"leakage: {leak:.6f}")
    print(f"norm drift: {result.norm_drift:.3e}")
    if result.trajectory is not None:
        rows = [
            [t, e, e - e_fci, l] for (t, e, l) in result.trajectory
        ]
        out = _outdir(args) / "trajectory.csv"
        _write_csv(out, ["t_ns", "energy_hartree", "energy_error_vs_fci", "leakage"], rows)
        print(f"wrote {out} ({len(rows)} snapshots)")
    return EXIT_OK


def cmd_optimize(args) -> int:
    hamiltonian, device, pulse_set = _load_inputs(args, need_device=True)
    if pulse_set is None:
        pulse_set = square_template(
            device, args.segments, args.total_time,
            amp_bound=args.amp_bound, freq_window=args.freq_window,
        )
    spec = _spec_from_args(args, hamiltonian, device, pulse_set)
    cfg = OptimizerConfig(max_iters=args.max_iters, seed=args.seed)
    rec = multistart(spec, args.starts, cfg, rng=np.random.default_rng(args.seed))
    print(
        f"best energy {rec.best_energy:.10f} Hartree | error {rec.error_vs_fci:.3e} "
        f"| leakage {rec.leakage_final:.4f} | overlap {rec.overlap_final:.6f}"
    )
    out = _outdir(args)
    _write_json(out / "optimization.json", _record_payload(rec))
    _write_csv(
        out / "trace.csv",
        ["iteration", "best_energy"],
        [[i, e] for i, e in enumerate(rec.trace)],
    )
    best_set = unpack(rec.best_params, spec.pulse_template)
    (out / "optimized_pulse.json").write_text(serialize_pulse_set(best_set))
    print(f"wrote {out}/optimization.json, trace.csv, optimized_pulse.json")
    return EXIT_OK


def cmd_adapt(args) -> int:
    hamiltonian, device, _ = _load_inputs(args, need_device=True)
    rng = np.random.default_rng(args.seed)
    template = square_template(
        device, 1, args.total_time,
        amp_bound=args.amp_bound, freq_window=args.freq_window,
        amps=[[float(rng.uniform(-args.amp_bound, args.amp_bound))]
              for _ in range(device.n_transmons)],
    )
    spec = _spec_from_args(args, hamiltonian, device, template)
    spec = replace(spec, freq_gradient="analytic")
    cfg = OptimizerConfig(max_iters=args.max_iters, seed=args.seed)
    records = adaptive_optimize(
        spec, args.max_segments, args.target_error, rng=rng, cfg=cfg,
        n1_starts=args.n1_starts,
    )
    out = _outdir(args)
    rows = []
    for rec in records:
        print(
            f"n={rec.n_segments}: energy {rec.best_energy:.10f} | error "
            f"{rec.error_vs_fci:.3e} | leakage {rec.leakage_final:.4f} "
            f"| overlap {rec.overlap_final:.6f}"
        )
        rows.append(
            [rec.n_segments, rec.best_energy, rec.error_vs_fci,
             rec.leakage_final, rec.overlap_final]
        )
        _write_json(out / f"adapt_n{rec.n_segments}.json", _record_payload(rec))
    _write_csv(
        out / "adapt_segments.csv",
        ["n_segments", "energy_hartree", "error_vs_fci", "leakage", "overlap"],
        rows,
    )
    if records[-1].pulse_json:
        (out / "optimized_pulse.json").write_text(records[-1].pulse_json)
    print(f"wrote {out}/adapt_segments.csv and per-stage records")
    return EXIT_OK


def cmd_scan(args) -> int:
    out = _outdir(args)
    rows = []
    worst = 0.0
    for path in args.hamiltonians:
        try:
            hamiltonian = load_hamiltonian(path)
        except (FileNotFoundError, HamiltonianError) as exc:
            raise CliError(f"{path}: {exc}") from exc
        try:
            device = load_device(args.device)
        except (FileNotFoundError, DeviceError, TypeError) as exc:
            raise CliError(f"device: {exc}") from exc
        r = float(hamiltonian.metadata.get("bond_length_angstrom", float("nan")))
        e_fci, _ = exact_ground(hamiltonian)
        e_hf = expectation(hamiltonian.reference_vector, hamiltonian)
        template = square_template(
            device, args.segments, args.durations[0],
            amp_bound=args.amp_bound, freq_window=args.freq_window,
        )
        spec = _spec_from_args(args, hamiltonian, device, template)
        cfg = OptimizerConfig(max_iters=args.max_iters, seed=args.seed)
        results, minimal = duration_search(
            spec, args.durations, args.target_error, cfg,
            rng=np.random.default_rng(args.seed), n_starts=args.starts,
            stop_at_first_feasible=True,
        )
        pulse_t = minimal if minimal is not None else args.durations[-1]
        rec = results[pulse_t]
        worst = max(worst, rec.error_vs_fci)
        rows.append(
            [r, e_hf, rec.best_energy, e_fci, rec.error_vs_fci,
             rec.leakage_final, rec.overlap_final, pulse_t]
        )
        print(
            f"r={r:.2f} A: error {rec.error_vs_fci:.3e} | overlap "
            f"{rec.overlap_final:.4f} | T={pulse_t} ns"
        )
    _write_csv(
        out / "scan.csv",
        ["r_angstrom", "e_hf", "e_ctrlvqe", "e_fci", "error", "leakage",
         "overlap", "pulse_T"],
        rows,
    )
    print(f"wrote {out}/scan.csv")
    if args.target_error and worst > args.target_error:
        print(f"worst error {worst:.3e} exceeds target {args.target_error:.1e}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def run_noise_study(
    spec: ObjectiveSpec,
    pulse_set,
    sigmas,
    n_samples: int,
    rng: np.random.Generator,
):
    """Mean energy error vs FCI under Gaussian parameter noise, per sigma.

    Every parameter is perturbed in its native unit (GHz for amplitudes and
    frequencies, ns for switch times), clamped to its bounds.
    """
    params = pack(pulse_set, "full")
    base = params.as_array()
    lo = np.array([b[0] for b in params.bounds])
    hi = np.array([b[1] for b in params.bounds])
    e_fci, _ = exact_ground(spec.hamiltonian)
    out = []
    for sigma in sigmas:
        errors = np.empty(n_samples)
        for i in range(n_samples):
            if sigma == 0.0:
                x = base
            else:
                x = np.clip(base + rng.normal(0.0, sigma, base.shape), lo, hi)
            errors[i] = energy(params.with_values(x), spec) - e_fci
        stderr = errors.std(ddof=1) / np.sqrt(n_samples) if n_samples > 1 else 0.0
        out.append((float(sigma), float(errors.mean()), float(stderr)))
    return out


def cmd_noise(args) -> int:
    hamiltonian, device, pulse_set = _load_inputs(args, need_device=True, need_pulse=True)
    spec = _spec_from_args(args, hamiltonian, device, pulse_set)
    rng = np.random.default_rng(args.seed)
    table = run_noise_study(spec, pulse_set, args.sigmas, args.samples, rng)
    for sigma, mean, stderr in table:
        print(f"sigma={sigma:9.2e}: mean error {mean:.6e} +- {stderr:.2e} Hartree")
    out = _outdir(args)
    _write_csv(
        out / "noise.csv",
        ["sigma", "mean_error_hartree", "stderr_hartree", "n_samples"],
        [[s, m, e, args.samples] for s, m, e in table],
    )
    print(f"wrote {out}/noise.csv")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    hamiltonian, device, pulse_set = _load_inputs(args, need_device=True, need_pulse=True)
    spec = _spec_from_args(args, hamiltonian, device, pulse_set)
    params = pack(pulse_set, args.mode)
    report = gradient(params, spec, measure_cost=True)
    base = params.as_array()
    rows = []
    worst = 0.0
    n_fail = 0
    for i, (k, role, idx) in enumerate(params.layout):
        h = args.h if args.h else (1e-6 if role != "switch_time" else 1e-4)
        lo, hi = params.bounds[i]
        up, dn = min(base[i] + h, hi), max(base[i] - h, lo)
        xp = base.copy()
        xp[i] = up
        xm = base.copy()
        xm[i] = dn
        fd = (energy(params.with_values(xp), spec)
              - energy(params.with_values(xm), spec)) / (up - dn)
        dev_abs = abs(report.grad[i] - fd)
        rel = dev_abs / max(abs(fd), 1e-300)
        # an entry passes on relative agreement, or absolutely near zeros
        ok = rel < args.threshold or dev_abs < args.abs_floor
        if not ok:
            n_fail += 1
        else:
            worst = max(worst, min(rel, 1.0) if dev_abs >= args.abs_floor else 0.0)
        rows.append([i, k, role, idx, report.grad[i], fd, rel,
                     bool(report.analytic_mask[i])])
        print(
            f"[{i:3d}] t{k} {role:12s}#{idx} analytic={report.grad[i]: .6e} "
            f"fd={fd: .6e} rel={rel:.2e}{'' if ok else '  FAIL'}"
        )
    print(
        f"max relative deviation (entries over the {args.abs_floor:.0e} "
        f"absolute floor): {worst:.3e}  (threshold {args.threshold:.0e})"
    )
    print(f"gradient/energy cost ratio: {report.cost_ratio:.2f}")
    if args.out:
        _write_csv(
            _outdir(args) / "gradcheck.csv",
            ["index", "transmon", "role", "role_index", "analytic", "fd",
             "rel_dev", "is_analytic"],
            rows,
        )
    return EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsevqe",
        description="Pulse-level VQE on a simulated coupled-transmon device.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, device=False, pulse=False):
        p.add_argument("--hamiltonian", required=True)
        if device:
            p.add_argument("--device")
        if pulse:
            p.add_argument("--pulse")
        p.add_argument("--dt", type=float, default=0.01)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--normalized", dest="unnormalized", action="store_false")
        p.add_argument("--unnormalized", dest="unnormalized", action="store_true")
        p.set_defaults(unnormalized=False)
        p.add_argument("--spin-lambda", dest="spin_lambda", type=float, default=0.0)
        p.add_argument("--amp-bound", dest="amp_bound", type=float,
                       default=DEFAULT_AMP_BOUND)
        p.add_argument("--freq-window", dest="freq_window", type=float,
                       default=DEFAULT_FREQ_WINDOW)

    p = sub.add_parser("exact", help="HF and FCI reference energies")
    common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("evolve", help="propagate a pulse file; optional trajectory")
    common(p, device=True, pulse=True)
    p.add_argument("--snapshots", type=int, default=0,
                   help="snapshot stride in steps of dt (0 = none)")
    p.add_argument("--auto-dt", action="store_true",
                   help="halve dt until the projected energy is stable to 1e-7")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("optimize", help="multistart pulse optimization")
    common(p, device=True, pulse=True)
    p.add_argument("--segments", type=int, default=2)
    p.add_argument("--total-time", dest="total_time", type=float, default=9.0)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=1000)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("adapt", help="adaptive segment-growth optimization")
    common(p, device=True)
    p.add_argument("--total-time", dest="total_time", type=float, default=40.0)
    p.add_argument("--max-segments", dest="max_segments", type=int, default=5)
    p.add_argument("--target-error", dest="target_error", type=float, default=1.6e-3)
    p.add_argument("--n1-starts", dest="n1_starts", type=int, default=4)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=1000)
    p.set_defaults(func=cmd_adapt, amp_bound=ADAPTIVE_AMP_BOUND,
                   freq_window=ADAPTIVE_FREQ_WINDOW)

    p = sub.add_parser("scan", help="optimize a series of Hamiltonian fixtures")
    common(p, device=True)
    p.add_argument("--hamiltonians", nargs="+", required=True)
    p.add_argument("--segments", type=int, default=2)
    p.add_argument("--durations", type=float, nargs="+", default=[9.0, 18.0, 30.0])
    p.add_argument("--target-error", dest="target_error", type=float, default=1.6e-3)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=500)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("noise", help="Gaussian control-noise study")
    common(p, device=True, pulse=True)
    p.add_argument("--sigmas", type=float, nargs="+",
                   default=[1e-4, 1e-3, 1e-2, 1e-1])
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    common(p, device=True, pulse=True)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--mode", choices=("full", "adaptive"), default="full")
    p.add_argument("--threshold", type=float, default=1e-5,
                   help="relative deviation gate")
    p.add_argument("--abs-floor", dest="abs_floor", type=float, default=1e-9,
                   help="absolute deviation accepted near zero gradients")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (HamiltonianError, DeviceError, PulseError, ProjectionError,
            IntegratorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
