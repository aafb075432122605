"""Estimator-style front end so pulse optimization composes with sklearn tooling.

Both estimators take a qubit Hamiltonian (object, dict document, or path to
a Hamiltonian file) in fit() and expose the optimized pulses and energies as
trailing-underscore attributes. Hyperparameters follow sklearn conventions:
set in __init__, introspectable via get_params/set_params, untouched by fit.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import numpy as np
from sklearn.base import BaseEstimator

from .device import TransmonDevice, load_device
from .dynamics import EvolutionConfig
from .hamiltonians import QubitHamiltonian, load_hamiltonian, parse_hamiltonian
from .objective import ObjectiveSpec, energy
from .optimize import OptimizerConfig, adaptive_optimize, multistart
from .pulses import (
    ADAPTIVE_AMP_BOUND,
    ADAPTIVE_FREQ_WINDOW,
    DEFAULT_AMP_BOUND,
    DEFAULT_FREQ_WINDOW,
    pack,
    square_template,
)

__all__ = ["PulseVQE", "AdaptivePulseVQE", "check_hamiltonian", "check_device"]


def check_hamiltonian(X) -> QubitHamiltonian:
    """Validate/coerce fit() input into a QubitHamiltonian."""
    if isinstance(X, QubitHamiltonian):
        return X
    if isinstance(X, (str, Path)):
        return load_hamiltonian(X)
    if isinstance(X, Mapping):
        return parse_hamiltonian(X)
    raise TypeError(
        f"expected QubitHamiltonian, mapping document or path, got {type(X).__name__}"
    )


def check_device(device, n_qubits: int) -> TransmonDevice:
    if isinstance(device, (str, Path)):
        device = load_device(device)
    if not isinstance(device, TransmonDevice):
        raise TypeError("device must be a TransmonDevice or a path to a device file")
    if device.n_transmons != n_qubits:
        raise ValueError(
            f"device has {device.n_transmons} transmons but the Hamiltonian "
            f"needs {n_qubits}"
        )
    return device


class PulseVQE(BaseEstimator):
    """Ground-state search with a fixed number of square-pulse segments.

    fit(X) optimizes pulse amplitudes, switch times and drive frequencies
    (multistart L-BFGS-B) to minimize the molecular energy of X.

    Attributes after fit: energy_, error_vs_fci_, leakage_, overlap_,
    pulses_, record_.
    """

    def __init__(
        self,
        device=None,
        n_segments: int = 2,
        total_time: float = 9.0,
        dt: float = 0.01,
        amp_bound: float = DEFAULT_AMP_BOUND,
        freq_window: float = DEFAULT_FREQ_WINDOW,
        normalization: str = "normalized",
        spin_lambda: float = 0.0,
        n_starts: int = 10,
        max_iters: int = 1000,
        seed: int | None = None,
    ):
        self.device = device
        self.n_segments = n_segments
        self.total_time = total_time
        self.dt = dt
        self.amp_bound = amp_bound
        self.freq_window = freq_window
        self.normalization = normalization
        self.spin_lambda = spin_lambda
        self.n_starts = n_starts
        self.max_iters = max_iters
        self.seed = seed

    def _spec(self, hamiltonian: QubitHamiltonian) -> ObjectiveSpec:
        device = check_device(self.device, hamiltonian.n_qubits)
        template = square_template(
            device,
            self.n_segments,
            self.total_time,
            amp_bound=self.amp_bound,
            freq_window=self.freq_window,
        )
        return ObjectiveSpec(
            hamiltonian=hamiltonian,
            device=device,
            pulse_template=template,
            evolution=EvolutionConfig(dt=self.dt),
            normalization=self.normalization,
            spin_lambda=self.spin_lambda,
        )

    def fit(self, X, y=None):
        hamiltonian = check_hamiltonian(X)
        spec = self._spec(hamiltonian)
        cfg = OptimizerConfig(max_iters=self.max_iters, seed=self.seed)
        record = multistart(
            spec, self.n_starts, cfg, rng=np.random.default_rng(self.seed)
        )
        self.record_ = record
        self.energy_ = record.best_energy
        self.error_vs_fci_ = record.error_vs_fci
        self.leakage_ = record.leakage_final
        self.overlap_ = record.overlap_final
        from .pulses import unpack

        self.pulses_ = unpack(record.best_params, spec.pulse_template)
        self.spec_ = spec
        return self

    def predict(self, X=None):
        """Optimized molecular energy (Hartree). X is accepted for API symmetry."""
        self._check_fitted()
        return self.energy_

    def score(self, X=None, y=None):
        """Negative absolute error versus exact diagonalization."""
        self._check_fitted()
        return -abs(self.error_vs_fci_)

    def _check_fitted(self):
        if not hasattr(self, "record_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("call fit() first")


class AdaptivePulseVQE(BaseEstimator):
    """Ground-state search that grows square-pulse segments adaptively.

    Splits the largest segment and re-optimizes (warm start) until reaching
    target_error against exact diagonalization or max_segments. Switch times
    stay fixed; only amplitudes and drive frequencies are optimized.

    Attributes after fit: records_ (one per segment count) plus the same
    final-quality attributes as PulseVQE.
    """

    def __init__(
        self,
        device=None,
        max_segments: int = 5,
        target_error: float = 1.6e-3,
        total_time: float = 40.0,
        dt: float = 0.01,
        amp_bound: float = ADAPTIVE_AMP_BOUND,
        freq_window: float = ADAPTIVE_FREQ_WINDOW,
        normalization: str = "normalized",
        spin_lambda: float = 0.0,
        n1_starts: int = 4,
        max_iters: int = 1000,
        seed: int | None = None,
    ):
        self.device = device
        self.max_segments = max_segments
        self.target_error = target_error
        self.total_time = total_time
        self.dt = dt
        self.amp_bound = amp_bound
        self.freq_window = freq_window
        self.normalization = normalization
        self.spin_lambda = spin_lambda
        self.n1_starts = n1_starts
        self.max_iters = max_iters
        self.seed = seed

    def fit(self, X, y=None):
        hamiltonian = check_hamiltonian(X)
        device = check_device(self.device, hamiltonian.n_qubits)
        rng = np.random.default_rng(self.seed)
        template = square_template(
            device,
            1,
            self.total_time,
            amp_bound=self.amp_bound,
            freq_window=self.freq_window,
            amps=[
                [float(rng.uniform(-self.amp_bound, self.amp_bound))]
                for _ in range(device.n_transmons)
            ],
        )
        spec = ObjectiveSpec(
            hamiltonian=hamiltonian,
            device=device,
            pulse_template=template,
            evolution=EvolutionConfig(dt=self.dt),
            normalization=self.normalization,
            spin_lambda=self.spin_lambda,
        )
        cfg = OptimizerConfig(max_iters=self.max_iters, seed=self.seed)
        records = adaptive_optimize(
            spec,
            self.max_segments,
            self.target_error,
            rng=rng,
            cfg=cfg,
            n1_starts=self.n1_starts,
        )
        self.records_ = records
        final = records[-1]
        self.record_ = final
        self.energy_ = final.best_energy
        self.error_vs_fci_ = final.error_vs_fci
        self.leakage_ = final.leakage_final
        self.overlap_ = final.overlap_final
        self.spec_ = spec
        return self

    def score(self, X=None, y=None):
        if not hasattr(self, "records_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("call fit() first")
        return -abs(self.error_vs_fci_)
