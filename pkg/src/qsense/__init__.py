"""qsense: a qubit sensing simulator.

Monte-Carlo evolution of a driven two-level probe under deterministic and
stochastic fields, the standard pulsed sensing protocols built on top of
it, and the analysis layer (filter functions, noise spectroscopy,
sensitivity, Fisher information, phase estimation, collective-spin
enhancement) needed to close the loop against theory.

The subpackages group by task:

* :mod:`qsense.qubit`, :mod:`qsense.readout` -- the probe and its
  measurement back end;
* :mod:`qsense.signals` -- tones and noise spectral densities, plus
  colored-noise synthesis;
* :mod:`qsense.protocols`, :mod:`qsense.montecarlo` -- pulse sequences
  with their closed-form responses, and the trial-averaged simulator;
* :mod:`qsense.filters`, :mod:`qsense.walsh` -- modulation and weighting
  functions, decoherence integrals, spectral reconstruction;
* :mod:`qsense.sensitivity`, :mod:`qsense.fisher` -- detection limits,
  Allan variance, information bounds;
* :mod:`qsense.phase_estimation`, :mod:`qsense.collective` -- high
  dynamic-range estimators and entanglement-enhanced scaling;
* :mod:`qsense.experiments`, :mod:`qsense.cli` -- the config-driven run
  registry and its command-line front end.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .experiments import (
    ExperimentConfig,
    list_experiments,
    run_experiment,
    validate_config,
)
from .montecarlo import ToneEnsemble, simulate_protocol
from .protocols import SequenceSpec
from .qubit import InternalHamiltonian, QubitState
from .signals import LorentzianPSD, PowerLawPSD, ToneSpec, WhitePSD

__all__ = [
    "ExperimentConfig",
    "InternalHamiltonian",
    "LorentzianPSD",
    "PowerLawPSD",
    "QubitState",
    "SequenceSpec",
    "ToneEnsemble",
    "ToneSpec",
    "WhitePSD",
    "__version__",
    "backend_name",
    "list_experiments",
    "run_experiment",
    "simulate_protocol",
    "validate_config",
]
