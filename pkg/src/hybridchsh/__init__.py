"""Simulator and optimizer for CHSH tests on atom-photon superposition states.

The measured system is a single trapped emitter entangled with at most
one photon in a collection mode. One party measures the emitter in
rotated internal bases; the other measures the mode either with a
threshold photon counter or with sign-binned balanced homodyne. The
package builds the joint state including transmission loss, counter
inefficiency, branching to spectator levels, and dephasing, evaluates
the four CHSH correlators, and maximizes their combination over the
measurement strategy.
"""
from .chsh import (ALPHA_STAR, DEFAULT_STARTS, S_STAR_COUNTING_HOMODYNE,
                   S_STAR_TWO_HOMODYNE, VIOLATION_MARGIN, BranchingSlope,
                   ChshResult, Fig2Curve, Fig2Result, FreeParam,
                   OptimizerTrace, Scenario, ThresholdResult, branching_scenario,
                   branching_slope, build_state, counting_homodyne_scenario,
                   evaluate, figure2_sweep, optimize, threshold,
                   two_homodyne_scenario)
from .errors import ConfigError, ConvergenceError, DomainError
from .hilbert import HybridState, StateValidation, validate_state
from .measure import (AtomSetting, Counting, ProbTable, Quadrature, correlator,
                      correlator_closed_form, joint_probs)
from .model import (Imperfections, StateParams, TrapParams, apply_dephasing,
                    apply_loss, branching_state, ideal_state, motional_fidelity)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_STAR",
    "AtomSetting",
    "BranchingSlope",
    "ChshResult",
    "ConfigError",
    "ConvergenceError",
    "Counting",
    "DEFAULT_STARTS",
    "DomainError",
    "Fig2Curve",
    "Fig2Result",
    "FreeParam",
    "HybridState",
    "Imperfections",
    "OptimizerTrace",
    "ProbTable",
    "Quadrature",
    "S_STAR_COUNTING_HOMODYNE",
    "S_STAR_TWO_HOMODYNE",
    "Scenario",
    "StateParams",
    "StateValidation",
    "ThresholdResult",
    "TrapParams",
    "VIOLATION_MARGIN",
    "apply_dephasing",
    "apply_loss",
    "branching_scenario",
    "branching_slope",
    "branching_state",
    "build_state",
    "correlator",
    "correlator_closed_form",
    "counting_homodyne_scenario",
    "evaluate",
    "figure2_sweep",
    "ideal_state",
    "joint_probs",
    "motional_fidelity",
    "optimize",
    "threshold",
    "two_homodyne_scenario",
    "validate_state",
    "__version__",
]
