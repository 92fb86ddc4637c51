"""CHSH scenarios: evaluation, optimization, thresholds, and sweeps.

A Scenario pins the emitted state, the imperfection set, two atomic
settings for one party, and two optical measurements for the other. S is
always the combination E11 + E12 + E21 - E22 of the four correlators.

Evaluation runs through the dense probability engine (model + measure);
optimization runs the same physics through the flat kernels in
:mod:`hybridchsh.kernels` and re-evaluates the winner through the engine,
so the reported numbers always come from the reference path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.stats import qmc

from . import kernels, measure, model
from .errors import ConvergenceError, DomainError
from .hilbert import HybridState, validate_state
from .kernels import (IDX_ALPHA1, IDX_ALPHA2, IDX_AUX1, IDX_AUX2,
                      IDX_BOB1_ETA_D, IDX_BOB1_KIND, IDX_BOB1_ZETA,
                      IDX_BOB2_ETA_D, IDX_BOB2_KIND, IDX_BOB2_ZETA,
                      IDX_BRANCHING, IDX_ETA_T, IDX_F_AUX, IDX_F_G, IDX_F_S,
                      IDX_FIDELITY, IDX_PHI, IDX_THETA, IDX_VARPHI1,
                      IDX_VARPHI2, KIND_COUNTING, KIND_QUADRATURE, SPEC_LEN)
from .measure import AtomSetting, Counting, OpticalMeasurement, Quadrature

S_IDENTITY_TOL = 1e-12
S_HARD_BOUND = 4.0
LOCAL_BOUND = 2.0

# Superposition-angle setting that maximizes S for counting + homodyne
# on the ideal state, together with S at that point.
ALPHA_STAR = 2.0 * math.atan((math.sqrt(math.pi) + math.sqrt(2.0 + math.pi))
                             / math.sqrt(2.0))
S_STAR_COUNTING_HOMODYNE = 2.0 * math.sqrt(1.0 + 2.0 / math.pi)
S_STAR_TWO_HOMODYNE = 4.0 / math.sqrt(math.pi)

PARAM_INDEX = {
    "theta": IDX_THETA,
    "phi": IDX_PHI,
    "alpha1": IDX_ALPHA1,
    "varphi1": IDX_VARPHI1,
    "alpha2": IDX_ALPHA2,
    "varphi2": IDX_VARPHI2,
    "zeta1": IDX_BOB1_ZETA,
    "zeta2": IDX_BOB2_ZETA,
}

DEFAULT_BOUNDS = {
    "theta": (0.0, math.pi / 2.0),
    "phi": (0.0, 2.0 * math.pi),
    "alpha1": (-math.pi, math.pi),
    "varphi1": (-math.pi, math.pi),
    "alpha2": (-math.pi, math.pi),
    "varphi2": (-math.pi, math.pi),
    "zeta1": (0.0, 2.0 * math.pi),
    "zeta2": (0.0, 2.0 * math.pi),
}

XATOL = 1e-8
FATOL = 1e-10
MAX_EVALS_PER_START = 6000
DEFAULT_STARTS = 64

# A strategy with deterministic counting outcomes reaches S = 2 exactly,
# so "violation" needs a strictly positive margin to be decidable.
VIOLATION_MARGIN = 1e-6
MONOTONE_SLACK = 1e-5


@dataclass(frozen=True)
class FreeParam:
    """An optimizable scenario parameter with box bounds."""

    name: str
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if self.name not in PARAM_INDEX:
            raise DomainError(
                f"unknown free parameter {self.name!r}; choose from "
                f"{sorted(PARAM_INDEX)}")
        lo, hi = DEFAULT_BOUNDS[self.name]
        if self.lo is None:
            object.__setattr__(self, "lo", lo)
        if self.hi is None:
            object.__setattr__(self, "hi", hi)
        if not self.lo < self.hi:
            raise DomainError(f"bounds for {self.name} must satisfy lo < hi")


@dataclass(frozen=True)
class Scenario:
    """A fully described CHSH experiment, possibly with free parameters.

    ``imperfections.eta_d`` is the scenario-level default efficiency;
    the Counting entries in ``bob`` carry the values actually used at
    evaluation time (the factory helpers keep the two consistent, and
    eta_d sweeps rewrite both).
    """

    label: str
    state: model.StateParams
    imperfections: model.Imperfections = field(default_factory=model.Imperfections)
    alice: tuple[AtomSetting, AtomSetting] = (AtomSetting(0.0), AtomSetting(0.0))
    bob: tuple[OpticalMeasurement, OpticalMeasurement] = (Counting(), Quadrature())
    free_params: tuple[FreeParam, ...] = ()

    def __post_init__(self):
        seen = set()
        for fp in self.free_params:
            if fp.name in seen:
                raise DomainError(f"duplicate free parameter {fp.name!r}")
            seen.add(fp.name)
            if fp.name == "zeta1" and not isinstance(self.bob[0], Quadrature):
                raise DomainError("zeta1 is free but measurement Y1 is not a quadrature")
            if fp.name == "zeta2" and not isinstance(self.bob[1], Quadrature):
                raise DomainError("zeta2 is free but measurement Y2 is not a quadrature")

    def value_of(self, name: str) -> float:
        if name == "theta":
            return self.state.theta
        if name == "phi":
            return self.state.phi
        if name in ("alpha1", "varphi1"):
            return getattr(self.alice[0], name[:-1])
        if name in ("alpha2", "varphi2"):
            return getattr(self.alice[1], name[:-1])
        if name in ("zeta1", "zeta2"):
            meas = self.bob[0 if name == "zeta1" else 1]
            if not isinstance(meas, Quadrature):
                raise DomainError(f"{name} requested but the measurement is counting")
            return meas.zeta
        raise DomainError(f"unknown parameter {name!r}")

    def with_values(self, values: dict[str, float]) -> "Scenario":
        """Copy of the scenario with the named parameters replaced."""
        state = self.state
        a1, a2 = self.alice
        b1, b2 = self.bob
        for name, val in values.items():
            val = float(val)
            if name == "theta":
                state = model.StateParams(theta=val, phi=state.phi)
            elif name == "phi":
                state = model.StateParams(theta=state.theta, phi=val)
            elif name == "alpha1":
                a1 = replace(a1, alpha=val)
            elif name == "varphi1":
                a1 = replace(a1, varphi=val)
            elif name == "alpha2":
                a2 = replace(a2, alpha=val)
            elif name == "varphi2":
                a2 = replace(a2, varphi=val)
            elif name == "zeta1":
                if not isinstance(b1, Quadrature):
                    raise DomainError("zeta1 set but measurement Y1 is not a quadrature")
                b1 = replace(b1, zeta=val)
            elif name == "zeta2":
                if not isinstance(b2, Quadrature):
                    raise DomainError("zeta2 set but measurement Y2 is not a quadrature")
                b2 = replace(b2, zeta=val)
            else:
                raise DomainError(f"unknown parameter {name!r}")
        return replace(self, state=state, alice=(a1, a2), bob=(b1, b2))

    def pinned(self) -> "Scenario":
        return replace(self, free_params=())

    def describe(self) -> dict[str, object]:
        """Flat name -> value map of every physical parameter."""
        imp = self.imperfections
        out: dict[str, object] = {
            "theta_rad": self.state.theta, "phi_rad": self.state.phi,
            "eta_t": imp.eta_t, "fidelity": imp.fidelity,
            "f_s": imp.f_s, "f_g": imp.f_g, "f_aux": imp.f_aux,
        }
        for tag, setting in zip(("x1", "x2"), self.alice):
            out[f"{tag}_alpha_rad"] = setting.alpha
            out[f"{tag}_varphi_rad"] = setting.varphi
            out[f"{tag}_aux_outcome"] = setting.aux_outcome
        for tag, meas in zip(("y1", "y2"), self.bob):
            if isinstance(meas, Counting):
                out[f"{tag}_kind"] = "counting"
                out[f"{tag}_eta_d"] = meas.eta_d
                out[f"{tag}_zeta_rad"] = ""
            else:
                out[f"{tag}_kind"] = "quadrature"
                out[f"{tag}_eta_d"] = ""
                out[f"{tag}_zeta_rad"] = meas.zeta
        return out

    def to_spec_vector(self) -> np.ndarray:
        imp = self.imperfections
        spec = np.zeros(SPEC_LEN)
        spec[IDX_THETA] = self.state.theta
        spec[IDX_PHI] = self.state.phi
        spec[IDX_ETA_T] = imp.eta_t
        spec[IDX_FIDELITY] = imp.fidelity
        spec[IDX_BRANCHING] = 1.0 if imp.needs_aux_level else 0.0
        spec[IDX_F_S] = imp.f_s
        spec[IDX_F_G] = imp.f_g
        spec[IDX_F_AUX] = imp.f_aux
        spec[IDX_ALPHA1] = self.alice[0].alpha
        spec[IDX_VARPHI1] = self.alice[0].varphi
        spec[IDX_AUX1] = self.alice[0].aux_outcome
        spec[IDX_ALPHA2] = self.alice[1].alpha
        spec[IDX_VARPHI2] = self.alice[1].varphi
        spec[IDX_AUX2] = self.alice[1].aux_outcome
        for meas, kind_idx, eta_idx, zeta_idx in (
                (self.bob[0], IDX_BOB1_KIND, IDX_BOB1_ETA_D, IDX_BOB1_ZETA),
                (self.bob[1], IDX_BOB2_KIND, IDX_BOB2_ETA_D, IDX_BOB2_ZETA)):
            if isinstance(meas, Counting):
                spec[kind_idx] = KIND_COUNTING
                spec[eta_idx] = meas.eta_d
                spec[zeta_idx] = 0.0
            else:
                spec[kind_idx] = KIND_QUADRATURE
                spec[eta_idx] = 1.0
                spec[zeta_idx] = meas.zeta
        return spec


@dataclass(frozen=True)
class OptimizerTrace:
    """Multistart bookkeeping for a returned optimum."""

    seed: int
    n_starts: int
    best_per_start: tuple[float, ...]
    converged_per_start: tuple[bool, ...]


@dataclass(frozen=True)
class ChshResult:
    """Four correlators and their CHSH combination at a pinned scenario."""

    scenario: Scenario
    correlators: tuple[float, float, float, float]
    s_value: float
    trace: Optional[OptimizerTrace] = None

    def __post_init__(self):
        e11, e12, e21, e22 = self.correlators
        if abs(self.s_value - (e11 + e12 + e21 - e22)) > S_IDENTITY_TOL:
            raise DomainError("s_value does not match its correlators")
        if abs(self.s_value) > S_HARD_BOUND + S_IDENTITY_TOL:
            raise DomainError(f"|S| = {abs(self.s_value)} exceeds the hard bound 4")

    @property
    def params(self) -> dict[str, object]:
        return self.scenario.describe()


def build_state(scenario: Scenario) -> HybridState:
    """Emitted state with branching, loss, and dephasing applied."""
    imp = scenario.imperfections
    if imp.needs_aux_level:
        state = model.branching_state(scenario.state, imp.f_s, imp.f_g, imp.f_aux)
    else:
        state = model.ideal_state(scenario.state)
    state = model.apply_loss(state, imp.eta_t)
    state = model.apply_dephasing(state, imp.fidelity)
    report = validate_state(state)
    if not report.passed:
        raise DomainError(f"constructed state failed validation: {report}")
    return state


def evaluate(scenario: Scenario) -> ChshResult:
    """Probability-engine evaluation of a fully pinned scenario."""
    if scenario.free_params:
        raise DomainError(
            "scenario still has free parameters; pin them or call optimize")
    state = build_state(scenario)
    corrs = []
    for setting in scenario.alice:
        for meas in scenario.bob:
            table = measure.joint_probs(state, setting, meas)
            corrs.append(measure.correlator(table))
    e11, e12, e21, e22 = corrs
    return ChshResult(scenario=scenario, correlators=(e11, e12, e21, e22),
                      s_value=e11 + e12 + e21 - e22)


def _sobol_starts(n: int, lo: np.ndarray, hi: np.ndarray, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=lo.size, scramble=True, seed=seed)
    unit = sampler.random(n)
    return lo + unit * (hi - lo)


def optimize(scenario: Scenario, seed: int = 0, n_starts: int = DEFAULT_STARTS,
             xatol: float = XATOL, fatol: float = FATOL,
             max_evals_per_start: int = MAX_EVALS_PER_START) -> ChshResult:
    """Maximize S over the scenario's free parameters.

    Quasi-random multistart (scrambled Sobol, reproducible per seed)
    followed by bounded simplex refinement in the kernels; the current
    scenario values are always included as one extra start. Ties on the
    maximum are broken by lexicographic parameter order, so the result
    does not depend on start scheduling.
    """
    if not scenario.free_params:
        raise DomainError("scenario declares no free parameters")
    if n_starts < 1:
        raise DomainError("n_starts must be positive")
    names = [fp.name for fp in scenario.free_params]
    free_idx = np.array([PARAM_INDEX[n] for n in names], dtype=np.int64)
    lo = np.array([fp.lo for fp in scenario.free_params])
    hi = np.array([fp.hi for fp in scenario.free_params])
    current = np.array([scenario.value_of(n) for n in names])
    starts = np.vstack([current.reshape(1, -1), _sobol_starts(n_starts, lo, hi, seed)])
    spec = scenario.to_spec_vector()
    s_vals, x_mat, conv = kernels.multistart_maximize(
        spec, free_idx, lo, hi, starts, xatol, fatol, max_evals_per_start)
    if not bool(np.any(conv)):
        raise ConvergenceError(
            f"no start converged within {max_evals_per_start} evaluations")
    order = sorted(range(len(s_vals)),
                   key=lambda i: (-s_vals[i], tuple(x_mat[i])))
    best = order[0]
    pinned = scenario.with_values(dict(zip(names, x_mat[best])))
    result = evaluate(pinned.pinned())
    trace = OptimizerTrace(seed=seed, n_starts=len(starts),
                           best_per_start=tuple(float(v) for v in s_vals),
                           converged_per_start=tuple(bool(c) for c in conv))
    return ChshResult(scenario=pinned, correlators=result.correlators,
                      s_value=result.s_value, trace=trace)


def _set_sweep_param(scenario: Scenario, param: str, value: float) -> Scenario:
    if param == "eta_t":
        return replace(scenario,
                       imperfections=replace(scenario.imperfections, eta_t=value))
    if param == "eta_d":
        if not any(isinstance(m, Counting) for m in scenario.bob):
            raise DomainError("eta_d sweep needs at least one counting measurement")
        bob = tuple(replace(m, eta_d=value) if isinstance(m, Counting) else m
                    for m in scenario.bob)
        return replace(scenario, bob=bob,
                       imperfections=replace(scenario.imperfections, eta_d=value))
    raise DomainError(f"sweep parameter must be eta_t or eta_d, got {param!r}")


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a bisection for the S = 2 crossing.

    ``found`` is False when the predicate does not change sign on the
    sweep interval; ``value`` is then None and ``message`` says which
    side the interval sits on.
    """

    param: str
    found: bool
    value: Optional[float]
    lo: float
    hi: float
    tol: float
    margin: float
    scan: tuple[tuple[float, float], ...]
    probes: tuple[tuple[float, float], ...]
    message: str


def threshold(scenario: Scenario, param: str, lo: float = 0.0, hi: float = 1.0,
              tol: float = 0.005, margin: float = VIOLATION_MARGIN,
              seed: int = 0, n_starts: int = DEFAULT_STARTS,
              scan_points: int = 9) -> ThresholdResult:
    """Bisect the sweep parameter for the onset of S* > 2.

    A coarse scan first verifies that S*(param) is non-decreasing on the
    interval (within optimizer noise) and brackets the crossing; probes
    then bisect with a full inner optimization each. "Violation" means
    S* > 2 + margin: the margin makes the predicate well defined where
    S* = 2 exactly is attainable, and it is far below any physical
    violation the final probes can see at the stated tolerance.
    """
    if not lo < hi:
        raise DomainError("sweep interval must satisfy lo < hi")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    if scan_points < 3:
        raise DomainError("scan_points must be at least 3")

    def s_star(p: float) -> float:
        sc = _set_sweep_param(scenario, param, p)
        return optimize(sc, seed=seed, n_starts=n_starts).s_value

    grid = np.linspace(lo, hi, scan_points)
    scan = [(float(p), s_star(float(p))) for p in grid]
    values = [s for _, s in scan]
    for left, right in zip(values, values[1:]):
        if right < left - MONOTONE_SLACK:
            raise DomainError(
                f"S*({param}) is not monotone on [{lo}, {hi}]: "
                f"{left} -> {right}")

    def violated(s: float) -> bool:
        return s > LOCAL_BOUND + margin

    flags = [violated(s) for s in values]
    if flags[0]:
        return ThresholdResult(param, False, None, lo, hi, tol, margin,
                               tuple(scan), (),
                               f"S* already exceeds 2 at {param} = {lo}")
    if not flags[-1]:
        return ThresholdResult(param, False, None, lo, hi, tol, margin,
                               tuple(scan), (),
                               f"S* never exceeds 2 up to {param} = {hi}")
    k = next(i for i, f in enumerate(flags) if f)
    a, b = float(grid[k - 1]), float(grid[k])
    probes = []
    while b - a > tol:
        mid = 0.5 * (a + b)
        s_mid = s_star(mid)
        probes.append((mid, s_mid))
        if violated(s_mid):
            b = mid
        else:
            a = mid
    value = 0.5 * (a + b)
    return ThresholdResult(param, True, value, lo, hi, tol, margin,
                           tuple(scan), tuple(probes),
                           f"S* crosses 2 at {param} ~= {value:.4f}")


def counting_homodyne_scenario(eta_t: float = 1.0, eta_d: float = 1.0,
                               fidelity: float = 1.0,
                               with_free_params: bool = True) -> Scenario:
    """Counting + sign-binned quadrature, pinned at the ideal optimum."""
    imp = model.Imperfections(eta_t=eta_t, eta_d=eta_d, fidelity=fidelity)
    free = tuple(FreeParam(n) for n in
                 ("theta", "phi", "alpha1", "varphi1", "alpha2", "varphi2",
                  "zeta2")) if with_free_params else ()
    return Scenario(
        label="counting-homodyne",
        state=model.StateParams(theta=math.pi / 4.0, phi=0.0),
        imperfections=imp,
        alice=(AtomSetting(alpha=ALPHA_STAR), AtomSetting(alpha=-ALPHA_STAR)),
        bob=(Counting(eta_d=eta_d), Quadrature(zeta=0.0)),
        free_params=free)


def two_homodyne_scenario(eta_t: float = 1.0, fidelity: float = 1.0,
                          with_free_params: bool = True) -> Scenario:
    """Two sign-binned quadratures, pinned at the ideal optimum.

    Y1 is fixed at zeta = 0; the complementary angle of Y2 and the
    +-45 degree azimuths are the pinned optimum and remain free for the
    optimizer to rediscover.
    """
    imp = model.Imperfections(eta_t=eta_t, fidelity=fidelity)
    free = tuple(FreeParam(n) for n in
                 ("theta", "phi", "alpha1", "varphi1", "alpha2", "varphi2",
                  "zeta2")) if with_free_params else ()
    return Scenario(
        label="two-homodyne",
        state=model.StateParams(theta=math.pi / 4.0, phi=0.0),
        imperfections=imp,
        alice=(AtomSetting(alpha=math.pi / 2.0, varphi=-math.pi / 4.0),
               AtomSetting(alpha=math.pi / 2.0, varphi=math.pi / 4.0)),
        bob=(Quadrature(zeta=0.0), Quadrature(zeta=math.pi / 2.0)),
        free_params=free)


def branching_scenario(f_s: float, f_g: float, f_aux: float, epsilon: float,
                       eta_t: float = 1.0, eta_d: float = 1.0) -> Scenario:
    """Pinned branching strategy: near-pole settings, aux folded into -1."""
    imp = model.Imperfections(eta_t=eta_t, eta_d=eta_d,
                              f_s=f_s, f_g=f_g, f_aux=f_aux)
    return Scenario(
        label="branching",
        state=model.StateParams(theta=math.pi / 4.0, phi=0.0),
        imperfections=imp,
        alice=(AtomSetting(alpha=math.pi - epsilon, varphi=0.0, aux_outcome=-1),
               AtomSetting(alpha=-math.pi + epsilon, varphi=0.0, aux_outcome=-1)),
        bob=(Counting(eta_d=eta_d), Quadrature(zeta=0.0)))


@dataclass(frozen=True)
class BranchingSlope:
    """Fitted dS/d(epsilon) at 0 for a branching ratio f_s."""

    f_s: float
    slope: float
    samples: tuple[tuple[float, float], ...]


def branching_slope(f_s: float, f_g: Optional[float] = None,
                    f_aux: Optional[float] = None,
                    epsilons: tuple[float, ...] = (0.02, 0.04, 0.08),
                    eta_t: float = 1.0, eta_d: float = 1.0) -> BranchingSlope:
    """Slope of S(epsilon) at 0 from a quadratic fit through the samples.

    The remaining branching weight defaults to an even split between the
    g and aux channels; the slope does not depend on that split.
    """
    if f_g is None and f_aux is None:
        f_g = f_aux = (1.0 - f_s) / 2.0
    elif f_g is None or f_aux is None:
        raise DomainError("give both f_g and f_aux or neither")
    if len(epsilons) < 3:
        raise DomainError("need at least three epsilon samples for the fit")
    samples = []
    for eps in epsilons:
        sc = branching_scenario(f_s, f_g, f_aux, eps, eta_t=eta_t, eta_d=eta_d)
        samples.append((float(eps), evaluate(sc).s_value))
    xs = np.array([e for e, _ in samples])
    ys = np.array([s for _, s in samples])
    coeffs = np.polynomial.polynomial.polyfit(xs, ys, 2)
    return BranchingSlope(f_s=f_s, slope=float(coeffs[1]), samples=tuple(samples))


FIG2_GRID = tuple(round(0.4 + 0.05 * i, 2) for i in range(13))
FIG2_ETA_D = (1.0, 0.8, 0.6, 0.4)


@dataclass(frozen=True)
class Fig2Curve:
    label: str
    s_values: tuple[float, ...]


@dataclass(frozen=True)
class Fig2Result:
    eta_t_grid: tuple[float, ...]
    curves: tuple[Fig2Curve, ...]


def figure2_sweep(eta_d_values: tuple[float, ...] = FIG2_ETA_D,
                  eta_t_grid: tuple[float, ...] = FIG2_GRID,
                  include_two_homodyne: bool = True, seed: int = 0,
                  n_starts: int = DEFAULT_STARTS) -> Fig2Result:
    """S* versus transmission for several counter efficiencies.

    One fully optimized curve per eta_d plus, optionally, the
    two-homodyne curve. Each grid point re-optimizes all free
    parameters from scratch.
    """
    curves = []
    for eta_d in eta_d_values:
        s_vals = []
        for eta_t in eta_t_grid:
            sc = counting_homodyne_scenario(eta_t=eta_t, eta_d=eta_d)
            s_vals.append(optimize(sc, seed=seed, n_starts=n_starts).s_value)
        curves.append(Fig2Curve(label=f"counting_eta_d_{eta_d:g}",
                                s_values=tuple(s_vals)))
    if include_two_homodyne:
        s_vals = []
        for eta_t in eta_t_grid:
            sc = two_homodyne_scenario(eta_t=eta_t)
            s_vals.append(optimize(sc, seed=seed, n_starts=n_starts).s_value)
        curves.append(Fig2Curve(label="two_homodyne", s_values=tuple(s_vals)))
    return Fig2Result(eta_t_grid=tuple(float(v) for v in eta_t_grid),
                      curves=tuple(curves))
