"""TOML scenario and sweep configuration.

Angles carry a ``_rad`` suffix in key names; efficiencies, fidelities,
and branching weights are dimensionless and unsuffixed. Unknown keys are
rejected with the offending section named, so typos fail loudly instead
of silently falling back to defaults.

Scenario files::

    label = "counting-homodyne-max"

    [state]
    theta_rad = 0.7853981633974483
    phi_rad = 0.0

    [imperfections]
    eta_t = 1.0
    eta_d = 1.0

    [alice.x1]
    alpha_rad = 2.4681429450507126

    [alice.x2]
    alpha_rad = -2.4681429450507126

    [bob.y1]
    kind = "counting"

    [bob.y2]
    kind = "quadrature"
    zeta_rad = 0.0

    [optimize]
    free = ["theta", "phi", "alpha1", "varphi1", "alpha2", "varphi2", "zeta2"]

    [optimize.bounds.theta]
    lo = 0.0
    hi = 1.5707963267948966

Sweep files describe the efficiency-grid run instead and hold a single
``[sweep]`` section (counter efficiencies, transmission grid, and the
two-homodyne toggle).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import model
from .chsh import DEFAULT_BOUNDS, FIG2_ETA_D, FreeParam, Scenario
from .errors import ConfigError
from .measure import AtomSetting, Counting, OpticalMeasurement, Quadrature

BUNDLED_PACKAGE = "hybridchsh.configs"

_STATE_KEYS = {"theta_rad", "phi_rad"}
_IMPERFECTION_KEYS = {"eta_t", "eta_d", "fidelity", "f_s", "f_g", "f_aux"}
_ALICE_KEYS = {"alpha_rad", "varphi_rad", "aux_outcome"}
_BOB_KEYS = {"kind", "eta_d", "zeta_rad"}
_OPTIMIZE_KEYS = {"free", "bounds"}
_SWEEP_KEYS = {"eta_d", "eta_t_lo", "eta_t_hi", "eta_t_step", "two_homodyne"}


def bundled_names() -> tuple[str, ...]:
    """Names of the configs shipped inside the package."""
    files = resources.files(BUNDLED_PACKAGE)
    return tuple(sorted(p.name.removesuffix(".toml")
                        for p in files.iterdir() if p.name.endswith(".toml")))


def read_config_text(source: str | os.PathLike) -> tuple[str, str]:
    """Resolve a path or bundled name; return (label-stem, raw text)."""
    path = Path(source)
    if path.is_file():
        return path.stem, path.read_text()
    name = str(source)
    if os.sep not in name and "/" not in name:
        stem = name.removesuffix(".toml")
        candidate = resources.files(BUNDLED_PACKAGE) / f"{stem}.toml"
        if candidate.is_file():
            return stem, candidate.read_text()
        raise ConfigError(
            f"config {name!r} is neither a file nor a bundled config "
            f"(bundled: {', '.join(bundled_names())})")
    raise ConfigError(f"config file not found: {name}")


def _parse_toml(stem: str, text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{stem}: not valid TOML: {exc}") from exc


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(
            f"[{section}] has unknown keys: {', '.join(sorted(unknown))}")


def _require_table(doc: dict, section: str) -> dict:
    parts = section.split(".")
    node = doc
    for part in parts:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"missing required section [{section}]")
        node = node[part]
    if not isinstance(node, dict):
        raise ConfigError(f"[{section}] must be a table")
    return node


def _number(section: str, data: dict, key: str, default=None) -> float:
    if key not in data:
        if default is None:
            raise ConfigError(f"[{section}] is missing required key {key!r}")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}].{key} must be a number")
    return float(value)


def _atom_setting(section: str, data: dict) -> AtomSetting:
    _check_keys(section, data, _ALICE_KEYS)
    alpha = _number(section, data, "alpha_rad")
    varphi = _number(section, data, "varphi_rad", 0.0)
    aux = data.get("aux_outcome", -1)
    if aux not in (-1, 1):
        raise ConfigError(f"[{section}].aux_outcome must be -1 or 1")
    return AtomSetting(alpha=alpha, varphi=varphi, aux_outcome=int(aux))


def _optical(section: str, data: dict, default_eta_d: float) -> OpticalMeasurement:
    _check_keys(section, data, _BOB_KEYS)
    kind = data.get("kind")
    if kind == "counting":
        if "zeta_rad" in data:
            raise ConfigError(f"[{section}] is counting; zeta_rad does not apply")
        return Counting(eta_d=_number(section, data, "eta_d", default_eta_d))
    if kind == "quadrature":
        if "eta_d" in data:
            raise ConfigError(f"[{section}] is a quadrature; eta_d does not apply")
        return Quadrature(zeta=_number(section, data, "zeta_rad", 0.0))
    raise ConfigError(f"[{section}].kind must be 'counting' or 'quadrature'")


def _free_params(doc: dict) -> tuple[FreeParam, ...]:
    if "optimize" not in doc:
        return ()
    data = doc["optimize"]
    _check_keys("optimize", data, _OPTIMIZE_KEYS)
    names = data.get("free", [])
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ConfigError("[optimize].free must be a list of parameter names")
    bounds = data.get("bounds", {})
    if not isinstance(bounds, dict):
        raise ConfigError("[optimize.bounds] must be a table of tables")
    unknown = set(bounds) - set(names)
    if unknown:
        raise ConfigError(
            f"[optimize.bounds] covers non-free parameters: {', '.join(sorted(unknown))}")
    out = []
    for name in names:
        if name not in DEFAULT_BOUNDS:
            raise ConfigError(f"[optimize].free has unknown parameter {name!r}")
        box = bounds.get(name, {})
        _check_keys(f"optimize.bounds.{name}", box, {"lo", "hi"})
        out.append(FreeParam(
            name=name,
            lo=_number(f"optimize.bounds.{name}", box, "lo", DEFAULT_BOUNDS[name][0]),
            hi=_number(f"optimize.bounds.{name}", box, "hi", DEFAULT_BOUNDS[name][1])))
    return tuple(out)


def load_scenario(source: str | os.PathLike) -> Scenario:
    """Parse a scenario config from a path or bundled name."""
    stem, text = read_config_text(source)
    doc = _parse_toml(stem, text)
    if "sweep" in doc:
        raise ConfigError(
            f"{stem}: this is a sweep config; pass it to the fig2 command")
    _check_keys("top level", doc,
                {"label", "state", "imperfections", "alice", "bob", "optimize"})
    label = doc.get("label", stem)
    if not isinstance(label, str):
        raise ConfigError("label must be a string")

    state_tbl = _require_table(doc, "state")
    _check_keys("state", state_tbl, _STATE_KEYS)
    state = model.StateParams(theta=_number("state", state_tbl, "theta_rad"),
                              phi=_number("state", state_tbl, "phi_rad", 0.0))

    imp_tbl = doc.get("imperfections", {})
    _check_keys("imperfections", imp_tbl, _IMPERFECTION_KEYS)
    imp = model.Imperfections(
        eta_t=_number("imperfections", imp_tbl, "eta_t", 1.0),
        eta_d=_number("imperfections", imp_tbl, "eta_d", 1.0),
        f_s=_number("imperfections", imp_tbl, "f_s", 1.0),
        f_g=_number("imperfections", imp_tbl, "f_g", 0.0),
        f_aux=_number("imperfections", imp_tbl, "f_aux", 0.0),
        fidelity=_number("imperfections", imp_tbl, "fidelity", 1.0))

    alice = (_atom_setting("alice.x1", _require_table(doc, "alice.x1")),
             _atom_setting("alice.x2", _require_table(doc, "alice.x2")))
    bob = (_optical("bob.y1", _require_table(doc, "bob.y1"), imp.eta_d),
           _optical("bob.y2", _require_table(doc, "bob.y2"), imp.eta_d))
    for tag, meas in zip(("y1", "y2"), bob):
        if isinstance(meas, Counting) and meas.eta_d != imp.eta_d \
                and "eta_d" in imp_tbl:
            raise ConfigError(
                f"[bob.{tag}].eta_d = {meas.eta_d} conflicts with "
                f"[imperfections].eta_d = {imp.eta_d}; set one of the two")

    return Scenario(label=label, state=state, imperfections=imp,
                    alice=alice, bob=bob, free_params=_free_params(doc))


@dataclass(frozen=True)
class SweepConfig:
    """Grid description for the efficiency sweep."""

    label: str
    eta_d_values: tuple[float, ...]
    eta_t_grid: tuple[float, ...]
    two_homodyne: bool


def load_sweep(source: str | os.PathLike) -> SweepConfig:
    """Parse a sweep config from a path or bundled name."""
    stem, text = read_config_text(source)
    doc = _parse_toml(stem, text)
    if "sweep" not in doc:
        raise ConfigError(
            f"{stem}: missing [sweep] section; scenario configs belong to "
            "the evaluate/optimize/threshold commands")
    _check_keys("top level", doc, {"label", "sweep"})
    label = doc.get("label", stem)
    data = doc["sweep"]
    _check_keys("sweep", data, _SWEEP_KEYS)
    eta_d = data.get("eta_d", list(FIG2_ETA_D))
    if not isinstance(eta_d, list) or not eta_d or \
            any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in eta_d):
        raise ConfigError("[sweep].eta_d must be a non-empty list of numbers")
    lo = _number("sweep", data, "eta_t_lo", 0.4)
    hi = _number("sweep", data, "eta_t_hi", 1.0)
    step = _number("sweep", data, "eta_t_step", 0.05)
    if not (lo < hi and step > 0):
        raise ConfigError("[sweep] grid needs eta_t_lo < eta_t_hi and eta_t_step > 0")
    two = data.get("two_homodyne", True)
    if not isinstance(two, bool):
        raise ConfigError("[sweep].two_homodyne must be a boolean")
    n = int(round((hi - lo) / step))
    grid = tuple(round(lo + i * step, 12) for i in range(n + 1) if lo + i * step <= hi + 1e-12)
    return SweepConfig(label=label, eta_d_values=tuple(float(v) for v in eta_d),
                       eta_t_grid=grid, two_homodyne=two)
