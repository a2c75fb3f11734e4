"""Named, versioned scenarios and their INI configuration schema.

A scenario binds a model, a pulse recipe (an ansatz or a baseline), initial
and target states, the sensitivities to report and a default sweep.  The
registry is immutable; user configs start from a registry entry (or from
scratch) and override individual keys.

Config schema (every section optional except where a base is missing)::

    [scenario]   name, base, description
    [model]      kind, dim, J, Jx, Jy, Jz, D, A, omega, B0
    [ansatz]     theta_family, m_family, alpha, n, T, kappa
    [baseline]   kind (landau_zener | flat | composite), Omega0, a, T
    [run]        initial, target, sensitivities, perturbation, compare
    [sweep]      param (delta | D), range (lo:hi:step)

Unknown sections or keys raise :class:`~spinsta.errors.ConfigurationError`.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics, sensitivity
from .errors import ConfigurationError, SpinstaError
from .invariant import AngleTrajectory
from .pulse import ControlPulse
from .pulsedesign import (
    AnsatzSpec,
    composite_pulse,
    composite_sequence,
    design_angles,
    flat_pulse,
    landau_zener,
    synthesize,
)
from .spinmodel import Kind, SpinSystemModel

REGISTRY_VERSION = 1
#: Zero of q_S for the cubic profile; quoted to three decimals as 0.125.
ALPHA_SYSTEMATIC = 0.12509480308173726
SQRT2, SQRT3 = math.sqrt(2.0), math.sqrt(3.0)
#: Step used for the simulation-fit cross-check of each sensitivity.
FIT_STEP = 0.01
_FIT_PERTURBATION = {"q_S": "systematic", "q_D": "dm", "q_Omega": "amplitude", "q_Delta": "detuning"}
BASELINES = ("landau_zener", "flat", "composite")


@dataclass(frozen=True)
class Scenario:
    """A fully specified run.

    Exactly one of ``spec`` (shortcut design) and ``baseline`` (named
    reference pulse with ``baseline_params``) is set.  ``sweep_overrides``
    are model fields replaced during sweeps and fits, e.g. ``{"D": 0.0}``
    when the swept ``delta`` is itself the DM-induced detuning shift.
    """

    name: str
    model: SpinSystemModel
    initial: str
    target: str
    spec: AnsatzSpec | None = None
    baseline: str | None = None
    baseline_params: dict = field(default_factory=dict)
    sensitivities: tuple[str, ...] = ()
    perturbation: str = "systematic"
    sweep_param: str = "delta"
    sweep_range: tuple[float, float, float] = (-0.5, 0.5, 0.01)
    compare: tuple[str, ...] = ("flat",)
    sweep_overrides: dict = field(default_factory=dict)
    description: str = ""
    version: int = REGISTRY_VERSION

    def __post_init__(self):
        if (self.spec is None) == (self.baseline is None):
            raise ConfigurationError(f"{self.name}: set exactly one of ansatz and baseline")
        if self.baseline is not None and self.baseline not in BASELINES:
            raise ConfigurationError(f"{self.name}: unknown baseline {self.baseline!r}")
        labels = self.model.state_labels()
        for role, state in (("initial", self.initial), ("target", self.target)):
            if state not in labels:
                raise ConfigurationError(f"{self.name}: {role} state {state!r} not in {labels}")
        for kind in self.sensitivities:
            if kind not in sensitivity.SENSITIVITIES:
                raise ConfigurationError(f"{self.name}: unknown sensitivity {kind!r}")
        if self.perturbation not in dynamics.PERTURBATIONS:
            raise ConfigurationError(f"{self.name}: unknown perturbation {self.perturbation!r}")
        if self.sweep_param not in ("delta", "D"):
            raise ConfigurationError(f"{self.name}: sweep parameter must be 'delta' or 'D'")
        for c in self.compare:
            if c not in ("flat", "composite"):
                raise ConfigurationError(f"{self.name}: unknown comparison {c!r}")
        sweep_grid(*self.sweep_range)

    @property
    def T(self) -> float:
        return self.spec.T if self.spec is not None else float(self.baseline_params.get("T", 1.0))

    @property
    def kappa(self) -> float:
        return self.model.kappa

    def pulse(self) -> ControlPulse:
        if self.spec is not None:
            return synthesize(self.spec, self.model)
        return baseline_pulse(self.baseline, self.baseline_params, self.kappa, self.model)

    def angles(self) -> AngleTrajectory | None:
        return None if self.spec is None else design_angles(self.spec)

    def sweep_model(self) -> SpinSystemModel:
        return self.model.with_(**self.sweep_overrides) if self.sweep_overrides else self.model

    def sweep_kind(self, param: str | None = None) -> str:
        return "dm" if (param or self.sweep_param) == "D" else self.perturbation

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "description": self.description,
            "model": self.model.to_dict(),
            "ansatz": None if self.spec is None else self.spec.to_dict(),
            "baseline": None if self.baseline is None else {"kind": self.baseline, **self.baseline_params},
            "initial": self.initial,
            "target": self.target,
            "sensitivities": list(self.sensitivities),
            "perturbation": self.perturbation,
            "sweep": {"param": self.sweep_param, "range": list(self.sweep_range),
                      "overrides": dict(self.sweep_overrides)},
            "compare": list(self.compare),
        }


def baseline_pulse(kind: str, params: dict, kappa: float, model: SpinSystemModel | None = None) -> ControlPulse:
    T = float(params.get("T", 1.0))
    if kind == "landau_zener":
        return landau_zener(float(params.get("Omega0", 8.0)), float(params.get("a", 4.0)), T)
    if kind == "flat":
        return flat_pulse(T, kappa)
    if kind == "composite":
        rep = "spin1" if model is None or model.dim >= 3 else "two-level"
        return composite_pulse(composite_sequence(T, rep), kappa)
    raise ConfigurationError(f"unknown baseline {kind!r}")


def sweep_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive uniform grid ``lo, lo+step, ..., hi`` (no accumulated rounding).

    Raises
    ------
    ConfigurationError
        For an empty range (``hi < lo`` or non-positive step).
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(step)) or step <= 0 or hi < lo:
        raise ConfigurationError(f"empty sweep range {lo}:{hi}:{step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def parse_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"range must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"bad range {text!r}: {exc}") from None
    sweep_grid(lo, hi, step)
    return lo, hi, step


# -- registry --------------------------------------------------------------------


def _build_registry() -> dict[str, Scenario]:
    heis = SpinSystemModel(Kind.HEISENBERG_ISO, dim=3)
    ising = SpinSystemModel(Kind.ISING_TRANSVERSE, dim=2, J=10.0)
    bell = dict(initial="psi11", target="psi10")
    flip = dict(initial="psi11", target="psi1m1")
    items = [
        Scenario("heis-flip-optimal", heis, spec=AnsatzSpec("cubic", "alpha", alpha=ALPHA_SYSTEMATIC),
                 sensitivities=("q_S",), perturbation="systematic", compare=("flat",),
                 description="Heisenberg spin flip, systematic-error optimal design (alpha~0.125)", **flip),
        Scenario("heis-flip-dm", SpinSystemModel(Kind.HEISENBERG_DM, dim=4, J=10.0, D=1.0),
                 spec=AnsatzSpec("cubic", "alpha", alpha=0.059),
                 sensitivities=("q_D",), perturbation="dm", sweep_param="D",
                 sweep_range=(0.0, 2.0, 0.1), compare=("flat",),
                 description="Heisenberg spin flip robust against DM coupling (J=10, D=1, alpha=0.059)", **flip),
        Scenario("ising-bell-amp", ising, spec=AnsatzSpec("sine", "n", n=1.0, kappa=SQRT2),
                 sensitivities=("q_Omega",), perturbation="amplitude", compare=("flat",),
                 description="Ising Bell state, amplitude-error robust design (n=1)", **bell),
        Scenario("ising-bell-dm", SpinSystemModel(Kind.ISING_DM, dim=2, J=10.0, D=1.0),
                 spec=AnsatzSpec("sine", "alpha", alpha=-0.206, kappa=SQRT2),
                 sensitivities=("q_Delta",), perturbation="detuning", sweep_range=(-4.0, 4.0, 0.1),
                 sweep_overrides={"D": 0.0}, compare=("flat",),
                 description="Ising Bell state robust against the DM-induced detuning (J=10, alpha=-0.206)",
                 **bell),
        Scenario("baselines-compare", heis, spec=AnsatzSpec("cubic", "alpha", alpha=ALPHA_SYSTEMATIC),
                 sensitivities=("q_S",), perturbation="systematic", compare=("flat", "composite"),
                 description="Optimal shortcut versus flat pi and composite pulses (spin-1)", **flip),
        Scenario("lz-adiabatic", heis, baseline="landau_zener",
                 baseline_params={"Omega0": 8.0, "a": 4.0, "T": 20.0}, perturbation="systematic",
                 compare=(), description="Adiabatic Landau-Zener reference (Omega0=8, a=4, T=20)", **flip),
        Scenario("triangle-w3", SpinSystemModel(Kind.TRIANGLE_ISING3, dim=2, J=10.0),
                 spec=AnsatzSpec("sine", "n", n=1.0, kappa=SQRT3), initial="psi3/2,3/2", target="w",
                 sensitivities=("q_Omega",), perturbation="amplitude", compare=("flat",),
                 description="Three-spin triangle, W-state preparation with sqrt(3) enhanced Rabi"),
        Scenario("ising-bell-3level", SpinSystemModel(Kind.ISING_TRANSVERSE, dim=3, J=10.0, omega=20.0, A=10.0),
                 spec=AnsatzSpec("sine", "n", n=1.0, kappa=SQRT2), perturbation="amplitude", compare=(),
                 description="Two-level design validated on the three-level Ising Hamiltonian", **bell),
        Scenario("ising-bell-adiabatic", ising, baseline="landau_zener",
                 baseline_params={"Omega0": 8.0, "a": 4.0, "T": 1.0}, perturbation="amplitude",
                 compare=(), description="Linear-sweep Bell-state preparation squeezed into T=1", **bell),
    ]
    return {s.name: s for s in items}


_REGISTRY = _build_registry()


def registry() -> list[Scenario]:
    return list(_REGISTRY.values())


def get(name: str) -> Scenario:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ConfigurationError(f"unknown scenario {name!r}; known: {sorted(_REGISTRY)}") from None


# -- running -------------------------------------------------------------------


@dataclass
class RunOutput:
    scenario: Scenario
    pulse: ControlPulse
    result: dynamics.SimulationResult
    reports: list[sensitivity.SensitivityReport]
    curve: dict | None = None

    def record(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "final_fidelity": self.result.final_fidelity,
            "peak_omega": self.pulse.peak_omega(),
            "sensitivities": [r.to_dict() for r in self.reports],
        }


def _attach(name: str, exc: SpinstaError) -> SpinstaError:
    exc.scenario = name
    exc.args = (f"[{name}] {exc}",) + exc.args[1:]
    return exc


def sensitivity_reports(scenario: Scenario, quad_tol: float = sensitivity.QUAD_TOL, fit: bool = True,
                        steps_per_unit: float = dynamics.STEPS_PER_UNIT) -> list[sensitivity.SensitivityReport]:
    """Quadrature value of each declared sensitivity, with an optional simulation fit."""
    angles = scenario.angles()
    if angles is None:
        return []
    alpha = scenario.spec.alpha if scenario.spec.m_family == "alpha" else None
    out = []
    for kind in scenario.sensitivities:
        sim = simulation_fit(scenario, kind, steps_per_unit=steps_per_unit) if fit else None
        out.append(sensitivity.report(kind, angles, J=scenario.model.J, alpha=alpha, tol=quad_tol, sim_fit=sim))
    return out


def simulation_fit(scenario: Scenario, kind: str, h: float = FIT_STEP,
                   steps_per_unit: float = dynamics.STEPS_PER_UNIT) -> sensitivity.SimulationFit:
    """Central-difference curvature of the simulated fidelity for sensitivity ``kind``."""
    perturbation = _FIT_PERTURBATION[kind]
    model = scenario.sweep_model()
    if kind == "q_D":
        model = model.with_(D=0.0)
    curve = dynamics.fidelity_curve(model, scenario.pulse(), scenario.initial, scenario.target,
                                    perturbation, [-h, 0.0, h], steps_per_unit)
    return sensitivity.fit_sensitivity(curve[:, 0], curve[:, 1])


def sweep_table(scenario: Scenario, param: str | None = None, grid=None,
                steps_per_unit: float = dynamics.STEPS_PER_UNIT, workers: int | None = None,
                compare: tuple[str, ...] | None = None) -> tuple[list[str], np.ndarray]:
    """``(header, rows)`` with columns ``param, fidelity_optimal, fidelity_<baseline>...``."""
    param = param or scenario.sweep_param
    if param not in ("delta", "D"):
        raise ConfigurationError(f"sweep parameter must be 'delta' or 'D', got {param!r}")
    grid = sweep_grid(*scenario.sweep_range) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ConfigurationError("empty sweep grid")
    kind = scenario.sweep_kind(param)
    model = scenario.sweep_model()
    compare = scenario.compare if compare is None else compare
    pulses = [("optimal", scenario.pulse())]
    for c in compare:
        T = scenario.T if c == "flat" else 2 * scenario.T
        pulses.append((c, baseline_pulse(c, {"T": T}, scenario.kappa, model)))
    columns = [grid]
    for _, pulse in pulses:
        curve = dynamics.fidelity_curve(model, pulse, scenario.initial, scenario.target, kind, grid,
                                        steps_per_unit, workers)
        columns.append(curve[:, 1])
    return ["param"] + [f"fidelity_{n}" for n, _ in pulses], np.column_stack(columns)


def run(scenario: Scenario | str, steps_per_unit: float = dynamics.STEPS_PER_UNIT,
        quad_tol: float = sensitivity.QUAD_TOL, fit: bool = True, do_sweep: bool = False,
        store_every: int = 1, workers: int | None = None) -> RunOutput:
    """Synthesize, evaluate sensitivities, simulate, and optionally sweep.

    Errors from any stage are re-raised with the scenario name prefixed.
    """
    scenario = get(scenario) if isinstance(scenario, str) else scenario
    try:
        pulse = scenario.pulse()
        reports = sensitivity_reports(scenario, quad_tol, fit, steps_per_unit)
        result = dynamics.integrate(scenario.model, pulse, scenario.initial, scenario.target,
                                    steps_per_unit=steps_per_unit, store_every=store_every)
        curve = None
        if do_sweep:
            header, rows = sweep_table(scenario, steps_per_unit=steps_per_unit, workers=workers)
            curve = {"header": header, "rows": rows}
    except SpinstaError as exc:
        raise _attach(scenario.name, exc)
    return RunOutput(scenario, pulse, result, reports, curve)


# -- configuration files ---------------------------------------------------------

_SCHEMA = {
    "scenario": {"name", "base", "description"},
    "model": {"kind", "dim", "J", "Jx", "Jy", "Jz", "D", "A", "omega", "B0"},
    "ansatz": {"theta_family", "m_family", "alpha", "n", "T", "kappa"},
    "baseline": {"kind", "Omega0", "a", "T"},
    "run": {"initial", "target", "sensitivities", "perturbation", "compare"},
    "sweep": {"param", "range"},
}
_INTS = {"dim"}
_STRINGS = {"kind", "theta_family", "m_family"}


def _value(key: str, raw: str):
    if key in _STRINGS:
        return raw.strip()
    try:
        return int(raw) if key in _INTS else float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw!r}") from None


def _list(raw: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


def load_config(path) -> Scenario:
    """Read a scenario from an INI file (see module docstring for the schema)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return scenario_from_sections({s: dict(parser[s]) for s in parser.sections()})


def scenario_from_sections(sections: dict[str, dict[str, str]]) -> Scenario:
    for name, keys in sections.items():
        if name not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{name}]")
        unknown = set(keys) - _SCHEMA[name]
        if unknown:
            raise ConfigurationError(f"unknown keys in [{name}]: {sorted(unknown)}")

    head = sections.get("scenario", {})
    base = get(head["base"]) if "base" in head else None
    if base is None and "model" not in sections:
        raise ConfigurationError("config needs a [model] section or a base scenario")

    model_data = base.model.to_dict() if base else {}
    model_data.update({k: _value(k, v) for k, v in sections.get("model", {}).items()})
    model = SpinSystemModel.from_dict(model_data)

    spec, baseline, params = (base.spec, base.baseline, dict(base.baseline_params)) if base else (None, None, {})
    if "ansatz" in sections:
        data = spec.to_dict() if spec is not None else {"kappa": model.kappa}
        data.update({k: _value(k, v) for k, v in sections["ansatz"].items()})
        spec, baseline, params = AnsatzSpec.from_dict(data), None, {}
    if "baseline" in sections:
        raw = dict(sections["baseline"])
        baseline = raw.pop("kind", baseline)
        params.update({k: _value(k, v) for k, v in raw.items()})
        spec = None

    changes: dict = {"model": model, "spec": spec, "baseline": baseline, "baseline_params": params}
    runsec = sections.get("run", {})
    for key in ("initial", "target", "perturbation"):
        if key in runsec:
            changes[key] = runsec[key].strip()
    if "sensitivities" in runsec:
        changes["sensitivities"] = _list(runsec["sensitivities"])
    if "compare" in runsec:
        changes["compare"] = _list(runsec["compare"])
    sweep = sections.get("sweep", {})
    if "param" in sweep:
        changes["sweep_param"] = sweep["param"].strip()
    if "range" in sweep:
        changes["sweep_range"] = parse_range(sweep["range"])
    if "description" in head:
        changes["description"] = head["description"]
    changes["name"] = head.get("name", base.name if base else "custom")

    if base is not None:
        return replace(base, **changes)
    changes.setdefault("initial", model.state_labels()[0])
    changes.setdefault("target", model.state_labels()[-1])
    return Scenario(**changes)
