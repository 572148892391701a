"""Experiment configuration files.

A config is a TOML file with dotted sections, for example::

    experiment = "simulate"

    [grid]
    n = 1
    N = 1024
    L = 64.0

    [mu]
    family = "power"
    kappa = 1.0

    [solver]
    dt = 0.05
    Tmax = 100.0

    [data]
    eps = 0.05
    u0.kind = "gaussian"
    u1.kind = "gaussian"

Only ``grid.*`` and the ``mu`` family with its parameter are required.
"""
from dataclasses import dataclass, field
import math
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import BadValue, ConfigError, InvalidArg, MissingKey, UnknownFamily
from .evolve import DATA_KINDS, DataSpec, SolverConfig
from .moduli import FAMILIES, ModulusSpec
from .spectral import Grid

EXPERIMENTS = ("dini-check", "simulate", "decay-sweep", "profile-check",
               "lifespan-sweep", "picard-demo")

FAMILY_PARAM = {"power": "kappa", "logpower": "gamma", "iterlog": "gamma", "constant": "m"}

# key -> (type, default); None as default marks an optional key without default
_KEYS = {
    "experiment": (str, None),
    "grid.n": (int, None),
    "grid.N": (int, None),
    "grid.L": (float, None),
    "mu.family": (str, None),
    "mu.kappa": (float, None),
    "mu.gamma": (float, None),
    "mu.m": (float, None),
    "mu.s0": (float, None),
    "mu.C": (float, 1.0),
    "solver.dt": (float, 0.05),
    "solver.scheme": (str, "ETD2"),
    "solver.Tmax": (float, 10.0),
    "solver.blowup_threshold": (float, None),
    "solver.dealias": (bool, False),
    "solver.nonlinear": (bool, True),
    "solver.sample_times": (list, None),
    "solver.samples": (int, 64),
    "data.eps": (float, 0.1),
    "sweep.eps": (list, None),
    "sweep.r2_min": (float, 0.95),
    "decay.t_window": (list, None),
    "decay.tol": (float, 0.15),
    "profile.times": (list, None),
    "profile.ratio": (float, 0.4),
    "picard.J": (int, 4),
    "picard.ratio_max": (float, 0.5),
    "picard.agreement": (float, 0.01),
    "dini.eps0": (float, 0.5),
    "output.dir": (str, "out"),
    "output.snapshot": (bool, False),
}
for _c in ("u0", "u1"):
    _KEYS.update({
        f"data.{_c}.kind": (str, "gaussian" if _c == "u0" else "zero"),
        f"data.{_c}.amplitude": (float, 1.0),
        f"data.{_c}.width": (float, 1.0),
        f"data.{_c}.center": (float, 0.0),
    })


@dataclass
class ExperimentConfig:
    """A validated experiment description."""
    experiment: str
    grid: Grid
    mu: ModulusSpec
    solver: SolverConfig
    C: float = 1.0
    sweep_eps: tuple = ()
    sweep_r2_min: float = 0.95
    t_window: tuple = None
    decay_tol: float = 0.15
    profile_times: tuple = ()
    profile_ratio: float = 0.4
    picard_J: int = 4
    picard_ratio_max: float = 0.5
    picard_agreement: float = 0.01
    dini_eps0: float = 0.5
    out_dir: str = "out"
    snapshot: bool = False
    values: dict = field(default_factory=dict)

    def echo(self):
        """Flat key -> value mapping of every setting, defaults included."""
        return dict(sorted(self.values.items()))


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(key, value, typ):
    if typ is bool:
        if not isinstance(value, bool):
            raise BadValue(key, f"expected true/false, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise BadValue(key, f"expected an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BadValue(key, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise BadValue(key, "must be finite")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise BadValue(key, f"expected a string, got {value!r}")
        return value
    if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        raise BadValue(key, f"expected a list of numbers, got {value!r}")
    return [float(x) for x in value]


def _build(key, fn, *args, **kw):
    # turn a module-level argument error into a diagnostic naming the key
    try:
        return fn(*args, **kw)
    except InvalidArg as exc:
        raise BadValue(key, str(exc)) from None


def default_sample_times(T_max, dt, count):
    """t = 0 plus ``count`` geometric times in [1, T_max], snapped to k * dt."""
    ts = [0.0]
    if T_max >= 1 and count > 0:
        ts += list(np.geomspace(1.0, T_max, count))
    steps = sorted({int(round(t / dt)) for t in ts})
    return tuple(k * dt for k in steps if k * dt <= T_max * (1 + 1e-12))


def load_mapping(data, experiment=None):
    """Validate an already parsed mapping; see :func:`parse_config`."""
    flat = _flatten(data)
    for key in flat:
        if key not in _KEYS:
            raise BadValue(key, "unknown key")
    vals = {}
    for key, (typ, default) in _KEYS.items():
        if key in flat:
            vals[key] = _coerce(key, flat[key], typ)
        elif default is not None:
            vals[key] = default

    for key in ("grid.n", "grid.N", "grid.L", "mu.family"):
        if key not in vals:
            raise MissingKey(key)

    exp = vals.get("experiment")
    if experiment is not None:
        if exp is not None and exp != experiment:
            raise BadValue("experiment", f"config names {exp!r} but {experiment!r} was requested")
        exp = experiment
    if exp is None:
        raise MissingKey("experiment")
    if exp not in EXPERIMENTS:
        raise BadValue("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    vals["experiment"] = exp

    n, N = vals["grid.n"], vals["grid.N"]
    if N < 2 or N & (N - 1):
        raise BadValue("grid.N", f"{N} is not a power of two")
    grid = _build("grid.n", Grid, n, N, vals["grid.L"])

    family = vals["mu.family"]
    if family not in FAMILIES:
        raise UnknownFamily(family)
    pkey = "mu." + FAMILY_PARAM[family]
    if pkey not in vals:
        raise MissingKey(pkey)
    for other in set(FAMILY_PARAM.values()) - {FAMILY_PARAM[family]}:
        if "mu." + other in vals:
            raise BadValue("mu." + other, f"not a parameter of the {family} family")
    mu = _build(pkey, getattr(ModulusSpec, family), vals[pkey], vals.get("mu.s0"))
    vals["mu.s0"] = mu.s0
    if not vals["mu.C"] > 0:
        raise BadValue("mu.C", "must be positive")

    comps = {}
    for c in ("u0", "u1"):
        kind = vals[f"data.{c}.kind"]
        if kind not in DATA_KINDS:
            raise BadValue(f"data.{c}.kind", f"must be one of {', '.join(DATA_KINDS)}")
        comps[c] = _build(f"data.{c}.width", DataSpec, kind, vals[f"data.{c}.amplitude"],
                          vals[f"data.{c}.width"], vals[f"data.{c}.center"])

    dt, T_max = vals["solver.dt"], vals["solver.Tmax"]
    if not 0 < dt <= 0.1:
        raise BadValue("solver.dt", "must lie in (0, 0.1]")
    if not T_max > 0:
        raise BadValue("solver.Tmax", "must be positive")
    if "solver.sample_times" in vals:
        samples = tuple(vals["solver.sample_times"])
    else:
        if vals["solver.samples"] < 0:
            raise BadValue("solver.samples", "must be non-negative")
        samples = default_sample_times(T_max, dt, vals["solver.samples"])
    if vals["data.eps"] < 0:
        raise BadValue("data.eps", "must be non-negative")
    if vals["solver.scheme"] not in ("ETD1", "ETD2"):
        raise BadValue("solver.scheme", "must be ETD1 or ETD2")
    solver = _build("solver.sample_times", SolverConfig, dt=dt, scheme=vals["solver.scheme"],
                    T_max=T_max, sample_times=samples,
                    blowup_threshold=vals.get("solver.blowup_threshold"),
                    dealias=vals["solver.dealias"], eps=vals["data.eps"],
                    u0=comps["u0"], u1=comps["u1"], nonlinear=vals["solver.nonlinear"])
    vals["solver.sample_times"] = list(solver.sample_times)

    sweep = tuple(vals.get("sweep.eps", ()))
    if exp == "lifespan-sweep":
        if len(sweep) < 4:
            raise BadValue("sweep.eps", "a lifespan sweep needs at least 4 amplitudes")
        if any(e <= 0 for e in sweep):
            raise BadValue("sweep.eps", "amplitudes must be positive")

    t_window = vals.get("decay.t_window")
    if t_window is not None:
        if len(t_window) != 2 or not 0 < t_window[0] < t_window[1]:
            raise BadValue("decay.t_window", "expected [t_lo, t_hi] with 0 < t_lo < t_hi")
        t_window = tuple(t_window)

    ptimes = tuple(vals.get("profile.times", (min(10.0, T_max), T_max)))
    if exp == "profile-check":
        if len(ptimes) != 2 or not 1 <= ptimes[0] < ptimes[1] <= T_max:
            raise BadValue("profile.times", "expected [t_early, t_late] with 1 <= t_early < t_late <= Tmax")

    if vals["picard.J"] < 2:
        raise BadValue("picard.J", "must be at least 2")
    if not 0 < vals["dini.eps0"] <= 1:
        raise BadValue("dini.eps0", "must lie in (0, 1]")

    return ExperimentConfig(
        experiment=exp, grid=grid, mu=mu, solver=solver, C=vals["mu.C"],
        sweep_eps=sweep, sweep_r2_min=vals["sweep.r2_min"], t_window=t_window,
        decay_tol=vals["decay.tol"], profile_times=ptimes,
        profile_ratio=vals["profile.ratio"], picard_J=vals["picard.J"],
        picard_ratio_max=vals["picard.ratio_max"],
        picard_agreement=vals["picard.agreement"], dini_eps0=vals["dini.eps0"],
        out_dir=vals["output.dir"], snapshot=vals["output.snapshot"], values=vals)


def parse_config(path, experiment=None):
    """Read and validate a TOML config file.

    ``experiment`` (the CLI subcommand) overrides a missing ``experiment``
    key and must agree with it when both are present.
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return load_mapping(data, experiment)
