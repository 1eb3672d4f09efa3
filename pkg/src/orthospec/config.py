"""Run configuration: one TOML file per run, command sections, CLI overrides.

A config file has a handful of top-level keys (seed, out, threads, force) and
one section per subcommand. Every run writes back a fully resolved copy of
what it actually used, so the output directory is a reproducible manifest.
tomllib only exists from Python 3.11, so reading goes through tomli; writing
is a small emitter covering exactly the value shapes these configs use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import tomli

from .errors import ConfigError
from .preprocessing import ProcessingFunction, canonical_kind, make_function

__all__ = [
    "CommonConfig",
    "PredictConfig",
    "SweepConfig",
    "PcaepConfig",
    "SpectrumConfig",
    "CheckConfig",
    "load_toml",
    "emit_toml",
    "parse_func",
    "func_to_dict",
    "build_command_config",
    "resolved_dict",
]

_SENSING_KINDS = ("haar", "cdp", "partial_dft")

_FUNC_PARAM_KEYS = {"c1", "c2", "kappa", "s", "t"}


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")


# -- tiny TOML writer ------------------------------------------------------

def _fmt_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ConfigError(f"cannot serialize non-finite float {v}")
        out = repr(v)
        return out if ("." in out or "e" in out or "E" in out) else out + ".0"
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise ConfigError(f"cannot serialize value of type {type(v).__name__} to TOML")


def _fmt_value(v) -> str:
    if isinstance(v, dict):
        inner = ", ".join(f"{k} = {_fmt_value(val)}" for k, val in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    return _fmt_scalar(v)


def emit_toml(data: dict) -> str:
    """Serialize a config dict: scalars/lists first, nested dicts as sections."""
    lines = []
    sections = []
    for key, val in data.items():
        if isinstance(val, dict):
            sections.append((key, val))
        else:
            lines.append(f"{key} = {_fmt_value(val)}")
    for name, sec in sections:
        if lines and lines[-1] != "":
            lines.append("")
        lines.append(f"[{name}]")
        for key, val in sec.items():
            lines.append(f"{key} = {_fmt_value(val)}")
    return "\n".join(lines) + "\n"


# -- processing-function specs ---------------------------------------------

def parse_func(spec) -> ProcessingFunction:
    """A func entry is a table like {kind = "subset", c1 = 1.5}; extra knobs
    (shift, max_iter) are handled by the caller and ignored here."""
    if isinstance(spec, ProcessingFunction):
        return spec
    if isinstance(spec, str):
        return make_function(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"func spec must be a table with a 'kind' key, got {spec!r}")
    params = {k: v for k, v in spec.items() if k in _FUNC_PARAM_KEYS}
    unknown = set(spec) - _FUNC_PARAM_KEYS - {"kind", "shift", "max_iter"}
    if unknown:
        raise ConfigError(f"unknown keys in func spec {spec.get('kind')!r}: {sorted(unknown)}")
    try:
        return make_function(spec["kind"], **params)
    except Exception as exc:
        raise ConfigError(f"bad func spec {spec!r}: {exc}")


def func_to_dict(func: ProcessingFunction) -> dict:
    d = {"kind": func.kind}
    for k, v in func.params.items():
        d[k] = list(v) if isinstance(v, tuple) else v
    return d


def _check_sensing_kind(kind: str, where: str) -> str:
    aliases = {"pdft": "partial_dft", "dft": "partial_dft"}
    k = aliases.get(kind, kind)
    if k not in _SENSING_KINDS:
        raise ConfigError(f"{where}: sensing kind must be one of {_SENSING_KINDS}, got {kind!r}")
    return k


def _take(table: dict, key, default, caster, where):
    val = table.get(key, default)
    try:
        return caster(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}: {exc}")


def _reject_unknown(table: dict, allowed, where: str):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(unknown)}")


# -- per-command configs ----------------------------------------------------

@dataclass(frozen=True)
class CommonConfig:
    seed: int = 0
    out: Optional[str] = None
    threads: int = 1
    force: bool = False


@dataclass(frozen=True)
class PredictConfig:
    funcs: tuple = (("star", {}),)  # (kind, params) pairs resolved to ProcessingFunction later
    deltas: tuple = (2.1, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0)
    mu_points: int = 120
    branch: str = "max"
    thresholds: bool = True

    def functions(self):
        return [make_function(kind, **params) for kind, params in self.funcs]


@dataclass(frozen=True)
class SweepConfig:
    ensembles: tuple = ("partial_dft",)
    n: int = 2048
    deltas: tuple = (2.5, 3.0, 4.0, 5.0)
    funcs: tuple = ()  # entries: (kind, params, shift or None, max_iter or None)
    trials: int = 10
    tol: float = 1e-9
    max_iter: int = 10000
    haar_n_cap: int = 2000

    def functions(self):
        out = []
        for kind, params, shift, max_iter in self.funcs:
            out.append((make_function(kind, **params), shift, max_iter))
        return out


# defaults carry their knob values explicitly so resolved.toml pins them
_DEFAULT_SWEEP_FUNCS = (
    ("trim", {"c2": 2.0}, None, None),
    ("subset", {"c1": 1.5}, None, None),
    ("mm", {}, None, None),
    ("star_regularized", {"kappa": 0.01}, None, 15000),
)


@dataclass(frozen=True)
class PcaepConfig:
    ensemble: str = "partial_dft"
    n: int = 16384
    delta: float = 3.0
    func: tuple = ("star_regularized", ())
    mu: Union[str, float] = "hat"
    alpha0: complex = 0.2 + 0.0j
    sigma0_sq: float = 1.0
    t_max: int = 20
    seeds: tuple = (0, 1, 2, 3, 4)

    def function(self):
        return make_function(self.func[0], **dict(self.func[1]))


@dataclass(frozen=True)
class SpectrumConfig:
    ensemble: str = "haar"
    n: int = 288
    delta: float = 5.0
    func: tuple = ("mm", ())
    branch: str = "max"

    def function(self):
        return make_function(self.func[0], **dict(self.func[1]))


@dataclass(frozen=True)
class CheckConfig:
    criteria: tuple = (1, 2, 3, 4, 5, 6, 7)


def _parse_common(data: dict) -> CommonConfig:
    return CommonConfig(
        seed=_take(data, "seed", 0, int, "top level"),
        out=data.get("out"),
        threads=_take(data, "threads", 1, int, "top level"),
        force=bool(data.get("force", False)),
    )


def _func_entry(spec, where) -> tuple:
    func = parse_func(spec)
    shift = None
    max_iter = None
    if isinstance(spec, dict):
        if "shift" in spec:
            shift = float(spec["shift"])
        if "max_iter" in spec:
            max_iter = int(spec["max_iter"])
    return (func.kind, dict(func.params), shift, max_iter)


def _parse_predict(sec: dict) -> PredictConfig:
    _reject_unknown(sec, {"funcs", "func", "deltas", "mu_points", "branch", "thresholds"}, "predict")
    if "funcs" in sec:
        raw = sec["funcs"]
    elif "func" in sec:
        raw = [sec["func"]]
    else:
        raw = [{"kind": "star"}]
    funcs = []
    for entry in raw:
        f = parse_func(entry)
        funcs.append((f.kind, dict(f.params)))
    deltas = tuple(float(d) for d in sec.get("deltas", PredictConfig.deltas))
    if any(d <= 1.0 for d in deltas):
        raise ConfigError("predict.deltas: every delta must exceed 1")
    branch = sec.get("branch", "max")
    if branch not in ("max", "min"):
        raise ConfigError(f"predict.branch must be 'max' or 'min', got {branch!r}")
    return PredictConfig(
        funcs=tuple(funcs),
        deltas=deltas,
        mu_points=_take(sec, "mu_points", 120, int, "predict"),
        branch=branch,
        thresholds=bool(sec.get("thresholds", True)),
    )


def _parse_sweep(sec: dict) -> SweepConfig:
    _reject_unknown(
        sec, {"ensembles", "ensemble", "n", "deltas", "funcs", "trials", "tol", "max_iter", "haar_n_cap"}, "sweep"
    )
    if "ensembles" in sec:
        ens = tuple(_check_sensing_kind(e, "sweep") for e in sec["ensembles"])
    elif "ensemble" in sec:
        ens = (_check_sensing_kind(sec["ensemble"], "sweep"),)
    else:
        ens = ("partial_dft",)
    funcs = tuple(_func_entry(e, "sweep") for e in sec["funcs"]) if "funcs" in sec else _DEFAULT_SWEEP_FUNCS
    deltas = tuple(float(d) for d in sec.get("deltas", SweepConfig.deltas))
    if any(d <= 1.0 for d in deltas):
        raise ConfigError("sweep.deltas: every delta must exceed 1")
    cfg = SweepConfig(
        ensembles=ens,
        n=_take(sec, "n", 2048, int, "sweep"),
        deltas=deltas,
        funcs=funcs,
        trials=_take(sec, "trials", 10, int, "sweep"),
        tol=_take(sec, "tol", 1e-9, float, "sweep"),
        max_iter=_take(sec, "max_iter", 10000, int, "sweep"),
        haar_n_cap=_take(sec, "haar_n_cap", 2000, int, "sweep"),
    )
    if cfg.trials < 1:
        raise ConfigError("sweep.trials must be positive")
    if "haar" in cfg.ensembles and cfg.n > cfg.haar_n_cap:
        raise ConfigError(
            f"sweep: haar with n = {cfg.n} exceeds the dense-memory guard {cfg.haar_n_cap}; "
            "raise haar_n_cap explicitly to override"
        )
    return cfg


def _parse_pcaep(sec: dict) -> PcaepConfig:
    _reject_unknown(
        sec,
        {"ensemble", "n", "delta", "func", "mu", "alpha0", "alpha0_im", "sigma0_sq", "t_max", "seeds"},
        "pcaep",
    )
    f = parse_func(sec.get("func", {"kind": "star_regularized"}))
    mu = sec.get("mu", "hat")
    if mu != "hat":
        try:
            mu = float(mu)
        except (TypeError, ValueError):
            raise ConfigError(f"pcaep.mu must be 'hat' or a number, got {mu!r}")
    alpha0 = complex(_take(sec, "alpha0", 0.2, float, "pcaep"), _take(sec, "alpha0_im", 0.0, float, "pcaep"))
    seeds = sec.get("seeds", 5)
    if isinstance(seeds, int):
        seeds = tuple(range(seeds))
    else:
        seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ConfigError("pcaep.seeds must not be empty")
    cfg = PcaepConfig(
        ensemble=_check_sensing_kind(sec.get("ensemble", "partial_dft"), "pcaep"),
        n=_take(sec, "n", 16384, int, "pcaep"),
        delta=_take(sec, "delta", 3.0, float, "pcaep"),
        func=(f.kind, tuple(sorted(f.params.items()))),
        mu=mu,
        alpha0=alpha0,
        sigma0_sq=_take(sec, "sigma0_sq", 1.0, float, "pcaep"),
        t_max=_take(sec, "t_max", 20, int, "pcaep"),
        seeds=seeds,
    )
    if cfg.delta <= 1.0:
        raise ConfigError("pcaep.delta must exceed 1")
    if cfg.sigma0_sq < 0:
        raise ConfigError("pcaep.sigma0_sq must be nonnegative")
    if cfg.t_max < 1:
        raise ConfigError("pcaep.t_max must be at least 1")
    return cfg


def _parse_spectrum(sec: dict) -> SpectrumConfig:
    _reject_unknown(sec, {"ensemble", "n", "delta", "func", "branch"}, "spectrum")
    f = parse_func(sec.get("func", {"kind": "mm"}))
    branch = sec.get("branch", "max")
    if branch not in ("max", "min"):
        raise ConfigError(f"spectrum.branch must be 'max' or 'min', got {branch!r}")
    cfg = SpectrumConfig(
        ensemble=_check_sensing_kind(sec.get("ensemble", "haar"), "spectrum"),
        n=_take(sec, "n", 288, int, "spectrum"),
        delta=_take(sec, "delta", 5.0, float, "spectrum"),
        func=(f.kind, tuple(sorted(f.params.items()))),
        branch=branch,
    )
    if cfg.delta <= 1.0:
        raise ConfigError("spectrum.delta must exceed 1")
    return cfg


def _parse_check(sec: dict) -> CheckConfig:
    _reject_unknown(sec, {"criteria"}, "check")
    crit = sec.get("criteria", list(CheckConfig.criteria))
    crit = tuple(int(c) for c in crit)
    bad = [c for c in crit if c < 1 or c > 7]
    if bad:
        raise ConfigError(f"check.criteria entries must be 1..7, got {bad}")
    if not crit:
        raise ConfigError("check.criteria must not be empty")
    return CheckConfig(criteria=crit)


_PARSERS = {
    "predict": _parse_predict,
    "sweep": _parse_sweep,
    "pcaep": _parse_pcaep,
    "spectrum": _parse_spectrum,
    "check": _parse_check,
}


def build_command_config(command: str, data: dict):
    """(CommonConfig, command config) from a loaded TOML dict."""
    if command not in _PARSERS:
        raise ConfigError(f"unknown command {command!r}")
    known_sections = set(_PARSERS)
    for key, val in data.items():
        if isinstance(val, dict) and key not in known_sections:
            raise ConfigError(f"unknown section [{key}] in config")
        if not isinstance(val, dict) and key not in ("seed", "out", "threads", "force"):
            raise ConfigError(f"unknown top-level key {key!r} in config")
    common = _parse_common(data)
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{command}] must be a section")
    return common, _PARSERS[command](section)


def resolved_dict(command: str, common: CommonConfig, cfg) -> dict:
    """The fully resolved settings of a run, ready for emit_toml."""
    top = {"seed": common.seed, "threads": common.threads, "force": common.force}
    if common.out is not None:
        top["out"] = common.out
    if command == "predict":
        sec = {
            "funcs": [{"kind": k, **p} for k, p in cfg.funcs],
            "deltas": list(cfg.deltas),
            "mu_points": cfg.mu_points,
            "branch": cfg.branch,
            "thresholds": cfg.thresholds,
        }
    elif command == "sweep":
        funcs = []
        for kind, params, shift, max_iter in cfg.funcs:
            entry = {"kind": kind, **params}
            if shift is not None:
                entry["shift"] = shift
            if max_iter is not None:
                entry["max_iter"] = max_iter
            funcs.append(entry)
        sec = {
            "ensembles": list(cfg.ensembles),
            "n": cfg.n,
            "deltas": list(cfg.deltas),
            "funcs": funcs,
            "trials": cfg.trials,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "haar_n_cap": cfg.haar_n_cap,
        }
    elif command == "pcaep":
        sec = {
            "ensemble": cfg.ensemble,
            "n": cfg.n,
            "delta": cfg.delta,
            "func": {"kind": cfg.func[0], **dict(cfg.func[1])},
            "mu": cfg.mu,
            "alpha0": cfg.alpha0.real,
            "alpha0_im": cfg.alpha0.imag,
            "sigma0_sq": cfg.sigma0_sq,
            "t_max": cfg.t_max,
            "seeds": list(cfg.seeds),
        }
    elif command == "spectrum":
        sec = {
            "ensemble": cfg.ensemble,
            "n": cfg.n,
            "delta": cfg.delta,
            "func": {"kind": cfg.func[0], **dict(cfg.func[1])},
            "branch": cfg.branch,
        }
    else:
        sec = {"criteria": list(cfg.criteria)}
    top[command] = sec
    return top
