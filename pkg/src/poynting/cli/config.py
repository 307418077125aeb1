"""Flat dotted-key run configuration: `key = value` lines with `#` comments.

Unknown keys are rejected with the offending key path. Exactly one of
time.steps / time.dt must be given. Scenario presets fill material and source
defaults for keys the file leaves out; defaults are resolved at parse time so
the emitted effective config reparses to an equal object.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from ..errors import ConfigurationError

SCENARIOS = ("cavity_te101", "damped_cavity", "driven_pulse", "zero_data",
             "custom")


@dataclass(frozen=True)
class SimConfig:
    grid_n: tuple[int, int, int]
    grid_extent: tuple[float, float, float]
    t_final: float
    scenario: str
    steps: int | None = None
    dt: float | None = None
    scheme: str = "midpoint"
    cg_tol: float = 1e-12
    cg_maxit: int = 2000
    eps: tuple[float, float, float] = (1.0, 1.0, 1.0)
    mu: tuple[float, float, float] = (1.0, 1.0, 1.0)
    sigma: tuple[float, float, float] = (0.0, 0.0, 0.0)
    materials_file: str | None = None
    eps_star: float = 1e-6
    mu_star: float = 1e-6
    source_preset: str = "zero"
    source_amplitude: tuple[float, float, float] = (0.0, 0.0, 1.0)
    source_t_center: float = 0.0
    source_tau: float = 1.0
    source_freq: float = 0.0
    out_dir: str = "out"
    save_trace: bool = False
    snapshot_stride: int = 1
    seed: int = 1234
    deterministic: bool = True
    threads: int = 1
    verify_weakform: bool = False
    verify_steklov: bool = False
    verify_uniqueness: bool = False
    verify_gauss: bool = False
    verify_lambdas: tuple[float, ...] = ()
    verify_bank_size: int = 5
    verify_delta: float = 1e-8

    @property
    def dt_effective(self) -> float:
        if self.dt is not None:
            return self.dt
        return self.t_final / self.steps

    @property
    def steps_effective(self) -> int:
        if self.steps is not None:
            return self.steps
        n = round(self.t_final / self.dt)
        if n < 1 or abs(n * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ConfigurationError(
                f"time.dt = {self.dt:g} does not divide time.T = {self.t_final:g}")
        return n


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got '{raw}'")


def _parse_triple(raw: str, key: str, conv):
    parts = [p for p in raw.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigurationError(f"{key}: expected three values, got '{raw}'")
    try:
        return tuple(conv(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def _parse_float_list(raw: str, key: str):
    parts = [p for p in raw.replace(",", " ").split() if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def _scalar(conv):
    def parse(raw: str, key: str):
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{key}: {exc}") from exc
    return parse


# key path -> (SimConfig field, parser)
_KEYS = {
    "grid.n": ("grid_n", lambda r, k: _parse_triple(r, k, int)),
    "grid.extent": ("grid_extent", lambda r, k: _parse_triple(r, k, float)),
    "time.T": ("t_final", _scalar(float)),
    "time.steps": ("steps", _scalar(int)),
    "time.dt": ("dt", _scalar(float)),
    "scenario": ("scenario", lambda r, k: r),
    "stepper.scheme": ("scheme", lambda r, k: r),
    "stepper.cg_tol": ("cg_tol", _scalar(float)),
    "stepper.cg_maxit": ("cg_maxit", _scalar(int)),
    "materials.eps": ("eps", lambda r, k: _parse_triple(r, k, float)),
    "materials.mu": ("mu", lambda r, k: _parse_triple(r, k, float)),
    "materials.sigma": ("sigma", lambda r, k: _parse_triple(r, k, float)),
    "materials.file": ("materials_file", lambda r, k: r),
    "materials.eps_star": ("eps_star", _scalar(float)),
    "materials.mu_star": ("mu_star", _scalar(float)),
    "source.preset": ("source_preset", lambda r, k: r),
    "source.amplitude": ("source_amplitude", lambda r, k: _parse_triple(r, k, float)),
    "source.t_center": ("source_t_center", _scalar(float)),
    "source.tau": ("source_tau", _scalar(float)),
    "source.freq": ("source_freq", _scalar(float)),
    "output.dir": ("out_dir", lambda r, k: r),
    "output.trace": ("save_trace", _parse_bool),
    "output.stride": ("snapshot_stride", _scalar(int)),
    "seed": ("seed", _scalar(int)),
    "deterministic": ("deterministic", _parse_bool),
    "threads": ("threads", _scalar(int)),
    "verify.weakform": ("verify_weakform", _parse_bool),
    "verify.steklov": ("verify_steklov", _parse_bool),
    "verify.uniqueness": ("verify_uniqueness", _parse_bool),
    "verify.gauss": ("verify_gauss", _parse_bool),
    "verify.lambdas": ("verify_lambdas", _parse_float_list),
    "verify.bank_size": ("verify_bank_size", _scalar(int)),
    "verify.delta": ("verify_delta", _scalar(float)),
}

_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}

_REQUIRED = ("grid.n", "grid.extent", "time.T", "scenario")


def parse_config(text: str) -> SimConfig:
    """Parse configuration text, apply scenario defaults, validate."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got '{body}'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key '{key}'")
        field_name, parser = _KEYS[key]
        if field_name in values:
            raise ConfigurationError(f"line {lineno}: duplicate key '{key}'")
        values[field_name] = parser(raw, key)

    for key in _REQUIRED:
        if _KEYS[key][0] not in values:
            raise ConfigurationError(f"missing required key '{key}'")
    has_steps = "steps" in values
    has_dt = "dt" in values
    if has_steps == has_dt:
        raise ConfigurationError(
            "exactly one of time.steps and time.dt must be given")

    cfg = SimConfig(**values)
    cfg = _apply_scenario_defaults(cfg, explicit=set(values))
    _validate(cfg)
    return cfg


def _apply_scenario_defaults(cfg: SimConfig, explicit: set[str]) -> SimConfig:
    updates = {}
    if cfg.scenario == "damped_cavity" and "sigma" not in explicit:
        updates["sigma"] = (0.5, 0.5, 0.5)
    if cfg.scenario == "driven_pulse" and "source_preset" not in explicit:
        updates["source_preset"] = "gaussian-pulse"
    if "source_t_center" not in explicit:
        updates["source_t_center"] = 0.25 * cfg.t_final
    if "source_tau" not in explicit:
        updates["source_tau"] = cfg.t_final / 16.0
    if "verify_lambdas" not in explicit:
        sample_dt = cfg.dt_effective * cfg.snapshot_stride
        updates["verify_lambdas"] = (8.0 * sample_dt,)
    return replace(cfg, **updates) if updates else cfg


def _validate(cfg: SimConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigurationError(
            f"scenario: '{cfg.scenario}' is not one of {SCENARIOS}")
    if cfg.scheme not in ("midpoint", "leapfrog"):
        raise ConfigurationError(f"stepper.scheme: unknown scheme '{cfg.scheme}'")
    if cfg.t_final <= 0.0:
        raise ConfigurationError("time.T must be positive")
    if cfg.steps is not None and cfg.steps < 1:
        raise ConfigurationError("time.steps must be at least 1")
    if cfg.dt is not None and cfg.dt <= 0.0:
        raise ConfigurationError("time.dt must be positive")
    if not (0.0 < cfg.cg_tol < 1.0):
        raise ConfigurationError("stepper.cg_tol must lie in (0, 1)")
    if cfg.snapshot_stride < 1:
        raise ConfigurationError("output.stride must be at least 1")
    if cfg.source_preset not in ("zero", "constant", "gaussian-pulse"):
        raise ConfigurationError(
            f"source.preset: unknown preset '{cfg.source_preset}'")
    if cfg.verify_bank_size < 1:
        raise ConfigurationError("verify.bank_size must be at least 1")
    if cfg.threads < 1:
        raise ConfigurationError("threads must be at least 1")
    # steps_effective raises when dt does not divide T
    cfg.steps_effective


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def format_config(cfg: SimConfig) -> str:
    """Canonical effective-config text; reparses to an equal SimConfig."""
    lines = ["# effective configuration"]
    for f in fields(SimConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if f.name == "verify_lambdas" and len(value) == 0:
            continue
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
