"""Experiment configuration and the flat key = value file format.

A config file is plain text: one `key = value` pair per line, `#`
starts a comment, blank lines are ignored.  Keys are case-sensitive
and spelled exactly like the report columns, e.g.

    # ten-step walk on the baseline device
    n_steps = 10
    g_over_2pi_MHz = 50
    omega_over_2pi_MHz = 100
    coin0 = plus-i
    scale = 1.0

Unknown keys, duplicate keys and malformed values raise ConfigError
with the offending line number.  Lifetimes accept `inf` to switch a
channel off; `mu_over_2pi_MHz = auto` makes the second coupling track
the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .idealwalk import CoinState, coin_preset
from .lindblad import DecoherenceRates, IntegratorConfig
from .statespace import DeviceParams, StateSpace


class ConfigError(ValueError):
    """Bad key, value or syntax in a configuration source."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one walk experiment.

    Laboratory units: frequencies in MHz (omega / 2pi), times in us.
    scale multiplies every decoherence lifetime; lifetimes of math.inf
    disable their channel entirely.
    """

    n_steps: int = 10
    g_over_2pi_mhz: float = 50.0
    omega_over_2pi_mhz: float = 100.0
    mu_over_2pi_mhz: float | None = None
    theta_rad: float = math.pi / 4
    phi_rad: float = -math.pi / 2
    coin0: str = "plus-i"
    scale: float = 1.0
    t1_cavity_us: float = 10.0
    t1_ge_us: float = 10.0
    t1_ef_us: float = 10.0
    t1_gf_us: float = 10.0
    tphi_e_us: float = 5.0
    tphi_f_us: float = 5.0
    method: str = "auto"
    dt_max_us: float = math.inf
    base_substeps: int = 1000
    richardson: bool = True
    richardson_tol: float = 1e-9
    representation: str = "truncated"
    fock_cutoff: int = 2
    renormalize: bool = False
    output: str | None = None
    format: str = "csv"

    # -- derived objects ----------------------------------------------

    def device_params(self) -> DeviceParams:
        return DeviceParams.from_mhz(
            self.n_steps, self.g_over_2pi_mhz, self.omega_over_2pi_mhz,
            self.mu_over_2pi_mhz, self.theta_rad, self.phi_rad)

    def rates(self) -> DecoherenceRates:
        base = DecoherenceRates.from_lifetimes_us(
            t_cavity=self.t1_cavity_us, t_ge=self.t1_ge_us,
            t_ef=self.t1_ef_us, t_gf=self.t1_gf_us,
            t_phi_e=self.tphi_e_us, t_phi_f=self.tphi_f_us)
        return base.scaled(self.scale)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            method=self.method, dt_max_us=self.dt_max_us,
            base_substeps=self.base_substeps, richardson=self.richardson,
            richardson_tol=self.richardson_tol)

    def space(self, mode: str | None = None) -> StateSpace:
        mode = self.representation if mode is None else mode
        return StateSpace(self.n_steps, mode=mode,
                          fock_cutoff=self.fock_cutoff)

    def coin(self) -> CoinState:
        return coin_preset(self.coin0)


# file keys -> dataclass fields (keys follow the report column spelling)
_KEY_TO_FIELD = {
    "n_steps": "n_steps",
    "g_over_2pi_MHz": "g_over_2pi_mhz",
    "omega_over_2pi_MHz": "omega_over_2pi_mhz",
    "mu_over_2pi_MHz": "mu_over_2pi_mhz",
    "theta_rad": "theta_rad",
    "phi_rad": "phi_rad",
    "coin0": "coin0",
    "scale": "scale",
    "t1_cavity_us": "t1_cavity_us",
    "t1_ge_us": "t1_ge_us",
    "t1_ef_us": "t1_ef_us",
    "t1_gf_us": "t1_gf_us",
    "tphi_e_us": "tphi_e_us",
    "tphi_f_us": "tphi_f_us",
    "method": "method",
    "dt_max_us": "dt_max_us",
    "base_substeps": "base_substeps",
    "richardson": "richardson",
    "richardson_tol": "richardson_tol",
    "representation": "representation",
    "fock_cutoff": "fock_cutoff",
    "renormalize": "renormalize",
    "output": "output",
    "format": "format",
}

_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}

_CHOICES = {
    "coin0": ("zero", "one", "plus-i"),
    "method": ("auto", "rk4", "expm"),
    "representation": ("truncated", "full"),
    "format": ("csv", "json"),
}

_INT_FIELDS = {"n_steps", "base_substeps", "fock_cutoff"}
_BOOL_FIELDS = {"richardson", "renormalize"}
_STR_FIELDS = {"coin0", "method", "representation", "format", "output"}


def _parse_value(field_name: str, raw: str, where: str):
    raw = raw.strip()
    if field_name == "mu_over_2pi_mhz" and raw.lower() in ("auto", "none"):
        return None
    if field_name in _INT_FIELDS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where}: expected integer, got {raw!r}") from None
    if field_name in _BOOL_FIELDS:
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise ConfigError(f"{where}: expected boolean, got {raw!r}") from None
    if field_name in _STR_FIELDS:
        if field_name in _CHOICES and raw not in _CHOICES[field_name]:
            raise ConfigError(f"{where}: {raw!r} not one of "
                              f"{_CHOICES[field_name]}")
        return raw
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected number, got {raw!r}") from None
    if math.isnan(val):
        raise ConfigError(f"{where}: nan is not a valid value")
    return val


def parse_field_value(field_name: str, raw: str,
                      where: str = "override") -> object:
    """Parse one value string for a config field (CLI override path)."""
    if field_name not in _FIELD_TO_KEY:
        raise ConfigError(f"{where}: unknown field {field_name!r}")
    return _parse_value(field_name, raw, where)


def config_keys() -> dict[str, str]:
    """File-grammar key -> dataclass field name, in declaration order."""
    return dict(_KEY_TO_FIELD)


def parse_config_text(text: str) -> dict[str, object]:
    """Parse the flat grammar into a field -> value mapping."""
    seen: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, "
                              f"got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name = _KEY_TO_FIELD[key]
        if field_name in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen[field_name] = _parse_value(field_name, raw, f"line {lineno}")
    return seen


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Range checks shared by every entry point."""
    def bad(msg):
        raise ConfigError(msg)

    if cfg.n_steps < 1:
        bad("n_steps must be >= 1")
    for name in ("g_over_2pi_mhz", "omega_over_2pi_mhz"):
        v = getattr(cfg, name)
        if not (v > 0 and math.isfinite(v)):
            bad(f"{_FIELD_TO_KEY[name]} must be positive and finite")
    if cfg.mu_over_2pi_mhz is not None and not (
            cfg.mu_over_2pi_mhz > 0 and math.isfinite(cfg.mu_over_2pi_mhz)):
        bad("mu_over_2pi_MHz must be positive and finite (or auto)")
    if not 0 < cfg.theta_rad < math.pi / 2:
        bad("theta_rad must lie in (0, pi/2)")
    if not cfg.scale > 0:
        bad("scale must be positive")
    for name in ("t1_cavity_us", "t1_ge_us", "t1_ef_us", "t1_gf_us",
                 "tphi_e_us", "tphi_f_us"):
        if not getattr(cfg, name) > 0:
            bad(f"{_FIELD_TO_KEY[name]} must be positive (inf to disable)")
    if not cfg.dt_max_us > 0:
        bad("dt_max_us must be positive")
    if cfg.base_substeps < 1:
        bad("base_substeps must be >= 1")
    if not cfg.richardson_tol > 0:
        bad("richardson_tol must be positive")
    if cfg.fock_cutoff < 2:
        bad("fock_cutoff must be >= 2")
    for name in ("coin0", "method", "representation", "format"):
        if getattr(cfg, name) not in _CHOICES[name]:
            bad(f"{name} must be one of {_CHOICES[name]}")
    return cfg


def config_from_mapping(mapping: dict[str, object],
                        base: ExperimentConfig | None = None) -> ExperimentConfig:
    base = base if base is not None else ExperimentConfig()
    return validate_config(replace(base, **mapping))


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_mapping(parse_config_text(text), base)
