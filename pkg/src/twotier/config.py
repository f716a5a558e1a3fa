"""Campaign configuration: plain-text `key = value` files plus CLI overrides.

Unknown keys, malformed lines, and out-of-range values are hard errors that
name the offending line.  An empty (or absent) file yields the documented
defaults: the full comparison of all three optimizers, budget 30 = 10 + 20,
10 repetitions, 200 episodes per evaluation.
"""

from dataclasses import dataclass, field, replace

from .params import AlgorithmParams
from .tuner import OPTIMIZER_CODES, REAL_DIM_NAMES

DEFAULT_BOUNDS = {
    # The search intervals for alpha/epsilon/gamma stop 0.01 short of the
    # open unit interval so every proposal is a constructible setting.
    "alpha": (0.01, 0.99),
    "epsilon": (0.01, 0.99),
    "gamma": (0.01, 0.99),
    "tau": (0.05, 5.0),
    "n_bins": (5, 20),
    "n_bins_angle": (5, 20),
}

_OPTIMIZER_NAMES = tuple(OPTIMIZER_CODES)

_INT_KEYS = {
    "budget",
    "n_structural",
    "n_real",
    "repetitions",
    "base_seed",
    "episodes",
    "max_steps",
    "workers",
    "prior_n_bins",
    "prior_n_bins_angle",
    "n_bins_lower",
    "n_bins_upper",
    "n_bins_angle_lower",
    "n_bins_angle_upper",
}
_FLOAT_KEYS = {
    "alpha_lower",
    "alpha_upper",
    "epsilon_lower",
    "epsilon_upper",
    "gamma_lower",
    "gamma_upper",
    "tau_lower",
    "tau_upper",
    "prior_alpha",
    "prior_epsilon",
    "prior_gamma",
    "prior_tau",
    "prior_lambda",
    "prior_epsilon_decay_rate",
    "epsilon_min",
    "x_dot_limit",
    "theta_dot_limit",
}
_BOOL_KEYS = {"rs_fix_structural", "t_interval"}
_STR_KEYS = {"out_dir", "optimizers"}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS

_PRIOR_FIELDS = {
    "prior_alpha": "alpha",
    "prior_epsilon": "epsilon",
    "prior_gamma": "gamma",
    "prior_tau": "tau",
    "prior_lambda": "lam",
    "prior_epsilon_decay_rate": "epsilon_decay_rate",
    "prior_n_bins": "n_bins",
    "prior_n_bins_angle": "n_bins_angle",
    "epsilon_min": "epsilon_min",
}


class ConfigError(ValueError):
    """Invalid campaign configuration."""


@dataclass(frozen=True)
class CampaignConfig:
    optimizers: tuple[str, ...] = _OPTIMIZER_NAMES
    budget: int = 30
    n_structural: int = 10
    n_real: int = 20
    repetitions: int = 10
    base_seed: int = 0
    episodes: int = 200
    max_steps: int = 200
    out_dir: str = "results"
    rs_fix_structural: bool = False
    t_interval: bool = False
    workers: int = 1
    x_dot_limit: float = 3.0
    theta_dot_limit: float = 3.5
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    prior: AlgorithmParams = field(default_factory=AlgorithmParams)


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _coerce(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            return _parse_bool(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"invalid value for '{key}': {exc}") from exc


def _read_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        try:
            values[key] = _coerce(key, raw.strip())
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return values


def _apply(values: dict) -> CampaignConfig:
    config = CampaignConfig()
    bounds = dict(DEFAULT_BOUNDS)
    prior_kwargs = {}
    plain = {}
    for key, value in values.items():
        if key in _PRIOR_FIELDS:
            prior_kwargs[_PRIOR_FIELDS[key]] = value
        elif key.endswith("_lower") or key.endswith("_upper"):
            name, _, side = key.rpartition("_")
            lo, hi = bounds[name]
            bounds[name] = (value, hi) if side == "lower" else (lo, value)
        elif key == "optimizers":
            names = tuple(s.strip() for s in str(value).split(",") if s.strip())
            plain["optimizers"] = names
        else:
            plain[key] = value
    try:
        prior = AlgorithmParams(**prior_kwargs) if prior_kwargs else AlgorithmParams()
    except ValueError as exc:
        raise ConfigError(f"invalid prior setting: {exc}") from exc
    return replace(config, bounds=bounds, prior=prior, **plain)


def validate(config: CampaignConfig) -> CampaignConfig:
    if not config.optimizers:
        raise ConfigError("at least one optimizer required")
    for name in config.optimizers:
        if name not in _OPTIMIZER_NAMES:
            raise ConfigError(
                f"unknown optimizer '{name}' (choose from {', '.join(_OPTIMIZER_NAMES)})"
            )
    if len(set(config.optimizers)) != len(config.optimizers):
        raise ConfigError("duplicate optimizer names")
    if config.budget < 1:
        raise ConfigError("budget must be >= 1")
    if config.repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if config.episodes < 1:
        raise ConfigError("episodes must be >= 1")
    if config.max_steps < 1:
        raise ConfigError("max_steps must be >= 1")
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    if "two_tier" in config.optimizers:
        if config.n_structural < 1 or config.n_real < 1:
            raise ConfigError("n_structural and n_real must be >= 1")
        if config.n_structural + config.n_real != config.budget:
            raise ConfigError(
                f"n_structural + n_real must equal budget "
                f"({config.n_structural} + {config.n_real} != {config.budget})"
            )
    if config.x_dot_limit <= 0.0 or config.theta_dot_limit <= 0.0:
        raise ConfigError("velocity clip limits must be positive")
    for name in REAL_DIM_NAMES:
        lo, hi = config.bounds[name]
        if lo >= hi:
            raise ConfigError(f"{name}: lower >= upper ({lo} >= {hi})")
        prior_value = getattr(config.prior, name)
        if not (lo <= prior_value <= hi):
            raise ConfigError(
                f"prior {name} = {prior_value} outside the search interval [{lo}, {hi}]"
            )
    for name in ("n_bins", "n_bins_angle"):
        lo, hi = config.bounds[name]
        if int(lo) != lo or int(hi) != hi:
            raise ConfigError(f"{name} bounds must be integers")
        if lo < 5 or hi > 20:
            raise ConfigError(f"{name} bounds must stay within [5, 20]")
    for name in ("alpha", "epsilon", "gamma"):
        lo, hi = config.bounds[name]
        if lo <= 0.0 or hi >= 1.0:
            raise ConfigError(f"{name} bounds must lie strictly inside (0, 1)")
    lo, hi = config.bounds["tau"]
    if lo <= 0.0:
        raise ConfigError("tau lower bound must be positive")
    return config


def parse_config(path: str | None = None, overrides: dict | None = None) -> CampaignConfig:
    """Build a validated CampaignConfig from a file and/or override mapping.

    ``overrides`` (typically CLI flags) take precedence over file values;
    both are optional.
    """
    values = _read_file(path) if path is not None else {}
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown key '{key}'")
            values[key] = value
    return validate(_apply(values))
