"""Experiment configuration: ``[section]`` headers with ``key = value`` lines.

Example::

    [experiment]
    regime = time-discrete
    cases = 1, 2, 3, 4, 5
    overlaps = h, none
    h = 1/16, 1/32, 1/64
    tol = 1e-6
    max_iters = 5000
    strategy = asymptotic-formula

    [regime]
    eta_tilde = 1

Every value is checked by :func:`load_config` before anything runs, and
unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

from osmaxwell.discretization import WALL_CONDITIONS
from osmaxwell.errors import ConfigError
from osmaxwell.model import HARMONIC, TIME_DISCRETE, HarmonicRegime, MediumParameters, TimeDiscreteRegime
from osmaxwell.optimize import ASYMPTOTIC, NUMERIC

FIT_QUANTITIES = ("iterations", "one-minus-contraction")


@dataclass(frozen=True)
class ExperimentConfig:
    regime: str = TIME_DISCRETE
    cases: tuple = (1, 2, 3, 4, 5)
    overlaps: tuple = ("h", "none")
    h_inv: tuple = (16, 32, 64, 128)
    tol: float = 1e-6
    max_iters: int = 5000
    seed: int = 0
    strategy: str = ASYMPTOTIC
    out: str = "results"
    walls: str = "impedance"
    gmres_restart: int | None = None
    epsilon: float = 1.0
    mu: float = 1.0
    sigma: float = 0.0
    omega_tilde: float = 2 * math.pi
    eta_tilde: float = 1.0
    n_samples: int = 1024
    fit_quantity: str = "iterations"
    fit_column: str = "it_s"

    @property
    def medium(self) -> MediumParameters:
        return MediumParameters(self.epsilon, self.mu, self.sigma)

    def make_regime(self):
        if self.regime == HARMONIC:
            return HarmonicRegime.from_omega_tilde(self.omega_tilde, self.medium)
        return TimeDiscreteRegime.from_eta_tilde(self.eta_tilde, self.medium)

    def echo(self) -> list[tuple[str, str]]:
        """Sorted ``(key, value)`` pairs for CSV metadata (the output path is left out)."""
        return sorted((k, _format(v)) for k, v in asdict(self).items() if k != "out")


def _format(v):
    if isinstance(v, tuple):
        return ",".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _list(s):
    items = [x.strip() for x in s.split(",")]
    if not items or any(not x for x in items):
        raise ValueError("empty list entry")
    return items


def _h_inv(s):
    """``"1/16"``, ``"0.0625"`` or ``"16"`` (as ``1/h``) -> even ``N >= 4``."""
    out = []
    for item in _list(s):
        f = Fraction(item)
        n = f.denominator / f.numerator if f <= 1 else f
        if n != int(n):
            raise ValueError(f"h={item} is not 1/N")
        n = int(n)
        if n < 4 or n % 2:
            raise ValueError(f"h={item} needs N = 1/h even and >= 4")
        out.append(n)
    if len(set(out)) != len(out):
        raise ValueError("repeated mesh size")
    return tuple(sorted(out))


def _cases(s):
    c = tuple(int(x) for x in _list(s))
    if any(x not in (1, 2, 3, 4, 5) for x in c):
        raise ValueError(f"cases must be within 1..5, got {s}")
    return tuple(sorted(set(c)))


def _overlaps(s):
    o = tuple(_list(s))
    if any(x not in ("h", "none") for x in o):
        raise ValueError(f"overlaps must be 'h' or 'none', got {s}")
    return tuple(x for x in ("h", "none") if x in o)


def _choice(*allowed):
    def parse(s):
        if s not in allowed:
            raise ValueError(f"expected one of {allowed}, got {s!r}")
        return s
    return parse


def _positive(kind):
    def parse(s):
        v = kind(s)
        if not v > 0 or (kind is float and not math.isfinite(v)):
            raise ValueError(f"must be positive, got {s}")
        return v
    return parse


def _nonneg_float(s):
    v = float(s)
    if not (v >= 0 and math.isfinite(v)):
        raise ValueError(f"must be >= 0, got {s}")
    return v


def _seed(s):
    v = int(s)
    if not 0 <= v < 2**64:
        raise ValueError(f"seed must be a u64, got {s}")
    return v


def _restart(s):
    if s.lower() in ("none", "full", "0"):
        return None
    return _positive(int)(s)


SCHEMA = {
    "experiment": {
        "regime": ("regime", _choice(HARMONIC, TIME_DISCRETE)),
        "cases": ("cases", _cases),
        "overlaps": ("overlaps", _overlaps),
        "h": ("h_inv", _h_inv),
        "tol": ("tol", _positive(float)),
        "max_iters": ("max_iters", _positive(int)),
        "seed": ("seed", _seed),
        "strategy": ("strategy", _choice(ASYMPTOTIC, NUMERIC)),
        "out": ("out", str),
        "walls": ("walls", _choice(*WALL_CONDITIONS)),
        "gmres_restart": ("gmres_restart", _restart),
    },
    "medium": {
        "epsilon": ("epsilon", _positive(float)),
        "mu": ("mu", _positive(float)),
        "sigma": ("sigma", _nonneg_float),
    },
    "regime": {
        "omega_tilde": ("omega_tilde", _positive(float)),
        "eta_tilde": ("eta_tilde", _positive(float)),
    },
    "analyze": {
        "n_samples": ("n_samples", _positive(int)),
    },
    "fit": {
        "quantity": ("fit_quantity", _choice(*FIT_QUANTITIES)),
        "column": ("fit_column", _choice("it_s", "it_gm")),
    },
}


def parse_config(text: str, source="<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            name, conv = SCHEMA[section][key]
            try:
                values[name] = conv(raw.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"{source}: [{section}] {key} = {raw}: {exc}") from exc
    cfg = ExperimentConfig(**values)
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, source=str(path))


def validate(cfg: ExperimentConfig):
    """Cross-field checks; raises :class:`ConfigError`."""
    if not cfg.cases:
        raise ConfigError("case list is empty")
    if not cfg.overlaps:
        raise ConfigError("overlap list is empty")
    if not cfg.h_inv:
        raise ConfigError("mesh list is empty")
    if cfg.regime == HARMONIC and cfg.sigma != 0 and cfg.strategy == ASYMPTOTIC:
        # the closed-form parameters assume a lossless medium
        raise ConfigError("asymptotic-formula parameters need sigma = 0 in the harmonic regime")
    if cfg.n_samples < 512:
        raise ConfigError("n_samples must be at least 512")


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    cfg = replace(cfg, **{k: v for k, v in kw.items() if v is not None})
    validate(cfg)
    return cfg
