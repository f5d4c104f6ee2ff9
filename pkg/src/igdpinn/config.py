"""Experiment configuration: flat ``key = value`` text with dotted section names.

Example::

    # heat run
    problem.name = heat
    model.m = 4096
    optim.eta = 1.0
    lbfgs.grad_tol = 1e-10

Values are Python literals (numbers, ``true``/``false``, lists); anything that
does not parse as a literal is taken as a bare string. Unknown keys, type
mismatches and out-of-range values raise :class:`ConfigError` naming the key.
Every key has a default, so an empty file is a valid configuration.
"""

import ast
from dataclasses import MISSING, dataclass, field, fields, is_dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class ProblemConfig:
    name: str = "heat"              # heat | helmholtz
    d: int = 1                      # spatial dimension of the heat problem
    T: float = 1.0                  # final time of the heat problem
    k: float = 4.0                  # Helmholtz wave number
    solution: str = "single"        # Helmholtz exact solution: single | multiscale
    offset: float = 0.1             # origin shift of the coordinate map, in side lengths
    boundary_weight: float = 1.0


@dataclass(frozen=True)
class SamplesConfig:
    n1: int = 50
    n2: int = 20
    parallel_tol: float = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    m: int = 512
    activation: str = "tanh"
    init_scale: str = "unit"        # unit | invdim
    bias: bool = False              # append a constant input coordinate


@dataclass(frozen=True)
class OptimConfig:
    mode: str = "igd"               # igd | gd
    eta: float = 1.0
    iters: int = 100
    abort_on_subsolver_failure: bool = False


@dataclass(frozen=True)
class LbfgsConfig:
    memory: int = 10
    max_iters: int = 100
    grad_tol: float = 1e-8
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search: int = 30


@dataclass(frozen=True)
class DiagnosticsConfig:
    record_gram_every: int = 0
    residual_terms: bool = False
    panels: int = 32
    timing: bool = False
    eigen_method: str = "auto"      # auto | jacobi | lapack


@dataclass(frozen=True)
class EvalConfig:
    grid: int = 101                 # nodes per axis of the evaluation grid


@dataclass(frozen=True)
class ToyConfig:
    K1: float = 1e-4
    K2: float = 1e4
    eta: float = 1e-4
    steps: int = 5
    theta1: float = 1.0
    theta2: float = 1.0
    theta1_star: float = 0.0
    theta2_star: float = 0.0


@dataclass(frozen=True)
class StudyConfig:
    widths: tuple = (256, 1024, 4096)
    seeds: int = 10                 # independent G(0) draws per width
    m_draw: int = 4096              # width of the draws averaged into the G-infinity estimate
    reps: int = 64                  # number of those draws


@dataclass(frozen=True)
class ScalingConfig:
    widths: tuple = (128, 512, 2048, 8192)
    seeds: int = 5
    iters: int = 20
    eta: float = 1.0


@dataclass(frozen=True)
class GradcheckConfig:
    instances: int = 50
    step: float = 1e-5
    max_m: int = 8
    max_d: int = 3


@dataclass(frozen=True)
class Config:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    samples: SamplesConfig = field(default_factory=SamplesConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    lbfgs: LbfgsConfig = field(default_factory=LbfgsConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    toy: ToyConfig = field(default_factory=ToyConfig)
    study: StudyConfig = field(default_factory=StudyConfig)
    scaling: ScalingConfig = field(default_factory=ScalingConfig)
    gradcheck: GradcheckConfig = field(default_factory=GradcheckConfig)
    seed: int = 0
    output: str = "out"

    def get(self, key):
        obj = self
        for part in key.split("."):
            obj = getattr(obj, part)
        return obj

    def with_values(self, **values):
        """Copy with dotted keys overridden, e.g. ``cfg.with_values(**{"optim.eta": 0.1})``."""
        return parse_config(serialize_config(self) + "".join(
            f"{k} = {_format(v)}\n" for k, v in values.items()))


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _one_of(*choices):
    def check(v):
        return v in choices
    check.text = "one of " + ", ".join(choices)
    return check


_ACTIVATIONS = _one_of("tanh", "logistic", "softplus")

# key -> (predicate, constraint text)
CHECKS = {
    "problem.name": (_one_of("heat", "helmholtz"), None),
    "problem.d": (lambda v: 1 <= v <= 8, "between 1 and 8"),
    "problem.T": (_positive, "> 0"),
    "problem.k": (_nonneg, ">= 0"),
    "problem.solution": (_one_of("single", "multiscale"), None),
    "problem.offset": (_positive, "> 0"),
    "problem.boundary_weight": (_positive, "> 0"),
    "samples.n1": (lambda v: v >= 1, ">= 1"),
    "samples.n2": (lambda v: v >= 1, ">= 1"),
    "samples.parallel_tol": (_nonneg, ">= 0"),
    "model.m": (lambda v: v >= 1, ">= 1"),
    "model.activation": (_ACTIVATIONS, None),
    "model.init_scale": (_one_of("unit", "invdim"), None),
    "optim.mode": (_one_of("igd", "gd"), None),
    "optim.eta": (_nonneg, ">= 0"),
    "optim.iters": (lambda v: v >= 1, ">= 1"),
    "lbfgs.memory": (lambda v: v >= 1, ">= 1"),
    "lbfgs.max_iters": (lambda v: v >= 1, ">= 1"),
    "lbfgs.grad_tol": (_nonneg, ">= 0"),
    "lbfgs.wolfe_c1": (lambda v: 0 < v < 1, "in (0, 1)"),
    "lbfgs.wolfe_c2": (lambda v: 0 < v < 1, "in (0, 1)"),
    "lbfgs.max_line_search": (lambda v: v >= 1, ">= 1"),
    "diagnostics.record_gram_every": (_nonneg, ">= 0"),
    "diagnostics.panels": (lambda v: v >= 2 and v % 2 == 0, "even and >= 2"),
    "diagnostics.eigen_method": (_one_of("auto", "jacobi", "lapack"), None),
    "eval.grid": (lambda v: v >= 2, ">= 2"),
    "toy.K1": (_positive, "> 0"),
    "toy.K2": (_positive, "> 0"),
    "toy.eta": (_nonneg, ">= 0"),
    "toy.steps": (lambda v: v >= 1, ">= 1"),
    "study.widths": (lambda v: len(v) >= 1 and all(w >= 1 for w in v), "non-empty, entries >= 1"),
    "study.seeds": (lambda v: v >= 1, ">= 1"),
    "study.m_draw": (lambda v: v >= 1, ">= 1"),
    "study.reps": (lambda v: v >= 1, ">= 1"),
    "scaling.widths": (lambda v: len(v) >= 2 and all(w >= 1 for w in v), "at least two entries >= 1"),
    "scaling.seeds": (lambda v: v >= 1, ">= 1"),
    "scaling.iters": (lambda v: v >= 1, ">= 1"),
    "scaling.eta": (_positive, "> 0"),
    "gradcheck.instances": (lambda v: v >= 1, ">= 1"),
    "gradcheck.step": (_positive, "> 0"),
    "gradcheck.max_m": (lambda v: v >= 1, ">= 1"),
    "gradcheck.max_d": (lambda v: 1 <= v <= 8, "between 1 and 8"),
    "seed": (lambda v: 0 <= v < 2**64, "in [0, 2^64)"),
}


def _default(f):
    return f.default if f.default_factory is MISSING else f.default_factory()


def _keys(cls=Config, prefix=""):
    """Map of dotted key -> default value."""
    out = {}
    for f in fields(cls):
        default = _default(f)
        if is_dataclass(default):
            out.update(_keys(type(default), prefix + f.name + "."))
        else:
            out[prefix + f.name] = default
    return out


DEFAULTS = _keys()


def _literal(text):
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _string(key, raw):
    if raw[:1] in ("'", '"'):
        try:
            value = ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            raise ConfigError(key, f"malformed quoted string {raw!r}") from None
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {raw!r}")
        return value
    return raw


def _coerce(key, raw, default):
    kind = type(default)
    if kind is bool:
        if isinstance(raw, bool):
            return raw
        raise ConfigError(key, f"expected true or false, got {raw!r}")
    if kind is int:
        if isinstance(raw, int) and not isinstance(raw, bool):
            return raw
        raise ConfigError(key, f"expected an integer, got {raw!r}")
    if kind is float:
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return float(raw)
        raise ConfigError(key, f"expected a number, got {raw!r}")
    if kind is tuple:
        if isinstance(raw, (list, tuple)) and all(
                isinstance(v, int) and not isinstance(v, bool) for v in raw):
            return tuple(raw)
        raise ConfigError(key, f"expected a list of integers, got {raw!r}")
    raise ConfigError(key, f"unsupported value {raw!r}")


def _validate(key, value):
    if isinstance(value, float) and value != value:
        raise ConfigError(key, "must not be NaN")
    check = CHECKS.get(key)
    if check is None:
        return
    pred, text = check
    if not pred(value):
        raise ConfigError(key, f"must be {text or getattr(pred, 'text', 'valid')}, got {value!r}")


def _build(values, cls=Config, prefix=""):
    kwargs = {}
    for f in fields(cls):
        key = prefix + f.name
        if key in values:
            kwargs[f.name] = values[key]
        else:
            default = _default(f)
            if is_dataclass(default):
                kwargs[f.name] = _build(values, type(default), key + ".")
    return cls(**kwargs)


def _strip_comment(line):
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in ("'", '"'):
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def parse_config(text):
    """Parse configuration text into a validated :class:`Config`."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(key, "unknown key")
        if raw == "":
            raise ConfigError(key, "missing value")
        if isinstance(DEFAULTS[key], str):
            value = _string(key, raw)
        else:
            value = _coerce(key, _literal(raw), DEFAULTS[key])
        _validate(key, value)
        values[key] = value
    cfg = _build(values)
    if not cfg.lbfgs.wolfe_c1 < cfg.lbfgs.wolfe_c2:
        raise ConfigError("lbfgs.wolfe_c2", "must exceed lbfgs.wolfe_c1")
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        return "[" + ", ".join(str(v) for v in value) + "]"
    if isinstance(value, str) and (value != value.strip() or "#" in value or value[:1] in "'\"" or not value):
        return repr(value)
    return str(value)


def serialize_config(cfg):
    """Every key with its value, one per line; ``parse_config`` reads it back to an equal Config."""
    return "".join(f"{key} = {_format(cfg.get(key))}\n" for key in DEFAULTS)

