# -*- coding: utf-8 -*-

"""
Run configuration read from TOML.

Every section and key is optional; missing values take the defaults of the
reference experiment. Unknown sections and keys are rejected.

    [domain]   x_min x_max y_min y_max n_square
    [kernel]   kind = "gaussian" | "zero", amplitude, width
    [law]      kind = "power", nu, m
    [initial]  kind = "indicator" | "constant" | "gaussian", value, half_width, center, width
    [time]     k gamma fp_tol fp_max_iters lin_tol t_final direct_solve_limit
               truncate_in_convolution truncate_in_diffusion monitor_energy
    [output]   directory threads snapshot_every snapshot_times
"""
import dataclasses
import logging
import math
import tomllib

from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import Optional
from typing import Tuple

from .exceptions import ConfigError
from .interaction import GaussianKernel
from .interaction import RadialKernel
from .interaction import ZeroKernel
from .laws import DiffusionLaw
from .laws import PowerLaw
from .mesh import Mesh
from .mesh import Rectangle
from .mesh import build_structured_acute_mesh
from .solver import TimeStepConfig
from .solver import constant
from .solver import gaussian_bump
from .solver import indicator_square

log = logging.getLogger('aggrefem.config')

KERNEL_KINDS = ('gaussian', 'zero')
LAW_KINDS = ('power',)
INITIAL_KINDS = ('indicator', 'constant', 'gaussian')

DEFAULT_DOMAIN = Rectangle(-4.0, 4.0, -4.0, 4.0)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = 'gaussian'
    amplitude: float = 1.0 / math.pi
    width: float = 1.0

    def __post_init__(self):
        _require_choice('kernel.kind', self.kind, KERNEL_KINDS)
        _require(self.amplitude >= 0, 'kernel.amplitude', "must be >= 0", self.amplitude)
        _require(self.width > 0, 'kernel.width', "must be > 0", self.width)

    def build(self) -> RadialKernel:
        if self.kind == 'zero':
            return ZeroKernel()
        return GaussianKernel(self.amplitude, self.width)


@dataclass(frozen=True)
class LawSpec:
    kind: str = 'power'
    nu: float = 0.1
    m: float = 3.0

    def __post_init__(self):
        _require_choice('law.kind', self.kind, LAW_KINDS)
        _require(self.nu >= 0, 'law.nu', "must be >= 0", self.nu)
        _require(self.m >= 1, 'law.m', "must be >= 1", self.m)

    def build(self) -> DiffusionLaw:
        return PowerLaw(self.nu, self.m)


@dataclass(frozen=True)
class InitialSpec:
    kind: str = 'indicator'
    value: float = 0.25
    half_width: float = 3.0
    center: Tuple[float, float] = (0.0, 0.0)
    width: float = 1.0

    def __post_init__(self):
        _require_choice('initial.kind', self.kind, INITIAL_KINDS)
        _require(self.value >= 0, 'initial.value', "must be >= 0", self.value)
        _require(self.half_width > 0, 'initial.half_width', "must be > 0", self.half_width)
        _require(self.width > 0, 'initial.width', "must be > 0", self.width)
        if len(self.center) != 2:
            raise ConfigError(f"initial.center: expected two numbers, got {list(self.center)!r}")
        object.__setattr__(self, 'center', tuple(float(c) for c in self.center))

    def build(self) -> Callable:
        if self.kind == 'constant':
            return constant(self.value)
        if self.kind == 'gaussian':
            return gaussian_bump(self.value, self.width, self.center)
        return indicator_square(self.value, self.half_width, self.center)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; build_* turn the selectors into objects"""
    domain: Rectangle = DEFAULT_DOMAIN
    n_square: int = 120
    kernel: KernelSpec = field(default_factory=KernelSpec)
    law: LawSpec = field(default_factory=LawSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    time: TimeStepConfig = field(default_factory=TimeStepConfig)
    output_dir: Path = Path('output')
    threads: Optional[int] = None

    def __post_init__(self):
        rect = Rectangle(*self.domain)
        _require(rect.x_max > rect.x_min, 'domain.x_max', "must exceed x_min", rect.x_max)
        _require(rect.y_max > rect.y_min, 'domain.y_max', "must exceed y_min", rect.y_max)
        if isinstance(self.n_square, bool) or not isinstance(self.n_square, int) or self.n_square < 1:
            raise ConfigError(f"domain.n_square: must be an integer >= 1, got {self.n_square!r}")
        if self.threads is not None and (
                isinstance(self.threads, bool) or not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError(f"output.threads: must be an integer >= 1, got {self.threads!r}")
        object.__setattr__(self, 'domain', rect)
        object.__setattr__(self, 'output_dir', Path(self.output_dir))

    def replace(self, **changes) -> 'RunConfig':
        return dataclasses.replace(self, **changes)

    def build_mesh(self) -> Mesh:
        return build_structured_acute_mesh(self.domain, self.n_square)

    def build_kernel(self) -> RadialKernel:
        return self.kernel.build()

    def build_law(self) -> DiffusionLaw:
        return self.law.build()

    def build_initial(self) -> Callable:
        return self.initial.build()


def _require(ok: bool, path: str, message: str, value: Any):
    if not ok:
        raise ConfigError(f"{path}: {message}, got {value!r}")


def _require_choice(path: str, value: Any, choices: Tuple[str, ...]):
    if value not in choices:
        raise ConfigError(f"{path}: must be one of {', '.join(choices)}, got {value!r}")


def _number(path: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{path}: expected a finite number, got {value!r}")
    return float(value)


def _integer(path: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _flag(path: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true or false, got {value!r}")
    return value


def _string(path: str, value: Any) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


def _numbers(path: str, value: Any) -> Tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected an array of numbers, got {value!r}")
    return tuple(_number(f"{path}[{i}]", v) for i, v in enumerate(value))


# key -> converter, per section
_SCHEMA: Dict[str, Dict[str, Callable[[str, Any], Any]]] = {
    'domain': {'x_min': _number, 'x_max': _number, 'y_min': _number, 'y_max': _number, 'n_square': _integer},
    'kernel': {'kind': _string, 'amplitude': _number, 'width': _number},
    'law': {'kind': _string, 'nu': _number, 'm': _number},
    'initial': {'kind': _string, 'value': _number, 'half_width': _number, 'center': _numbers, 'width': _number},
    'time': {
        'k': _number, 'gamma': _number, 'fp_tol': _number, 'fp_max_iters': _integer, 'lin_tol': _number,
        't_final': _number, 'direct_solve_limit': _integer, 'truncate_in_convolution': _flag,
        'truncate_in_diffusion': _flag, 'monitor_energy': _flag,
    },
    'output': {'directory': _string, 'threads': _integer, 'snapshot_every': _integer, 'snapshot_times': _numbers},
}


def _read_sections(document: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    sections = {}
    for name, table in document.items():
        if name not in _SCHEMA:
            raise ConfigError(f"{name}: unknown section")
        if not isinstance(table, dict):
            raise ConfigError(f"{name}: expected a table, got {table!r}")
        converters = _SCHEMA[name]
        converted = {}
        for key, value in table.items():
            path = f"{name}.{key}"
            if key not in converters:
                raise ConfigError(f"{path}: unknown key")
            converted[key] = converters[key](path, value)
        sections[name] = converted
    return sections


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a TOML run configuration.

    Raises:
        ConfigError: on malformed TOML, unknown keys, wrong types or
            out-of-range values; the message starts with the field path
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config: {e}") from e

    sections = _read_sections(document)

    domain = sections.get('domain', {})
    output = dict(sections.get('output', {}))
    time = dict(sections.get('time', {}))
    for key in ('snapshot_every', 'snapshot_times'):
        if key in output:
            time[key] = output.pop(key)

    options = {
        'domain': Rectangle(
            domain.get('x_min', DEFAULT_DOMAIN.x_min),
            domain.get('x_max', DEFAULT_DOMAIN.x_max),
            domain.get('y_min', DEFAULT_DOMAIN.y_min),
            domain.get('y_max', DEFAULT_DOMAIN.y_max),
        ),
        'kernel': KernelSpec(**sections.get('kernel', {})),
        'law': LawSpec(**sections.get('law', {})),
        'initial': InitialSpec(**sections.get('initial', {})),
        'time': TimeStepConfig(**time),
    }
    if 'n_square' in domain:
        options['n_square'] = domain['n_square']
    if 'directory' in output:
        options['output_dir'] = Path(output['directory'])
    if 'threads' in output:
        options['threads'] = output['threads']

    config = RunConfig(**options)
    log.debug("parsed config: %s", config)
    return config


def load_config(path) -> RunConfig:
    """
    Read and parse a configuration file.

    Raises:
        ConfigError: if the file cannot be read or fails validation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror or e})") from e
    return parse_config(text)
