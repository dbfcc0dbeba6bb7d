"""contains RunConfig, the validated settings of a gapflow run"""
from typing import Any
from typing import Dict
from typing import List
from typing import Optional

import yaml
from box import Box
from pydantic import BaseModel
from pydantic import ValidationError
from pydantic import validator

from gapflow import ConfigurationError
from gapflow import DEFAULT_SEED
from gapflow import KWW_GRID_POINTS
from gapflow import QUADRATURE_RTOL
from gapflow.gapseries import construct_counterexample
from gapflow.gapseries import construct_example
from gapflow.gapseries import GapSeries
from gapflow.gapseries import load_series
from gapflow.utils import get_logger
from gapflow.utils import sha256_hex
from gapflow.weights import Weight
from gapflow.weights import weight_from_dict

logger = get_logger(__name__)

CONFIG_FILE = "gapflow-config.yaml"

CONSTRUCTORS = ("example", "counterexample")
FORMATS = ("csv", "json")


class WeightSpec(BaseModel):
    family: str
    a: Optional[float] = None
    depth: int = 1
    knots: Optional[List[List[float]]] = None
    file: Optional[str] = None

    def build(self) -> Weight:
        return weight_from_dict({k: v for k, v in self.dict().items() if v is not None})


class SeriesSpec(BaseModel):
    """constructor name with its parameters, or a series file"""

    constructor: Optional[str] = "example"
    A: float = 2.0
    count: int = 10
    seed: int = 1
    file: Optional[str] = None

    @validator("constructor")
    def known_constructor(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in CONSTRUCTORS:
            raise ValueError(f"constructor must be one of {CONSTRUCTORS}, got {v!r}")
        return v

    def build(self, w: Weight) -> GapSeries:
        if self.file:
            return load_series(self.file)
        if self.constructor == "counterexample":
            return construct_counterexample(w, self.count)
        return construct_example(w, self.A, self.count, seed=self.seed)


class ExperimentSpec(BaseModel):
    eps_grid: List[float] = [2.0**-k for k in range(2, 41, 2)]
    phi_samples: int = 64
    seed: int = DEFAULT_SEED
    mode: Optional[str] = None
    chain_count: Optional[int] = None
    N: Optional[int] = None
    kww_samples: int = KWW_GRID_POINTS
    circle_samples: Optional[int] = None
    min_loglog: float = 0.5
    rtol: float = QUADRATURE_RTOL

    @validator("phi_samples", "kww_samples")
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @validator("rtol")
    def relative_tolerance(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"rtol must lie in (0, 1), got {v}")
        return v

    @validator("eps_grid", each_item=True)
    def inside_disk(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError(f"eps = 1 - r must lie in (0, 1], got {v}")
        return v


class OutputSpec(BaseModel):
    out: str = "gapflow-out"
    format: str = "csv"

    @validator("format")
    def known_format(cls, v: str) -> str:
        if v not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {v!r}")
        return v


class RunConfig(BaseModel):
    """A run is reproducible from its config and seed alone."""

    weight: WeightSpec
    series: SeriesSpec = SeriesSpec()
    experiment: ExperimentSpec = ExperimentSpec()
    output: OutputSpec = OutputSpec()

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the validated config"""
        return sha256_hex(self.dict())

    def with_overrides(
        self, seed: Optional[int] = None, out: Optional[str] = None, fmt: Optional[str] = None
    ) -> "RunConfig":
        data = self.dict()
        if seed is not None:
            data["experiment"]["seed"] = seed
        if out is not None:
            data["output"]["out"] = out
        if fmt is not None:
            data["output"]["format"] = fmt
        return parse_config(data)


def parse_config(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.parse_obj(data)
    except ValidationError as e:
        logger.error(f"invalid run config: {e}")
        raise ConfigurationError(f"invalid run config: {e}")


def load_config(path: str = CONFIG_FILE) -> RunConfig:
    """Read a YAML run config, e.g. ./gapflow-config.yaml."""
    try:
        with open(path, "r") as f:
            box = Box(yaml.safe_load(f))
    except (yaml.parser.ParserError, yaml.scanner.ScannerError) as e:
        logger.error(f"YAML file error: {e}")
        raise ConfigurationError(f"YAML file error in {path}: {e}")
    except (TypeError, ValueError) as e:
        # Box refuses anything but a mapping at the top level
        logger.error(f"Python Box object error: {e}")
        raise ConfigurationError(f"{path} must hold a mapping of sections")
    except FileNotFoundError:
        logger.error(f"config file not found: {path}")
        raise ConfigurationError(f"config file not found: {path}")

    if "weight" not in box:
        logger.error(f"no weight section in {path}")
        raise ConfigurationError(f"{path} needs a 'weight' section")
    return parse_config(box.to_dict())
