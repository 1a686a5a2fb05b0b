"""Run configuration shared by the command-line tools."""
import argparse
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from qpredec.dem.codes import CssCodeSpec, load_code_spec
from qpredec.dem.model import DetectorErrorModel
from qpredec.dem.noise import (
    NoiseConfig,
    build_phenomenological_dem,
    build_phenomenological_sidecar,
    load_sidecar,
)
from qpredec.dem.text import load_dem, parse_dem, serialize_dem
from qpredec.pipeline.coloring import default_timeout
from qpredec.simulation.experiment import DecoderConfig, SweepPoint, sweep_points

DEFAULT_NS_PER_ITER = 20
DEFAULT_SHOTS = 10_000


@dataclass(frozen=True, eq=False)
class ModelSource:
    """Where a detector error model comes from: a DEM file or a code spec plus noise.

    Parameters
    ----------
    dem : DetectorErrorModel, optional
        Fixed model read from a file.
    code : CssCodeSpec, optional
    sector : {"X", "Z"}, default="Z"
    noise : NoiseConfig, optional
        Required with ``code``.
    label : str, default=""
    """
    dem: Optional[DetectorErrorModel] = None
    code: Optional[CssCodeSpec] = None
    sector: str = "Z"
    noise: Optional[NoiseConfig] = None
    label: str = ""

    def __post_init__(self):
        if (self.dem is None) == (self.code is None):
            raise ValueError("exactly one of a detector error model and a code spec is required.")
        if self.code is not None and self.noise is None:
            raise ValueError("a code-spec input needs a noise configuration.")

    @property
    def rounds(self) -> Optional[int]:
        if self.noise is not None:
            return self.noise.rounds
        return self.dem.rounds

    @property
    def distance(self) -> Optional[int]:
        return self.code.d if self.code is not None else None

    def model(self, p: Optional[float] = None) -> DetectorErrorModel:
        """The model, with ``p_data`` replaced by ``p`` for code-spec inputs."""
        if self.code is None:
            if p is not None:
                raise ValueError("a p-grid needs a code-spec input, not a fixed model.")
            return self.dem
        noise = self.noise if p is None else self.noise.scaled(p)
        return build_phenomenological_dem(self.code, self.sector, noise)

    def sidecar(self) -> Optional[Dict[int, str]]:
        if self.code is None:
            return None
        return build_phenomenological_sidecar(self.code, self.sector, self.noise)

    def to_dict(self) -> dict:
        if self.code is not None:
            return {"kind": "code", "label": self.label, "code": self.code.to_dict(),
                    "sector": self.sector, "noise": self.noise.to_dict()}
        return {"kind": "dem", "label": self.label, "text": serialize_dem(self.dem)}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSource":
        kind = data.get("kind")
        if kind == "code":
            return cls(code=CssCodeSpec.from_dict(data["code"]), sector=data["sector"],
                       noise=NoiseConfig(**data["noise"]), label=data.get("label", ""))
        if kind == "dem":
            return cls(dem=parse_dem(data["text"]), label=data.get("label", ""))
        raise ValueError(f"unknown model source kind {kind!r}.")


def _parse_list(text: Optional[str], kind, name: str) -> Optional[List]:
    if text is None:
        return None
    try:
        values = [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"`{name}` must be a comma-separated list, got {text!r}.")
    if not values:
        raise ValueError(f"`{name}` must not be empty.")
    return values


@dataclass
class RunConfig:
    """Flags of one command-line invocation.

    At most one model input is given: ``dem`` or ``code`` (with the noise flags).
    Commands that read a pipeline fall back on the model source stored in it.
    """
    dem: Optional[str] = None
    code: Optional[str] = None
    sector: str = "Z"
    rounds: Optional[int] = None
    p_data: Optional[float] = None
    p_meas: float = 0.
    p_hook: float = 0.
    sidecar: Optional[str] = None
    pipeline: Optional[str] = None
    timeout: Optional[float] = None
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    bp_iters: Optional[int] = None
    distance: Optional[int] = None
    ns_per_iter: int = DEFAULT_NS_PER_ITER
    truncate: int = 0
    p_grid: Optional[List[float]] = None
    truncate_grid: Optional[List[int]] = None
    osd_budget_x10: bool = False
    lenient_composites: bool = False
    workers: int = 1
    progress: bool = False
    force: bool = False
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if self.dem is not None and self.code is not None:
            raise ValueError("give exactly one input source: `--dem` or `--code`.")
        if self.code is not None:
            if self.rounds is None or self.p_data is None:
                raise ValueError("`--code` needs `--rounds` and `--p-data`.")
        if self.sector not in ("X", "Z"):
            raise ValueError(f"`sector` must be 'X' or 'Z', got {self.sector!r}.")
        if self.shots < 1:
            raise ValueError(f"`shots` must be >= 1, got {self.shots}.")
        if self.timeout is not None and self.timeout < 0:
            raise ValueError(f"`timeout` must be >= 0, got {self.timeout}.")
        if self.seed < 0:
            raise ValueError(f"`seed` must be non-negative, got {self.seed}.")
        if self.bp_iters is not None and self.bp_iters < 1:
            raise ValueError(f"`bp_iters` must be >= 1, got {self.bp_iters}.")
        if self.distance is not None and self.distance < 1:
            raise ValueError(f"`distance` must be >= 1, got {self.distance}.")
        if self.ns_per_iter < 1:
            raise ValueError(f"`ns_per_iter` must be >= 1, got {self.ns_per_iter}.")
        if self.truncate < 0:
            raise ValueError(f"`truncate` must be >= 0, got {self.truncate}.")
        if self.workers < 1:
            raise ValueError(f"`workers` must be >= 1, got {self.workers}.")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = vars(args)
        known = {name: values[name] for name in cls.__dataclass_fields__
                 if name in values}
        known["p_grid"] = _parse_list(values.get("p_grid"), float, "p_grid")
        known["truncate_grid"] = _parse_list(values.get("truncate_grid"), int, "truncate_grid")
        for name in ("p_meas", "p_hook", "shots", "seed", "ns_per_iter", "truncate", "workers"):
            if known.get(name) is None:
                known.pop(name, None)
        return cls(**known)

    @property
    def has_model_input(self) -> bool:
        return self.dem is not None or self.code is not None

    def noise(self) -> NoiseConfig:
        return NoiseConfig(self.p_data, self.p_meas, self.p_hook, self.rounds)

    def model_source(self) -> ModelSource:
        """The model input named by the flags."""
        if self.dem is not None:
            return ModelSource(dem=load_dem(self.dem), label=os.path.basename(self.dem))
        if self.code is not None:
            code = load_code_spec(self.code)
            return ModelSource(code=code, sector=self.sector, noise=self.noise(),
                               label=f"{code.name}:{self.sector}")
        raise ValueError("no input source: give `--dem` or `--code`.")

    def load_sidecar(self, source: ModelSource) -> Optional[Dict[int, str]]:
        if self.sidecar is not None:
            return load_sidecar(self.sidecar)
        return source.sidecar()

    def resolved_timeout(self) -> float:
        """``--timeout``, else ``QPREDEC_TIMEOUT``, else 60 seconds."""
        if self.timeout is not None:
            return self.timeout
        return default_timeout()

    def bp_iterations(self, source: ModelSource) -> int:
        """BP budget: ``--bp-iters``, else ``floor(d * 1000 / ns_per_iter)``.

        ``d`` is ``--distance``, else the code distance, else the number of rounds.
        """
        if self.bp_iters is not None:
            return self.bp_iters
        d = self.distance or source.distance or source.rounds
        if d is None:
            raise ValueError("cannot derive the BP budget: give `--bp-iters` or `--distance`.")
        return max(1, math.floor(d * 1000 / self.ns_per_iter))

    def decoder_config(self, source: ModelSource) -> DecoderConfig:
        return DecoderConfig(max_iters=self.bp_iterations(source),
                             osd_budget_x10=self.osd_budget_x10)

    def grid(self) -> List[SweepPoint]:
        return sweep_points(self.p_grid, self.truncate_grid)

    def output_paths(self, suffixes: Tuple[str, ...]) -> Optional[Tuple[str, ...]]:
        """``<out><suffix>`` per suffix, or None when writing to stdout."""
        if self.out is None:
            return None
        stem = self.out
        for suffix in suffixes:
            if stem.endswith(suffix):
                stem = stem[: -len(suffix)]
        return tuple(stem + suffix for suffix in suffixes)
