"""JSON run configuration shared by the CLI commands.

A config document looks like::

    {
      "model": {"kappa": 1, "alpha": 0, "mu": 0, "sigma": 0.2, "lambda": 0.5,
                "p_up": 0.4, "eta": 3, "theta_down": 2},
      "quadrature": {"abs_tol": 1e-10, "rel_tol": 1e-9},
      "simulation": {"n_paths": 100000, "seed": 1},
      "occupation": {"b": 0, "s": 1, "omega": 0.5, "theta_T": 0.3}
    }

Only ``model`` is required. Unknown keys are rejected at every level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .mc.sim import SimConfig
from .model import ModelParams
from .occupation import OccupationQuery
from .quad import QuadConfig

_TOP_KEYS = {"model", "quadrature", "simulation", "occupation"}
_QUERY_KEYS = {"b", "s", "omega", "theta_T"}


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    quadrature: QuadConfig = field(default_factory=QuadConfig)
    simulation: SimConfig | None = None
    occupation: OccupationQuery | None = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ValueError("config must be a JSON object")
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "model" not in data:
            raise ValueError("config needs a 'model' section")
        occupation = None
        if "occupation" in data:
            q = data["occupation"]
            bad = set(q) - _QUERY_KEYS
            if bad:
                raise ValueError(f"unknown occupation keys: {sorted(bad)}")
            missing = _QUERY_KEYS - set(q)
            if missing:
                raise ValueError(f"missing occupation keys: {sorted(missing)}")
            occupation = OccupationQuery(**q)
        return cls(
            model=ModelParams.from_dict(data["model"]),
            quadrature=QuadConfig.from_dict(data.get("quadrature", {})),
            simulation=SimConfig.from_dict(data["simulation"]) if "simulation" in data else None,
            occupation=occupation,
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"model": self.model.to_dict(), "quadrature": self.quadrature.to_dict()}
        if self.simulation is not None:
            out["simulation"] = self.simulation.to_dict()
        if self.occupation is not None:
            out["occupation"] = self.occupation.as_dict()
        return out
