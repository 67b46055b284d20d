"""Scenario definition and YAML loading with strict validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .core import ContractError, cholesky4, DecompositionError
from .dynamics import MotionConfig
from .sensing import DEFAULT_SNR_CAL, RadarNode
from .threat import Asset, LinearThreat, crlb_cap_for_threat_mse
from .tracking import initial_cov as default_initial_cov

SHIPPED = Path(__file__).parent / "scenarios"


class ScenarioError(ValueError):
    """Scenario file failed validation; ``field`` names the offending key."""

    def __init__(self, field: str, message: str, line: Optional[int] = None, source: str = ""):
        where = f"{source}:" if source else ""
        where += f"{line}: " if line is not None else " " if source else ""
        super().__init__(f"{where}{field}: {message}")
        self.field = field
        self.line = line


@dataclass(frozen=True)
class Scenario:
    name: str
    radars: tuple
    asset: Asset
    motion: MotionConfig
    threat: LinearThreat
    target_init: np.ndarray
    frames: int
    initial_cov: np.ndarray
    p_threshold: float
    knn_k: int = 3
    seed: int = 0
    info_mode: str = "mean"
    mc_samples: int = 200
    on_infeasible: str = "saturate"
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "radars", tuple(self.radars))
        object.__setattr__(self, "target_init", np.asarray(self.target_init, dtype=float))
        object.__setattr__(self, "initial_cov", np.asarray(self.initial_cov, dtype=float))
        if not self.radars:
            raise ContractError("scenario needs at least one radar")
        ids = [r.id for r in self.radars]
        if len(set(ids)) != len(ids):
            raise ContractError("radar ids must be unique")
        if self.frames < 1:
            raise ContractError("frames must be >= 1")
        if not 1 <= self.knn_k <= len(self.radars):
            raise ContractError(f"knn_k must be in [1, {len(self.radars)}]")
        if self.info_mode not in ("mean", "monte_carlo"):
            raise ContractError(f"unknown info_mode {self.info_mode!r}")
        if self.on_infeasible not in ("saturate", "abort"):
            raise ContractError(f"unknown on_infeasible policy {self.on_infeasible!r}")
        if not self.p_threshold > 0:
            raise ContractError("p_threshold must be positive")

    @property
    def t_max(self) -> np.ndarray:
        return np.array([r.t_dwell_max for r in self.radars])


# ---------------------------------------------------------------------------
# loading

_TOP = {"name", "description", "seed", "frames", "motion", "threat", "asset", "target",
        "initial_cov", "radar_defaults", "radars", "allocator"}
_RADAR_PARAMS = {"beta", "theta3db", "rcs_avg", "snr_cal", "t_dwell_max"}


def _to_python(node, path: str, lines: dict):
    """Convert a composed YAML node, recording the line of every key path."""
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = key_node.value
            sub = f"{path}.{key}" if path else key
            if key in out:
                raise ScenarioError(sub, "duplicate key", key_node.start_mark.line + 1)
            out[key] = _to_python(value_node, sub, lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, f"{path}[{i}]", lines) for i, v in enumerate(node.value)]
    return yaml.constructor.SafeConstructor().construct_object(node)


class _Reader:
    def __init__(self, data: dict, lines: dict, source: str):
        self.data, self.lines, self.source = data, lines, source

    def fail(self, path: str, message: str):
        # missing keys report the line of their closest existing parent
        probe = path
        line = self.lines.get(probe)
        while line is None and probe:
            probe = probe.rsplit(".", 1)[0] if "." in probe else ""
            line = self.lines.get(probe)
        raise ScenarioError(path, message, line, self.source)

    def section(self, obj, path: str, allowed: set, required: set = frozenset()) -> dict:
        if not isinstance(obj, dict):
            self.fail(path, "expected a mapping")
        for key in obj:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else key, "unknown field")
        for key in sorted(required - set(obj)):
            self.fail(f"{path}.{key}" if path else key, "missing required field")
        return obj

    def number(self, obj: dict, key: str, path: str, default=None, positive=False,
               nonneg=False, integer=False):
        full = f"{path}.{key}" if path else key
        if key not in obj:
            if default is None:
                self.fail(full, "missing required field")
            return default
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(full, f"expected a number, got {value!r}")
        if integer and not isinstance(value, int):
            self.fail(full, f"expected an integer, got {value!r}")
        if not math.isfinite(value):
            self.fail(full, "must be finite")
        if positive and not value > 0:
            self.fail(full, f"must be positive, got {value}")
        if nonneg and value < 0:
            self.fail(full, f"must be non-negative, got {value}")
        return value

    def vector(self, value, path: str, length: int) -> list:
        if not isinstance(value, list) or len(value) != length:
            self.fail(path, f"expected a list of {length} numbers")
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                self.fail(f"{path}[{i}]", f"expected a finite number, got {v!r}")
        return [float(v) for v in value]


def _build(data: Any, lines: dict, source: str) -> Scenario:
    rd = _Reader(data, lines, source)
    top = rd.section(data, "", _TOP, {"name", "frames", "motion", "threat", "asset", "target",
                                      "radars", "allocator"})
    name = top["name"]
    if not isinstance(name, str) or not name:
        rd.fail("name", "expected a non-empty string")
    description = top.get("description", "")
    if not isinstance(description, str):
        rd.fail("description", "expected a string")
    seed = rd.number(top, "seed", "", default=0, nonneg=True, integer=True)
    frames = rd.number(top, "frames", "", positive=True, integer=True)

    m = rd.section(top["motion"], "motion", {"dt", "kappa"}, {"dt"})
    motion = MotionConfig(dt=rd.number(m, "dt", "motion", positive=True),
                          kappa=rd.number(m, "kappa", "motion", default=1.0, nonneg=True))

    th = rd.section(top["threat"], "threat", {"a", "b", "unit"}, {"a", "b"})
    a = rd.number(th, "a", "threat")
    if not a < 0:
        rd.fail("threat.a", f"slope must be negative, got {a}")
    b = rd.number(th, "b", "threat")
    if not b > 0:
        rd.fail("threat.b", f"intercept must be positive, got {b}")
    threat = LinearThreat(a, b, rd.number(th, "unit", "threat", default=1.0, positive=True))

    asset_sec = rd.section(top["asset"], "asset", {"position"}, {"position"})
    asset = Asset(tuple(rd.vector(asset_sec["position"], "asset.position", 2)))

    tgt = rd.section(top["target"], "target", {"state"}, {"state"})
    target_init = np.array(rd.vector(tgt["state"], "target.state", 4))

    if "initial_cov" in top:
        ic = rd.section(top["initial_cov"], "initial_cov", {"pos_sigma", "matrix"})
        if ("pos_sigma" in ic) == ("matrix" in ic):
            rd.fail("initial_cov", "give exactly one of pos_sigma or matrix")
        if "pos_sigma" in ic:
            p0 = default_initial_cov(motion.dt, rd.number(ic, "pos_sigma", "initial_cov", positive=True))
        else:
            rows = ic["matrix"]
            if not isinstance(rows, list) or len(rows) != 4:
                rd.fail("initial_cov.matrix", "expected 4 rows")
            p0 = np.array([rd.vector(r, f"initial_cov.matrix[{i}]", 4) for i, r in enumerate(rows)])
            if not np.allclose(p0, p0.T, rtol=0, atol=1e-12 * np.abs(p0).max()):
                rd.fail("initial_cov.matrix", "must be symmetric")
            try:
                cholesky4(p0)
            except DecompositionError as exc:
                rd.fail("initial_cov.matrix", str(exc))
            if np.linalg.matrix_rank(p0) < 4:
                rd.fail("initial_cov.matrix", "must be positive definite")
    else:
        p0 = default_initial_cov(motion.dt)

    defaults = {"beta": 1e6 / 3.0, "theta3db": 0.01, "rcs_avg": 1.0,
                "snr_cal": DEFAULT_SNR_CAL, "t_dwell_max": motion.dt}
    if "radar_defaults" in top:
        rdef = rd.section(top["radar_defaults"], "radar_defaults", _RADAR_PARAMS)
        for key in rdef:
            defaults[key] = rd.number(rdef, key, "radar_defaults", positive=True)

    if not isinstance(top["radars"], list) or not top["radars"]:
        rd.fail("radars", "expected a non-empty list")
    radars = []
    for i, entry in enumerate(top["radars"]):
        path = f"radars[{i}]"
        sec = rd.section(entry, path, {"id", "position"} | _RADAR_PARAMS, {"id", "position"})
        params = {k: rd.number(sec, k, path, default=defaults[k], positive=True) for k in _RADAR_PARAMS}
        rid = rd.number(sec, "id", path, integer=True)
        if rid in [r.id for r in radars]:
            rd.fail(f"{path}.id", f"duplicate radar id {rid}")
        radars.append(RadarNode(id=rid, position=tuple(rd.vector(sec["position"], f"{path}.position", 2)),
                                **params))

    al = rd.section(top["allocator"], "allocator",
                    {"p_threshold", "threat_mse_cap", "knn_k", "info_mode", "mc_samples", "on_infeasible"})
    if ("p_threshold" in al) == ("threat_mse_cap" in al):
        rd.fail("allocator", "give exactly one of p_threshold or threat_mse_cap")
    if "p_threshold" in al:
        p_threshold = rd.number(al, "p_threshold", "allocator", positive=True)
    else:
        cap = rd.number(al, "threat_mse_cap", "allocator", positive=True)
        p_threshold = crlb_cap_for_threat_mse(cap, threat) * threat.unit**2
    knn_k = rd.number(al, "knn_k", "allocator", default=3, positive=True, integer=True)
    if knn_k > len(radars):
        rd.fail("allocator.knn_k", f"must not exceed the number of radars ({len(radars)})")
    info_mode = al.get("info_mode", "mean")
    if info_mode not in ("mean", "monte_carlo"):
        rd.fail("allocator.info_mode", f"expected 'mean' or 'monte_carlo', got {info_mode!r}")
    mc_samples = rd.number(al, "mc_samples", "allocator", default=200, positive=True, integer=True)
    on_infeasible = al.get("on_infeasible", "saturate")
    if on_infeasible not in ("saturate", "abort"):
        rd.fail("allocator.on_infeasible", f"expected 'saturate' or 'abort', got {on_infeasible!r}")

    return Scenario(name=name, radars=tuple(radars), asset=asset, motion=motion, threat=threat,
                    target_init=target_init, frames=frames, initial_cov=p0, p_threshold=p_threshold,
                    knn_k=knn_k, seed=seed, info_mode=info_mode, mc_samples=mc_samples,
                    on_infeasible=on_infeasible, description=description)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError("<syntax>", str(getattr(exc, "problem", exc)),
                            mark.line + 1 if mark else None, source) from exc
    if node is None:
        raise ScenarioError("<root>", "empty scenario file", None, source)
    lines: dict = {}
    data = _to_python(node, "", lines)
    return _build(data, lines, source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists() and (SHIPPED / f"{path}.yaml").exists():
        path = SHIPPED / f"{path}.yaml"
    return parse_scenario(path.read_text(), str(path))


def shipped_scenario(name: str) -> Scenario:
    return load_scenario(SHIPPED / f"{name}.yaml")
