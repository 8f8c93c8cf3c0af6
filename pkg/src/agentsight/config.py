"""Engine configuration: evaluation weights, planner thresholds, default
parameter grids, backend selection, data paths, seeds.

Simplex constraints are enforced at load; a config violating them never
constructs. See docs/config.example.yaml for a commented example.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, ValidationError

from .errors import ConfigError
from .mining.evaluate import EvalWeights
from .planner import Thresholds
from .reporting import ReportWeights
from .viz.evaluate import VizWeights


class MiningWeightsModel(BaseModel):
    stability: float = 0.5
    metric: float = 0.3
    llm: float = 0.2
    method_uncertainty: float = 0.5
    eval_uncertainty: float = 0.5


class VizWeightsModel(BaseModel):
    quality: float = 0.4
    alignment: float = 0.3
    path: float = 0.3


class ReportWeightsModel(BaseModel):
    relevance: float = 0.6
    completeness: float = 0.4


class ThresholdsModel(BaseModel):
    navigate: float = 0.6
    prune: float = 0.3
    depth_cap: int = 8
    max_retries: int = 2
    view_selection: float = 0.3  # e_v gate into the report


class BackendModel(BaseModel):
    type: Literal["mock", "remote"] = "mock"
    transcript: str | None = None
    error_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0
    endpoint: str = ""
    model: str = ""
    auth_env: str = "AGENTSIGHT_API_TOKEN"
    timeout: float = 30.0


class DataModel(BaseModel):
    users: str | None = None
    posts: str | None = None
    edges: str | None = None
    strict: bool = False


_DEFAULT_GRIDS: dict[str, list[dict[str, Any]]] = {
    "lda_topics": [
        {"k": k, "alpha": alpha, "beta": 0.01, "iterations": 60, "seed": 11}
        for k in (2, 3, 4, 5, 6, 7) for alpha in (0.1, 0.5)
    ],
    "louvain_communities": [
        {"resolution": r, "seed": 5} for r in (0.5, 1.0, 2.0)
    ],
    "dynamic_topic_modeling": [
        {"k": 5, "alpha": 0.1, "beta": 0.01, "iterations": 60, "seed": 11,
         "bin": "week", "penalty": 0.0, "min_segment": 2, "max_changepoints": 2},
    ],
    "dynamic_community_detection": [{"phases": 3, "resolution": 1.0, "seed": 5}],
    "change_point": [{"bin": "week", "penalty": 0.0, "min_segment": 2,
                      "max_changepoints": 2}],
    "time_binning": [{"bin": "week"}],
    "pagerank": [{"damping": 0.85, "tol": 1e-10, "max_iter": 500}],
    "betweenness": [{"normalized": True}],
    "kcore": [{}],
    "lexicon_sentiment": [{}],
    "keyword_stance": [{"lexicon": "default"}],
}


class EngineConfig(BaseModel):
    mining_weights: MiningWeightsModel = MiningWeightsModel()
    viz_weights: VizWeightsModel = VizWeightsModel()
    report_weights: ReportWeightsModel = ReportWeightsModel()
    thresholds: ThresholdsModel = ThresholdsModel()
    backend: BackendModel = BackendModel()
    data: DataModel = DataModel()
    default_grids: dict[str, list[dict[str, Any]]] = Field(
        default_factory=lambda: {k: [dict(p) for p in v] for k, v in _DEFAULT_GRIDS.items()})
    layout_seed: int = 7
    session_seed: int = 0
    api_token: str | None = None
    state_dir: str | None = None

    def eval_weights(self) -> EvalWeights:
        m = self.mining_weights
        return EvalWeights(w_stab=m.stability, w_metric=m.metric, w_llm=m.llm,
                           w_method=m.method_uncertainty, w_eval=m.eval_uncertainty)

    def viz_eval_weights(self) -> VizWeights:
        v = self.viz_weights
        return VizWeights(w_quality=v.quality, w_alignment=v.alignment, w_path=v.path)

    def report_eval_weights(self) -> ReportWeights:
        r = self.report_weights
        return ReportWeights(w_rel=r.relevance, w_comp=r.completeness)

    def planner_thresholds(self) -> Thresholds:
        t = self.thresholds
        return Thresholds(navigate=t.navigate, prune=t.prune,
                          depth_cap=t.depth_cap, max_retries=t.max_retries)

    def grid_for(self, method_id: str) -> list[dict[str, Any]]:
        return [dict(p) for p in self.default_grids.get(method_id, [{}])]

    def validate_constraints(self) -> "EngineConfig":
        # constructing the weight/threshold dataclasses runs their checks
        self.eval_weights()
        self.viz_eval_weights()
        self.report_eval_weights()
        self.planner_thresholds()
        return self


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> EngineConfig:
    raw: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        raw = yaml.safe_load(text) or {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    if overrides:
        raw = _deep_merge(raw, overrides)
    try:
        return EngineConfig(**raw).validate_constraints()
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def _deep_merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out
