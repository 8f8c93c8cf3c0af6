"""Visualization effectiveness:

    e_v = w_quality * s_quality + w_alignment * s_alignment + w_path * (1 - u_path)

The rubric scores come from the gateway (scripted under the mock); the
accumulated path uncertainty u_path is supplied by the planner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import ConfigError, GatewayError
from ..gateway import Gateway, LlmAction, PromptSections
from .specs import VizSpec


@dataclass(frozen=True)
class VizWeights:
    w_quality: float = 0.4
    w_alignment: float = 0.3
    w_path: float = 0.3

    def __post_init__(self):
        if min(self.w_quality, self.w_alignment, self.w_path) < 0:
            raise ConfigError("viz weights must be non-negative")
        if abs(self.w_quality + self.w_alignment + self.w_path - 1.0) > 1e-9:
            raise ConfigError("viz weights must sum to 1")


@dataclass(frozen=True)
class VizEval:
    s_quality: float
    s_alignment: float
    u_path: float
    e_v: float
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"s_quality": self.s_quality, "s_alignment": self.s_alignment,
                "u_path": self.u_path, "e_v": self.e_v, "flags": list(self.flags)}


def combine_view_scores(s_quality: float, s_alignment: float, u_path: float,
                        weights: VizWeights, flags: tuple[str, ...] = ()) -> VizEval:
    e_v = (weights.w_quality * s_quality + weights.w_alignment * s_alignment
           + weights.w_path * (1.0 - u_path))
    return VizEval(s_quality=s_quality, s_alignment=s_alignment, u_path=u_path,
                   e_v=e_v, flags=flags)


def _spec_digest_summary(spec: VizSpec) -> dict:
    return {
        "viz_id": spec.viz_id,
        "viz_type": spec.viz_type,
        "title": spec.title,
        "encodings": dict(spec.encodings),
        "n_items": len(spec.data_items),
    }


def evaluate_view(spec: VizSpec, u_path: float, llm: Gateway,
                  weights: VizWeights = VizWeights(),
                  path_context: str = "") -> VizEval:
    """Rubric-score a spec (quality + goal alignment) and fold in the path
    uncertainty. Gateway exhaustion degrades both rubric scores to 0.5."""
    summary = _spec_digest_summary(spec)
    action = LlmAction(
        kind="Invoke", stage="vis",
        prompt=PromptSections(
            system="You grade chart specifications for readability and goal alignment.",
            path_context=path_context,
            task=f"Spec: {json.dumps(summary, sort_keys=True)}\n"
                 "Return quality and alignment scores in [0, 1].",
            output_schema='{"quality": 0.0, "alignment": 0.0}',
        ),
        schema_id="viz_rubric",
        context={"viz_id": spec.viz_id, "viz_type": spec.viz_type,
                 "title": spec.title},
    )
    flags: tuple[str, ...] = ()
    try:
        resp = llm.call(action)
        s_quality, s_alignment = float(resp["quality"]), float(resp["alignment"])
    except GatewayError:
        s_quality = s_alignment = 0.5
        flags = ("llm_fallback",)
    return combine_view_scores(s_quality, s_alignment, u_path, weights, flags)
