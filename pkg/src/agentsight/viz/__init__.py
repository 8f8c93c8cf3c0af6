from .evaluate import VizEval, VizWeights, combine_view_scores, evaluate_view
from .linkgraph import (DataItem, LinkGraph, LinkNode, atomize, bind_elements,
                        community_node, post_node, time_point_node, trace,
                        trace_via, user_node, word_node)
from .specs import (LayoutPlan, VizSpec, force_layout, generate_specs,
                    integrate_or_coordinate)

__all__ = [
    "DataItem", "LayoutPlan", "LinkGraph", "LinkNode", "VizEval", "VizSpec",
    "VizWeights", "atomize", "bind_elements", "combine_view_scores",
    "community_node", "evaluate_view", "force_layout", "generate_specs",
    "integrate_or_coordinate", "post_node", "time_point_node", "trace",
    "trace_via", "user_node", "word_node",
]
