"""agentsight: agent-driven insight discovery over social-media data.

A planner decomposes analytical goals into branching query -> mine ->
visualize -> report paths over a tri-modal snapshot (tabular users, post
texts, typed edges), guided by a machine-readable insight taxonomy, with
coordinators adapting data between stages and a scriptable LLM gateway for
fully offline, deterministic replays.
"""

__version__ = "0.1.0"

from .mining._kernels import KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND", "__version__"]
