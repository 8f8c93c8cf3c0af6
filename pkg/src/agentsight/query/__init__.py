from .model import Op, QueryChain, QueryStep, SourceAll, SourceNode, pretty_print
from .parser import parse_query
from .executor import ChainResult, execute_chain, execute_step, link_subset

__all__ = [
    "Op", "QueryChain", "QueryStep", "SourceAll", "SourceNode", "pretty_print",
    "parse_query", "ChainResult", "execute_chain", "execute_step", "link_subset",
]
