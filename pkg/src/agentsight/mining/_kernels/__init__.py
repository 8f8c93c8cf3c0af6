"""Kernel selection: compiled extension when built, pure Python otherwise.

Set AGENTSIGHT_PURE_PYTHON=1 to force the fallback (used by the benchmark
and the parity tests).
"""

import os

from ._gibbs_py import gibbs_lda as gibbs_lda_python

gibbs_lda_compiled = None
if not os.environ.get("AGENTSIGHT_PURE_PYTHON"):
    try:
        from ._gibbs import gibbs_lda as gibbs_lda_compiled  # type: ignore[no-redef]
    except ImportError:
        gibbs_lda_compiled = None

if gibbs_lda_compiled is not None:
    KERNEL_BACKEND = "compiled"
    gibbs_lda = gibbs_lda_compiled
else:
    KERNEL_BACKEND = "python"
    gibbs_lda = gibbs_lda_python

__all__ = ["gibbs_lda", "gibbs_lda_python", "gibbs_lda_compiled", "KERNEL_BACKEND"]
