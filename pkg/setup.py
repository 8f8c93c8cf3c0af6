"""Build script for the optional compiled Gibbs-sampling kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed cythonize is downgraded to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/agentsight/mining/_kernels/_gibbs.pyx",
        language_level=3,
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs.extend(include_dirs)
except Exception as exc:  # pragma: no cover - build-env dependent
    warnings.warn(f"compiled kernel skipped ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
