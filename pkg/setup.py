"""Build the optional compiled propagation kernel.

The package works without the extension (a pure-numpy kernel is selected at
import time), so any failure to compile is downgraded to a warning.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "berrygate._kernels._core",
                ["src/berrygate/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"warning: compiled kernel disabled ({exc!r}); "
          "falling back to the pure-Python propagator", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
