"""Build script for the optional compiled kernel lane.

The package is fully functional without the extension; `sfpas._kernels`
falls back to the pure-Python twin at import time.  Set SFPAS_SKIP_EXT=1
to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SFPAS_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "sfpas._kernels._speedups",
                    ["src/sfpas/_kernels/_speedups.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
