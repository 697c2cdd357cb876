"""Build script for the optional compiled competition core.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); building it just makes the Monte
Carlo bias harness roughly an order of magnitude faster.

Skip the extension entirely with LIGHTHOUSE_SKIP_EXT=1.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LIGHTHOUSE_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "lighthouse._biascore",
                    sources=["src/lighthouse/_biascore.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
