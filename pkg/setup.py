"""Build script: compiles the optional search-kernel extension.

The package works without the extension (a pure-Python twin is selected at
import time); set DAGPEBBLE_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DAGPEBBLE_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("dagpebble._ccsearch", ["src/dagpebble/_ccsearch.pyx"])],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"warning: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
