"""Build the compiled reduction/distance core.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed compile only costs speed.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "kitescore._core",
                ["src/kitescore/_core.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math: the exact summations rely on strict IEEE
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
