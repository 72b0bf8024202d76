"""Build script for the optional compiled Monte-Carlo kernel.

The package works without the extension (a pure-Python kernel is selected
at import time); the extension only accelerates the Metropolis sweep loop.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "dimertrap._mc_kernel",
                ["src/dimertrap/_mc_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
