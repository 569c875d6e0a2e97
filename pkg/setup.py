import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The package works without the extension (a pure-Python scan kernel is
# selected at import time), so the build can be skipped explicitly.
extensions = []
if cythonize is not None and not os.environ.get("ROUTEBOOST_SKIP_EXT"):
    extensions = cythonize(
        [
            Extension(
                "routeboost._kernels._split_cy",
                ["src/routeboost/_kernels/_split_cy.pyx"],
                include_dirs=[np.get_include()],
                # No -ffast-math: the compiled scan must perform the exact
                # IEEE-754 operation sequence of the fallback.
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
