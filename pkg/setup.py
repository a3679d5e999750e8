"""Build the optional Cython discharge kernel.

If Cython or a C compiler is unavailable the package installs without it and
``plumb.kernels`` falls back to the numpy implementation.
"""

import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PLUMB_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "plumb._discharge",
                    ["src/plumb/_discharge.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
