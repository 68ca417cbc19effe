import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HAARDIAL_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "haardial._kernels",
                    ["src/haardial/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # finite inputs only, so skip the C99 inf/nan recovery in complex products
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
