import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional: without Cython or a C compiler the
# package falls back to the pure-Python kernel selected in tabp._kernels.
# Set TABP_NO_EXT=1 to skip the extension build entirely.
ext_modules = []
if not os.environ.get("TABP_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        randlib = os.path.join(os.path.dirname(np.random.__file__), "lib")
        ext_modules = cythonize(
            [
                Extension(
                    "tabp._kernels._speedups",
                    ["src/tabp/_kernels/_speedups.pyx"],
                    include_dirs=[np.get_include()],
                    library_dirs=[randlib],
                    libraries=["npyrandom"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
