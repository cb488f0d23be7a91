"""Build hook for the optional Cython kernels.

The package works without the extension; ``fpmslice.kernels`` falls back to
the pure-Python implementation when the compiled module is missing.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FPMSLICE_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "fpmslice.kernels._ckernels",
                    ["src/fpmslice/kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
