"""Build script for the optional compiled kernel core.

The package is pure Python plus one Cython extension (dnasim._ckernels) holding
the Monte Carlo hot loops. The extension is optional: if Cython or a C compiler
is unavailable the build still succeeds and the NumPy fallback backend is used
at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "dnasim._ckernels",
                ["src/dnasim/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    import warnings

    warnings.warn("Cython not available; installing with the pure NumPy backend only.")

setup(ext_modules=ext_modules)
