import os

from setuptools import setup

# SOLARCAST_PURE_PYTHON=1 skips the compiled kernel entirely; the package
# falls back to the numpy implementation at import time.
ext_modules = []
if not os.environ.get("SOLARCAST_PURE_PYTHON"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "solarcast.kernels._lmcore",
                    ["src/solarcast/kernels/_lmcore.pyx"],
                    include_dirs=[numpy.get_include()],
                )
            ],
            language_level="3",
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
