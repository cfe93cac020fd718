"""Build script for the optional compiled geometry kernel.

The package works without the extension: cmvsafety.geokernel falls back to
the pure-Python implementation when the compiled module is absent or when
CMVSAFETY_PURE_PYTHON is set.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "cmvsafety.geokernel._cykernel",
                ["src/cmvsafety/geokernel/_cykernel.pyx"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
