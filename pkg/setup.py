"""Build script: compiles the optional Cython kernel core.

The package works without the extension (pure-Python kernels are selected at
import time); the extension exists because the long-horizon kernels are
sequential and run ~50-100x faster compiled.  -ffp-contract=off keeps the
compiled arithmetic bit-identical to the interpreted fallback.
"""
import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "fvspine._core",
                ["src/fvspine/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - any build-chain failure falls back to pure python
    print(f"fvspine: skipping compiled core ({exc!r}); pure-Python kernels will be used",
          file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
