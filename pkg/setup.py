"""Build the optional compiled extended-precision kernels.

The package works without the extension (a NumPy fallback is selected at
import time); compiling is strongly recommended for any series work at
D >= 32.  Error-free transforms require that the compiler neither
contracts a*b+c into fma behind our back nor reassociates floating
point, hence -ffp-contract=off and no -ffast-math.  fma() is used
explicitly where we want it.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("FLOQMAG_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        flags = ["-O3", "-ffp-contract=off"]
        if sys.platform != "win32":
            flags += ["-march=native"]
        ext = Extension(
            "floqmag.xprec._core",
            ["src/floqmag/xprec/_core.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=flags,
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        print("floqmag: Cython/NumPy unavailable at build time; "
              "installing with the pure-NumPy fallback only.", file=sys.stderr)

setup(ext_modules=ext_modules)
