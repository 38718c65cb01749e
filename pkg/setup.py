"""Build script for the optional compiled kernel extension.

The extension is compiled with -O2 only.  -ffast-math and -march=native are
deliberately avoided: the pure-Python fallback goes through the same libm,
and keeping IEEE semantics (no reassociation, no contraction into FMA) is
what lets the two backends produce identical trajectories.  If no compiler
is available the build degrades to a pure-Python install and the package
falls back to the interpreted kernels at import time.
"""

import sys

from setuptools import setup
from setuptools.errors import CCompilerError, ExecError, PlatformError

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


def configured_extensions():
    if cythonize is None:
        return []
    from setuptools.extension import Extension

    ext = Extension(
        "wedgelab._kernels",
        ["src/wedgelab/_kernels.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level="3")


def run_setup(with_extension):
    setup(ext_modules=configured_extensions() if with_extension else [])


try:
    run_setup(True)
except (CCompilerError, ExecError, PlatformError, SystemExit) as exc:
    sys.stderr.write(f"compiled kernels unavailable ({exc}); pure-Python fallback only\n")
    run_setup(False)
