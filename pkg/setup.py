"""Build script for the compiled evolution kernel.

The package works without the extension (a pure-python kernel is selected
at import time), so a failed compile only costs speed.  ``pip install -e .
--no-build-isolation`` builds it in place when Cython and a C compiler are
available.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, fall back to pure python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"compiled kernel skipped ({exc}); using the "
                          "pure-python backend", stacklevel=1)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernel skipped ({exc}); using the "
                          "pure-python backend", stacklevel=1)


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cascade_sim._core",
                ["src/cascade_sim/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
