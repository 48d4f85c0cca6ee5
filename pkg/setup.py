"""Build script for the optional compiled arithmetic kernel.

The package is fully functional without the extension (a pure-Python kernel is
selected at import time); building it just makes the bilinear-group arithmetic
several times faster.  If Cython or a C toolchain or libgmp is unavailable the
build degrades to pure-Python with a warning instead of failing the install.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the kernel if we can; fall back to pure Python if we can't."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing entirely
            self._warn(exc)
            self.extensions = []

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # compile or link failure
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            "\n*** compiled kernel build failed (%s); "
            "installing with the pure-Python kernel only ***\n\n" % (exc,)
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        sys.stderr.write("*** Cython not available; skipping compiled kernel ***\n")
        return []
    from setuptools import Extension

    ext = Extension(
        "pmod.group._fastkernel",
        ["src/pmod/group/_fastkernel.pyx"],
        libraries=["gmp"],
        extra_compile_args=["-O2"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
