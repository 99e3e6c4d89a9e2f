"""Build script.

The compiled extension is optional: when Cython or a C compiler is missing,
the package installs anyway and falls back to the pure NumPy kernels at
import time. Set EIGENSERIES_NO_EXT=1 to skip the extension on purpose.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("EIGENSERIES_NO_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension("eigenseries._fast", sources=["src/eigenseries/_fast.pyx"])
    return cythonize([ext], language_level="3")


class OptionalBuildExt(build_ext):
    """Treat extension build failures as a soft fallback, not an error."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled core ({exc}); pure backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); pure backend will be used")


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
