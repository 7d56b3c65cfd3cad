"""Build script: compiles the optional graph-merge kernel.

The package is fully functional without the extension; cfl.kernel falls
back to the pure-Python implementation when the import fails.
"""
import os

from setuptools import Extension, setup

PYX = os.path.join("src", "cfl", "_ckernel.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("cfl._ckernel", [PYX], optional=True)],
            language_level="3",
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
